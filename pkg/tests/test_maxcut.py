import numpy as np
import pytest

from iterlinopt import (
    GraphFormatError,
    OracleConfig,
    WeightedGraph,
    brute_force_maxcut,
    cut_value,
    gw_hyperplane_round,
    l4_family,
    load_graph,
    maxcut_pipeline,
    relaxation_cost,
    relaxed_cut_value,
    round_by_iteration,
    solve_relaxation,
)


def complete_graph(n, w=1.0):
    return WeightedGraph(n, [(u, v, w) for u in range(n) for v in range(u + 1, n)])


def path_graph(n, w=1.0):
    return WeightedGraph(n, [(k, k + 1, w) for k in range(n - 1)])


K3 = complete_graph(3)


class TestGraphIO:
    def test_triangle(self, tmp_path):
        p = tmp_path / "k3.txt"
        p.write_text("0 1 1.0\n1 2 1.0\n0 2 1.0\n")
        g = load_graph(p)
        assert g.n == 3
        assert g.edges == [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]

    def test_default_weight(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("0 1\n")
        g = load_graph(p)
        assert g.edges == [(0, 1, 1.0)]

    def test_comments_and_blank_lines(self, tmp_path):
        p = tmp_path / "c.txt"
        p.write_text("# header\n\n0 1 2.0  # inline\n")
        assert load_graph(p).edges == [(0, 1, 2.0)]

    def test_self_loop_rejected_with_line_number(self, tmp_path):
        p = tmp_path / "loop.txt"
        p.write_text("0 1 1.0\n0 0 1.0\n")
        with pytest.raises(GraphFormatError, match=":2:"):
            load_graph(p)

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0 one 1.0\n")
        with pytest.raises(GraphFormatError, match=":1:"):
            load_graph(p)

    def test_negative_index(self, tmp_path):
        p = tmp_path / "neg.txt"
        p.write_text("-1 2\n")
        with pytest.raises(GraphFormatError):
            load_graph(p)

    def test_duplicates_summed_with_warning(self, tmp_path):
        p = tmp_path / "dup.txt"
        p.write_text("0 1 1.0\n1 0 2.0\n")
        with pytest.warns(UserWarning):
            g = load_graph(p)
        assert g.edges == [(0, 1, 3.0)]


class TestCutArithmetic:
    def test_cost_is_negated_weights(self):
        c = relaxation_cost(K3)
        w = K3.weight_matrix()
        assert np.array_equal(c, -w)
        assert np.all(np.diag(c) == 0.0)

    def test_relaxed_cut_on_vertex_counts_crossing_edges(self):
        s = np.array([1.0, 1.0, -1.0])
        assert relaxed_cut_value(K3, np.outer(s, s)) == 2.0

    def test_relaxed_cut_on_face_point(self):
        x = np.full((3, 3), -0.5)
        np.fill_diagonal(x, 1.0)
        assert relaxed_cut_value(K3, x) == 2.25

    def test_single_edge(self):
        g = WeightedGraph(2, [(0, 1, 1.0)])
        x = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert relaxed_cut_value(g, x) == 1.0

    def test_cut_value_examples(self):
        assert cut_value(K3, [1, 1, -1]) == 2.0
        assert cut_value(K3, [1, 1, 1]) == 0.0
        g = WeightedGraph(2, [(0, 1, 2.5)])
        assert cut_value(g, [1, -1]) == 2.5

    def test_cut_value_length_check(self):
        with pytest.raises(ValueError):
            cut_value(K3, [1, -1])


class TestBruteForce:
    def test_triangle(self):
        signs, val = brute_force_maxcut(K3)
        assert val == 2.0
        assert cut_value(K3, signs) == 2.0

    def test_complete_four(self):
        _, val = brute_force_maxcut(complete_graph(4))
        assert val == 4.0

    def test_path(self):
        _, val = brute_force_maxcut(path_graph(3))
        assert val == 2.0

    def test_cap(self):
        with pytest.raises(ValueError):
            brute_force_maxcut(WeightedGraph(23, []))

    def test_weighted(self):
        g = WeightedGraph(4, [(0, 1, 3.0), (1, 2, -1.0), (2, 3, 2.0), (0, 3, 0.5)])
        signs, val = brute_force_maxcut(g)
        # independent recount over all sign vectors
        best = max(
            sum(w for u, v, w in g.edges if (k >> u) & 1 != (k >> v) & 1)
            for k in range(16))
        assert val == best == cut_value(g, signs)


class TestRelaxation:
    def test_triangle_optimum_matches_symmetric_slice_scan(self):
        res = solve_relaxation(K3, OracleConfig(seed=0))
        # independent oracle: scan the symmetric slice x(t), offdiag t
        ts = np.linspace(-0.5, 1.0, 30_001)
        best = max((6.0 - 6.0 * t) / 4.0 for t in ts)
        assert relaxed_cut_value(K3, res.matrix) == pytest.approx(best, abs=1e-8)
        off = res.matrix[~np.eye(3, dtype=bool)]
        assert np.max(np.abs(off + 0.5)) < 1e-6

    def test_single_edge_antipodal(self):
        g = WeightedGraph(2, [(0, 1, 1.0)])
        res = solve_relaxation(g)
        assert abs(res.matrix[0, 1] + 1.0) < 1e-9

    def test_empty_graph_objective_zero(self):
        g = WeightedGraph(3, [])
        res = solve_relaxation(g)
        assert res.objective == 0.0


class TestHyperplaneRounding:
    def test_antipodal_rows_always_split(self):
        v = np.array([[1.0, 0.0], [-1.0, 0.0]])
        g = WeightedGraph(2, [(0, 1, 1.0)])
        _, val = gw_hyperplane_round(v, g, samples=16, seed=1)
        assert val == 1.0

    def test_triangle_optimum_cuts_two(self):
        res = solve_relaxation(K3, OracleConfig(seed=0))
        _, val = gw_hyperplane_round(res.gram, K3, samples=64, seed=0)
        assert val == 2.0

    def test_identical_rows_cut_nothing(self):
        v = np.tile(np.array([1.0, 0.0]), (3, 1))
        _, val = gw_hyperplane_round(v, K3, samples=8, seed=0)
        assert val == 0.0


class TestRounding:
    def test_vertex_input_returns_immediately(self):
        report = round_by_iteration(np.ones((3, 3)), graph=K3)
        assert report.terminal_status == "vertex"
        assert report.iterations == 0 and report.escapes == 0
        assert np.array_equal(report.partition, [1, 1, 1])
        assert report.cut_value == 0.0

    def test_triangle_relaxation_rounds_to_optimal_cut(self):
        res = solve_relaxation(K3, OracleConfig(seed=0))
        report = round_by_iteration(res.matrix, OracleConfig(seed=0), graph=K3)
        assert report.terminal_status == "vertex"
        assert report.cut_value == 2.0
        assert report.escapes >= 1  # the optimum is itself a fixed point

    def test_identity_start_escapes_then_hits_vertex(self):
        report = round_by_iteration(np.eye(4), OracleConfig(seed=0))
        assert report.terminal_status == "vertex"
        assert report.escapes >= 1
        assert set(np.unique(report.partition)) <= {-1, 1}

    def test_norms_never_decrease(self):
        res = solve_relaxation(complete_graph(5), OracleConfig(seed=0))
        report = round_by_iteration(res.matrix, OracleConfig(seed=0),
                                    graph=complete_graph(5))
        assert np.all(np.diff(report.norms_sq) >= -1e-9)

    def test_family_member_start(self):
        report = round_by_iteration(l4_family(0.3), OracleConfig(seed=0))
        assert report.terminal_status == "vertex"


class TestPipeline:
    def test_triangle_full_chain(self):
        report = maxcut_pipeline(K3, OracleConfig(seed=0), baseline_samples=64,
                                 brute_force=True)
        assert report.cut_value == 2.0
        assert report.brute_force_cut == 2.0
        assert report.baseline_cut == 2.0
        assert report.relaxed_cut == pytest.approx(2.25, abs=1e-6)
        assert report.relaxed_cut >= report.brute_force_cut

    def test_complete_graphs_hit_the_optimum(self):
        for n in (4, 5, 6, 7, 8):
            g = complete_graph(n)
            report = maxcut_pipeline(g, OracleConfig(seed=0), brute_force=True)
            assert report.brute_force_cut == n * n // 4
            assert report.cut_value == n * n // 4
            assert report.relaxed_cut >= report.brute_force_cut - 1e-9

    def test_paths_are_cut_completely(self):
        for n in (3, 5, 8):
            g = path_graph(n)
            report = maxcut_pipeline(g, OracleConfig(seed=0), brute_force=True)
            assert report.brute_force_cut == n - 1
            assert report.relaxed_cut >= n - 1 - 1e-9
            assert report.cut_value == n - 1

    def test_random_graphs_valid_and_dominated_by_relaxation(self):
        rng = np.random.default_rng(100)
        for _ in range(8):
            n = int(rng.integers(4, 11))
            perm = rng.permutation(n)
            edges = {(min(int(perm[k]), int(perm[k + 1])),
                      max(int(perm[k]), int(perm[k + 1]))) for k in range(n - 1)}
            for u in range(n):
                for v in range(u + 1, n):
                    if rng.random() < 0.4:
                        edges.add((u, v))
            g = WeightedGraph(n, [(u, v, 1.0) for u, v in sorted(edges)])
            report = maxcut_pipeline(g, OracleConfig(seed=0), brute_force=True)
            assert set(np.unique(report.partition)) <= {-1, 1}
            recount = sum(w for u, v, w in g.edges
                          if report.partition[u] != report.partition[v])
            assert report.cut_value == recount
            assert report.relaxed_cut >= report.brute_force_cut - 1e-9

    def test_determinism(self):
        a = maxcut_pipeline(complete_graph(6), OracleConfig(seed=3),
                            baseline_samples=32, brute_force=True)
        b = maxcut_pipeline(complete_graph(6), OracleConfig(seed=3),
                            baseline_samples=32, brute_force=True)
        assert np.array_equal(a.partition, b.partition)
        assert a.norms_sq == b.norms_sq
        assert a.relaxation_objective == b.relaxation_objective
        assert a.cut_value == b.cut_value


class TestGraphType:
    def test_invalid_edges_rejected(self):
        with pytest.raises(ValueError):
            WeightedGraph(3, [(1, 0, 1.0)])
        with pytest.raises(ValueError):
            WeightedGraph(3, [(0, 3, 1.0)])
        with pytest.raises(ValueError):
            WeightedGraph(3, [(0, 1, 1.0), (0, 1, 2.0)])
        with pytest.raises(ValueError):
            WeightedGraph(2, [(0, 1, np.inf)])

    def test_weight_matrix_symmetry(self):
        w = K3.weight_matrix()
        assert np.array_equal(w, w.T)
        assert K3.total_weight == 3.0
