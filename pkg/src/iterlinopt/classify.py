"""Attractive/repelling diagnosis of fixed points.

Two routes: perturbation sampling, which iterates from random feasible
starts near the point and tallies who comes back and who leaves, and the
exact dichotomy on the unit-diagonal PSD body, where the vertices are the
attractive fixed points and every other fixed point carries an explicit
norm-increasing escape curve as a witness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptope import (
    ElliptopeError,
    OracleConfig,
    check_symmetric,
    elliptope_oracle,
    fixed_point_certificate,
    gram_factor,
    gram_to_matrix,
    is_vertex,
    validate_elliptope,
)
from .engine import IterationConfig, iterate


@dataclass
class EscapeWitness:
    """Pair of indices driving the escape curve, with the squared norms
    along a grid of curve parameters (strictly increasing, all above the
    value at the fixed point)."""

    i: int
    j: int
    alphas: list
    norms_sq: list


@dataclass
class ClassificationResult:
    label: str  # attractive | repelling | neither | indeterminate | not_attractive
    eps: float
    samples: int
    returned: int
    escaped: int
    witness: EscapeWitness | None = None

    @property
    def undecided(self) -> int:
        """Samples that neither converged back nor left the eps ball."""
        return self.samples - self.returned - self.escaped


def classify_empirical(domain, x, eps, samples=32, seed=0, tol=1e-10,
                       max_iter=10_000, return_tol=None) -> ClassificationResult:
    """Sample feasible starts within eps of a fixed point and iterate each.

    A sample counts as returned when its endpoint lands within return_tol
    (default 10 * tol) of x, as escaped when some iterate leaves the eps
    ball. The label is attractive only when every sample returns, repelling
    only when every sample escapes, neither when nothing returns and
    nothing escapes (connected sets of fixed points behave this way), and
    indeterminate on mixed evidence. Per-sample seeds derive from
    (seed, sample index), so the verdict does not depend on scheduling.
    """
    x = np.asarray(x, dtype=float)
    fx = domain.maximize(x)
    if float(np.linalg.norm(np.ravel(fx - x))) > 10.0 * tol:
        raise ValueError("x is not a fixed point of the domain")
    if return_tol is None:
        return_tol = 10.0 * tol
    cfg = IterationConfig(tol=tol, max_iter=max_iter, record_trace=True,
                          validate_start=False)
    returned = 0
    escaped = 0
    for k in range(samples):
        rng = np.random.default_rng([seed, k])
        y0 = domain.sample_near(x, eps, rng)
        traj = iterate(domain, y0, cfg)
        dists = [float(np.linalg.norm(np.ravel(p - x))) for p in traj.points]
        if dists[-1] <= return_tol:
            returned += 1
        elif max(dists) > eps:
            escaped += 1
    if returned == samples:
        label = "attractive"
    elif escaped == samples:
        label = "repelling"
    elif returned == 0 and escaped == 0:
        label = "neither"
    else:
        label = "indeterminate"
    return ClassificationResult(label, eps, samples, returned, escaped)


def escape_pair(x, tol=1e-9):
    """Lexicographically first ordered pair (i, j) with x_ij away from +-1
    and row i no heavier (in sum of squares) than row j."""
    a = np.asarray(x, dtype=float)
    d = np.sum(a * a, axis=1)
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if abs(a[i, j]) >= 1.0 - tol:
                continue
            if d[i] <= d[j] + 1e-12:
                return i, j
    raise ElliptopeError("no escape pair exists: the matrix is a vertex")


def escape_curve(x, alpha, pair=None) -> np.ndarray:
    """Feasible deformation of a non-vertex fixed point that strictly
    increases the squared norm.

    Moves Gram row i toward row j (toward -row j when x_ij is negative)
    and renormalizes; the result stays a unit-diagonal PSD matrix for
    every alpha in [0, 1], equals x at alpha 0 and has strictly larger
    squared norm for alpha > 0, increasing in alpha.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a = check_symmetric(x)
    i, j = pair if pair is not None else escape_pair(a)
    v = gram_factor(a)
    sign = 1.0 if a[i, j] >= 0.0 else -1.0
    w = (1.0 - alpha) * v[i] + alpha * sign * v[j]
    z = float(np.linalg.norm(w))
    if z == 0.0:
        raise ElliptopeError("degenerate escape direction")
    v = v.copy()
    v[i] = w / z
    return gram_to_matrix(v, row_tol=1e-9)


def vertex_basin_check(x, m, config: OracleConfig | None = None,
                       tol=1e-9) -> bool:
    """Check one-step convergence to a vertex from a sign-compatible start.

    Any feasible matrix within unit Frobenius distance of a vertex shares
    its sign pattern, and the map then returns the vertex exactly in a
    single application. Inputs outside the stated ball are rejected.
    """
    if not is_vertex(x):
        raise ValueError("x must be a vertex (rank-one sign matrix)")
    mm = validate_elliptope(m, diag_tol=1e-8)
    if float(np.linalg.norm(mm - x)) >= 1.0:
        raise ValueError("m must lie within unit Frobenius distance of the vertex")
    res = elliptope_oracle(mm, config, warm_start=gram_factor(mm))
    return bool(np.max(np.abs(res.matrix - np.asarray(x, dtype=float))) <= tol)


def classify_elliptope_fixed_point(x, cert_tol=1e-8,
                                   alphas=None) -> ClassificationResult:
    """Exact dichotomy on the unit-diagonal PSD body.

    Vertices are attractive. Any other fixed point gets the label
    not_attractive together with an escape witness: arbitrarily near
    feasible matrices of strictly larger norm, from which iteration can
    never flow back (norms never decrease along a run). Nothing stronger
    than non-attractiveness is claimed for non-vertices.
    """
    a = check_symmetric(x)
    cert = fixed_point_certificate(a, cert_tol)
    if not cert.is_fixed:
        raise ValueError("input is not a fixed point within tolerance")
    if is_vertex(a):
        return ClassificationResult("attractive", 0.0, 0, 0, 0)
    if alphas is None:
        alphas = [k / 10.0 for k in range(1, 11)]
    i, j = escape_pair(a)
    norms = [float(np.vdot(xa, xa))
             for xa in (escape_curve(a, al, (i, j)) for al in alphas)]
    witness = EscapeWitness(i, j, list(alphas), norms)
    return ClassificationResult("not_attractive", 0.0, 0, 0, 0, witness)
