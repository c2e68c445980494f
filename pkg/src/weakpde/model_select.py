"""Candidate refinement and sparsity selection.

Given the sweep of sparse candidates (one per sparsity level), the pipeline
is: trim low-contribution groups from each candidate and refit (gf_trim),
score each refit by its squared residual q, and pick the sparsity level
theta* as the smallest one whose average residual reduction over the next L
levels, s = (q[theta] - q[theta+L]) / (L * q[1]), falls below the threshold
rho.  The selected candidate's coefficient splines are then sampled back
onto the spatial grid.

Trimming scores each active group by chi = ||F_v c_v|| / max_v ||F_v c_v||
using the candidate's own coefficients, so a group whose fitted contribution
to the reconstruction is small relative to the dominant group is dropped
even when its coefficient entries are not individually tiny.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gpsp import GroupSolution, _fit, gpsp_sweep


@dataclass(frozen=True, eq=False)
class TrimReport:
    """Outcome of trimming one candidate: chi scores for its groups, the
    groups removed, and the refit on the survivors."""

    theta: int
    scores: dict           # group index -> chi in [0, 1]
    removed: tuple
    refit: GroupSolution
    forced_keep: bool      # true when every group scored below tau


@dataclass(frozen=True, eq=False)
class SelectionReport:
    q: np.ndarray          # squared residuals, index theta-1
    s: np.ndarray          # residual-reduction scores, index theta-1 (length K-L)
    lookahead: int
    rho: float
    theta_star: int
    fallback: bool         # no s fell below rho; theta_star = argmin q
    trims: tuple           # TrimReport per sparsity level
    final: GroupSolution
    curves: dict           # group index -> c_k(x) sampled on the grid

    @property
    def support(self):
        return self.final.support


def gf_trim(system, solution, tau=0.1):
    """Drop groups of `solution` whose relative contribution is below tau.

    Contribution of group v is ||F_v c_v||_2 with c taken from the input
    solution; scores are normalized by the largest contribution.  If nothing
    falls below tau the input solution is kept as-is (no refit).  If
    everything does, the top-scoring group is kept and the report is flagged.
    """
    if not 0 <= tau < 1:
        raise ValueError("trim threshold must lie in [0, 1)")
    m = system.m_per_group
    support = solution.support
    energies = np.array([
        np.linalg.norm(system.group_columns(k) @ solution.coefficients[k * m:(k + 1) * m])
        for k in support
    ])
    peak = energies.max()
    if peak == 0.0:
        # degenerate candidate (zero fit); nothing meaningful to rank
        chi = np.zeros(len(support))
    else:
        chi = energies / peak
    scores = {k: float(c) for k, c in zip(support, chi)}

    survivors = tuple(k for k, c in zip(support, chi) if c >= tau)
    forced = False
    if not survivors:
        survivors = (support[int(np.argmax(energies))],)
        forced = True
    removed = tuple(k for k in support if k not in survivors)

    if not removed and not forced:
        return TrimReport(theta=solution.sparsity, scores=scores, removed=(),
                          refit=solution, forced_keep=False)

    c, res, rank_bad = _fit(system.F, system.b, survivors, m)
    refit = GroupSolution(support=survivors, coefficients=c, residual=res,
                          sparsity=solution.sparsity, iterations=0,
                          converged=True, rank_deficient=rank_bad)
    return TrimReport(theta=solution.sparsity, scores=scores, removed=removed,
                      refit=refit, forced_keep=forced)


def rr_select(q, lookahead, rho):
    """Pick the sparsity level from the squared-residual sequence q[theta-1].

    Returns (theta_star, s, fallback): s[theta-1] = (q[theta] - q[theta+L])
    / (L * q[1]) and theta_star is the smallest theta with s < rho.  When no
    level qualifies, theta_star = argmin q and fallback is True.  A perfect
    fit at theta = 1 short-circuits to theta_star = 1.
    """
    q = np.asarray(q, dtype=float)
    n = len(q)
    if not 1 <= lookahead < n:
        raise ValueError(f"lookahead must lie in [1, {n - 1}]")
    if np.any(q < 0):
        raise ValueError("squared residuals must be nonnegative")
    if q[0] == 0.0:
        return 1, np.zeros(n - lookahead), False
    s = (q[:n - lookahead] - q[lookahead:]) / (lookahead * q[0])
    below = np.nonzero(s < rho)[0]
    if below.size:
        return int(below[0]) + 1, s, False
    return int(np.argmin(q)) + 1, s, True


def project_onto_basis(func, basis, nodes_per_interval=16):
    """L2-project a function onto a periodic spline basis (Gram solve).

    func maps an x array to values; quadrature is Gauss-Legendre per knot
    interval over one period, which integrates the spline products exactly.
    """
    if not basis.periodic:
        raise ValueError("projection is defined on the periodic coefficient basis")
    nodes_1, weights_1 = np.polynomial.legendre.leggauss(nodes_per_interval)
    # map the reference rule onto every knot interval of the period
    starts = basis.start + basis.h * np.arange(basis.count)
    nodes = (starts[:, None] + 0.5 * basis.h * (nodes_1 + 1.0)[None, :]).ravel()
    weights = np.tile(0.5 * basis.h * weights_1, basis.count)

    phi = basis.eval_all(nodes)                     # (M, n_nodes)
    gram = (phi * weights) @ phi.T
    rhs = (phi * weights) @ np.asarray(func(nodes), dtype=float).ravel()
    return np.linalg.solve(gram, rhs)


def reconstruct_coefficients(solution, basis, x):
    """Sample each active group's coefficient spline on the grid x.

    Returns {group index: array over x}.
    """
    x = np.asarray(x, dtype=float)
    phi = basis.eval_all(x)                         # (M, nx)
    m = basis.count
    return {k: solution.coefficients[k * m:(k + 1) * m] @ phi
            for k in solution.support}


def select_model(system, x, theta_max=None, trim_tau=0.1, lookahead=3,
                 rho=0.01, trim=True):
    """Run sweep -> trim -> residual-reduction selection on a weak system."""
    n_groups = system.n_groups
    theta_max = n_groups if theta_max is None else min(theta_max, n_groups)
    sweep = gpsp_sweep(system.F, system.b, system.m_per_group, theta_max)
    if trim:
        trims = tuple(gf_trim(system, sol, trim_tau) for sol in sweep)
    else:
        trims = tuple(TrimReport(theta=sol.sparsity, scores={}, removed=(),
                                 refit=sol, forced_keep=False) for sol in sweep)
    q = np.array([t.refit.residual ** 2 for t in trims])
    theta_star, s, fallback = rr_select(q, lookahead, rho)
    final = trims[theta_star - 1].refit
    curves = reconstruct_coefficients(final, system.coeff_basis, x)
    return SelectionReport(q=q, s=s, lookahead=lookahead, rho=rho,
                           theta_star=theta_star, fallback=fallback,
                           trims=trims, final=final, curves=curves)
