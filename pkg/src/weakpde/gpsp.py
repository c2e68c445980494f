"""Group subspace pursuit for the block-structured weak system.

Columns of F come in K groups of m (one group per dictionary feature, one
column per coefficient spline).  For a target sparsity theta the solver keeps
a working set of theta groups, alternately screening groups by how well their
column space explains the current residual and pruning a merged candidate set
by the energy ||F_i c_i|| of the least-squares fit.  The screen uses the
normalized group projections g_i = F_i F_i^+ r / ||.||, so a group's score is
the norm of the projection of r onto its span regardless of conditioning
inside the group.

Iteration stops when the support repeats (fixpoint) or when the residual
increases, in which case the previous support is returned.  All least-squares
solves are minimum-norm; rank deficiency of a subproblem sets a flag on the
returned solution rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ITER = 100


@dataclass(frozen=True, eq=False)
class GroupSolution:
    """One sparse fit: support is a sorted tuple of group indices and
    coefficients is the full-length vector with zeros off the support."""

    support: tuple
    coefficients: np.ndarray
    residual: float
    sparsity: int
    iterations: int
    converged: bool
    rank_deficient: bool


def _columns(support, m):
    idx = []
    for k in support:
        idx.extend(range(k * m, (k + 1) * m))
    return np.asarray(idx, dtype=int)


def _fit(F, b, support, m):
    """Min-norm least squares on the listed groups; returns (c_full, residual, rank_flag)."""
    cols = _columns(support, m)
    sub = F[:, cols]
    c_sub, _, rank, _ = np.linalg.lstsq(sub, b, rcond=None)
    c = np.zeros(F.shape[1])
    c[cols] = c_sub
    r = b - sub @ c_sub
    return c, float(np.linalg.norm(r)), rank < sub.shape[1]


def _top(scores, theta):
    """Indices of the theta largest scores; ties resolved to the smallest index."""
    order = np.argsort(-scores, kind="stable")
    return tuple(sorted(order[:theta]))


def _screen(pinvs, blocks, r):
    """|g_i . r| for the normalized projection direction of each group."""
    scores = np.zeros(len(blocks))
    for i, (Fi, Pi) in enumerate(zip(blocks, pinvs)):
        g = Fi @ (Pi @ r)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            scores[i] = abs(g @ r) / norm
    return scores


def gpsp_solve(F, b, m_per_group, theta, _pinvs=None):
    """Best theta-group fit of F c = b with groups of m_per_group columns."""
    F = np.asarray(F, dtype=float)
    b = np.asarray(b, dtype=float)
    n_groups, rem = divmod(F.shape[1], m_per_group)
    if rem:
        raise ValueError("column count is not a multiple of the group size")
    if not 1 <= theta <= n_groups:
        raise ValueError(f"sparsity must lie in [1, {n_groups}]")

    blocks = [F[:, k * m_per_group:(k + 1) * m_per_group] for k in range(n_groups)]
    pinvs = _pinvs if _pinvs is not None else [np.linalg.pinv(Fi) for Fi in blocks]

    support = _top(_screen(pinvs, blocks, b), theta)
    c, res, rank_bad = _fit(F, b, support, m_per_group)

    iterations = 0
    converged = False
    for iterations in range(1, MAX_ITER + 1):
        r = b - F @ c
        merged = sorted(set(support) | set(_top(_screen(pinvs, blocks, r), theta)))
        c_merged, _, _, _ = np.linalg.lstsq(F[:, _columns(merged, m_per_group)], b, rcond=None)
        energies = np.zeros(len(merged))
        for pos, k in enumerate(merged):
            ck = c_merged[pos * m_per_group:(pos + 1) * m_per_group]
            energies[pos] = np.linalg.norm(blocks[k] @ ck)
        keep = _top(energies, theta)
        new_support = tuple(sorted(merged[pos] for pos in keep))

        c_new, res_new, rank_bad_new = _fit(F, b, new_support, m_per_group)
        if res_new > res:
            converged = True       # residual went up: keep the previous support
            break
        prev = support
        support, c, res, rank_bad = new_support, c_new, res_new, rank_bad_new
        if support == prev:
            converged = True
            break

    return GroupSolution(support=support, coefficients=c, residual=res,
                         sparsity=theta, iterations=iterations,
                         converged=converged, rank_deficient=bool(rank_bad))


def gpsp_sweep(F, b, m_per_group, theta_max):
    """gpsp_solve for every sparsity 1..theta_max (capped at the group count)."""
    F = np.asarray(F, dtype=float)
    b = np.asarray(b, dtype=float)
    n_groups = F.shape[1] // m_per_group
    theta_max = min(theta_max, n_groups)
    blocks = [F[:, k * m_per_group:(k + 1) * m_per_group] for k in range(n_groups)]
    pinvs = [np.linalg.pinv(Fi) for Fi in blocks]
    return [gpsp_solve(F, b, m_per_group, theta, _pinvs=pinvs)
            for theta in range(1, theta_max + 1)]
