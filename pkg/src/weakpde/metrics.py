"""Evaluation metrics for identified models against a declared ground truth.

The reference coefficient vector c* lives in the same K*M layout as the
fitted one: the true varying coefficient of each active group is L2-projected
onto the coefficient spline basis and written into that group's block, all
other entries zero.  Support metrics (TPR/PPV) count feature groups, not
individual spline columns: identifying the right PDE terms is a group-level
statement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model_select import project_onto_basis


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """True support (group indices) and the projected coefficient vector."""

    support: tuple
    c_star: np.ndarray

    def __post_init__(self):
        if not self.support:
            raise ValueError("ground truth support is empty")
        object.__setattr__(self, "c_star", np.asarray(self.c_star, dtype=float))
        if np.linalg.norm(self.c_star) == 0.0:
            raise ValueError("ground truth coefficients are identically zero")


def make_ground_truth(dictionary, basis, coef_funcs):
    """Build a GroundTruth from {label: coefficient function or constant}.

    Labels must name groups of the dictionary; constants are promoted to
    constant functions before projection.
    """
    m = basis.count
    c_star = np.zeros(len(dictionary) * m)
    support = []
    for label, coef in coef_funcs.items():
        k = dictionary.index_of(label)
        support.append(k)
        if callable(coef):
            func = coef
        else:
            value = float(coef)
            func = lambda x, v=value: np.full_like(np.asarray(x, dtype=float), v)
        c_star[k * m:(k + 1) * m] = project_onto_basis(func, basis)
    return GroundTruth(support=tuple(sorted(support)), c_star=c_star)


def e2_error(c, c_star):
    """Relative l2 coefficient error ||c* - c|| / ||c*||."""
    c = np.asarray(c, dtype=float)
    c_star = np.asarray(c_star, dtype=float)
    if c.shape != c_star.shape:
        raise ValueError("coefficient vectors differ in length")
    denom = np.linalg.norm(c_star)
    if denom == 0.0:
        raise ValueError("reference coefficient vector is zero")
    return float(np.linalg.norm(c_star - c) / denom)


def residual_error(F, c, b):
    """Relative residual ||F c - b|| / ||b||."""
    b = np.asarray(b, dtype=float)
    denom = np.linalg.norm(b)
    if denom == 0.0:
        raise ValueError("response vector is zero")
    return float(np.linalg.norm(np.asarray(F) @ np.asarray(c, dtype=float) - b) / denom)


def support_scores(found, truth):
    """(TPR, PPV) of a found support against the true one, both group-level."""
    found = set(found)
    truth = set(truth)
    if not truth:
        raise ValueError("true support is empty")
    if not found:
        raise ValueError("found support is empty")
    hits = len(found & truth)
    return hits / len(truth), hits / len(found)
