"""Data-driven sizing of the weak-form test functions.

The test-function half-width alpha per axis comes from where the data's power
spectrum transitions into its noise floor: per-row DFT magnitudes are averaged
across the orthogonal axis (and channels), their cumulative sum over bins
0..N/2 is fit with a continuous two-piece linear function, and the critical
bin k* is the SSE-minimizing breakpoint.  With the matched-Gaussian picture of
an order-p B-spline (sigma = alpha/sqrt(3p)), placing k* at tau standard
deviations into the spectral tail gives

    alpha = sqrt(3 p) * (N - 1) * delta * tau / (2 pi k*).

The temporal axis uses the mirrored formula; the source write-up only states
the spatial one and says the temporal direction is designed "in a similar
way", so the mirror is a documented choice here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bspline import interior_basis, periodic_basis

AXES = ("space", "time")


def fit_changepoint(y, x=None):
    """Breakpoint index of the best continuous two-piece linear fit to y.

    Exhaustive search over interior integer breakpoints; each candidate fits
    a + b1*min(x-xc,0) + b2*max(x-xc,0) by least squares.  Returns the
    SSE-minimizing index (>= 1).  Ties go to the smallest index.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 4:
        raise ValueError(f"changepoint fit needs at least 4 points, got {n}")
    x = np.arange(n, dtype=float) if x is None else np.asarray(x, dtype=float)
    best_c, best_sse = None, np.inf
    for c in range(1, n - 1):
        d = x - x[c]
        design = np.column_stack([np.ones(n), np.minimum(d, 0.0), np.maximum(d, 0.0)])
        coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        sse = float(np.sum((design @ coef - y) ** 2))
        if best_c is None or sse < best_sse - 1e-12 * (1.0 + best_sse):
            best_c, best_sse = c, sse
    return best_c


def critical_frequency(field, axis, channel=None):
    """Critical DFT bin k* of a field along "space" or "time".

    Magnitudes of the one-sided DFT along the axis are averaged over the
    orthogonal axis (and over channels unless one is named), then the
    cumulative sum over bins 0..N/2 is handed to the changepoint fit.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    vals = field.values if channel is None else field.values[channel][np.newaxis]
    fft_axis = 2 if axis == "space" else 1
    n = vals.shape[fft_axis]
    if n < 4:
        raise ValueError(f"need at least 4 samples along {axis}, got {n}")
    mags = np.abs(np.fft.rfft(vals, axis=fft_axis))
    other = tuple(a for a in range(3) if a != fft_axis)
    profile = mags.mean(axis=other)
    return max(1, fit_changepoint(np.cumsum(profile)))


def alpha_from_frequency(n_samples, delta, tau, kstar, p):
    """Test-function half-width from the critical bin (see module docstring)."""
    if kstar < 1:
        raise ValueError("kstar must be >= 1")
    return math.sqrt(3.0 * p) * (n_samples - 1) * delta * tau / (2.0 * math.pi * kstar)


def _count(length, p, alpha):
    # number of knot-spacing strides covering `length` at h = 2*alpha/p,
    # with an epsilon guard so an exact integer ratio is not pushed up by roundoff
    return int(math.ceil(length * p / (2.0 * alpha) * (1.0 - 1e-12)))


@dataclass(frozen=True)
class TestFunctionPlan:
    """Where the weak-form test functions live and how many there are.

    j_x periodic translates tile the spatial period (knot spacing snapped to
    x_period/j_x so the wrap is seamless); in time the knot grid has
    t_intervals spans and only the j_t = t_intervals - p + 1 translates whose
    support stays inside [t0, t1] are kept, so every temporal test function
    vanishes at both ends.
    """

    p: int
    tau_x: float
    tau_t: float
    kstar_x: int
    kstar_t: int
    alpha_x: float
    alpha_t: float
    j_x: int
    j_t: int
    t_intervals: int
    x_start: float
    x_period: float
    t0: float
    t1: float

    @property
    def n_rows(self):
        return self.j_x * self.j_t

    def spatial_basis(self):
        return periodic_basis(self.x_start, self.x_period, self.j_x, self.p - 1)

    def temporal_basis(self):
        return interior_basis(self.t0, self.t1, self.t_intervals, self.p - 1)

    def as_dict(self):
        return {
            "p": self.p, "tau_x": self.tau_x, "tau_t": self.tau_t,
            "kstar_x": self.kstar_x, "kstar_t": self.kstar_t,
            "alpha_x": self.alpha_x, "alpha_t": self.alpha_t,
            "j_x": self.j_x, "j_t": self.j_t, "rows": self.n_rows,
        }


def plan_test_functions(field, p=7, tau_x=3.5, tau_t=0.6):
    """Size and place the separable test functions for one field.

    alpha per axis follows the critical-frequency formula, clamped to half the
    axis length so a single support never exceeds the domain.
    """
    if p < 2:
        raise ValueError("test-function order p must be >= 2")
    kx = critical_frequency(field, "space")
    kt = critical_frequency(field, "time")

    length_x = field.period if field.periodic else (field.x1 - field.x0)
    length_t = field.t1 - field.t0
    alpha_x = min(alpha_from_frequency(field.nx, field.dx, tau_x, kx, p), 0.5 * length_x)
    alpha_t = min(alpha_from_frequency(field.nt, field.dt, tau_t, kt, p), 0.5 * length_t)

    j_x = _count(length_x, p, alpha_x)
    t_intervals = _count(length_t, p, alpha_t)
    j_t = t_intervals - p + 1
    return TestFunctionPlan(
        p=p, tau_x=tau_x, tau_t=tau_t, kstar_x=kx, kstar_t=kt,
        alpha_x=alpha_x, alpha_t=alpha_t, j_x=j_x, j_t=j_t,
        t_intervals=t_intervals, x_start=field.x0, x_period=length_x,
        t0=field.t0, t1=field.t1)
