"""Uniform B-spline bases (periodic and interior variants) with derivatives.

Everything here is built from the cardinal B-spline of degree d on the integer
knots 0, 1, ..., d+1, evaluated by the de Boor triangle.  A basis function of a
uniform basis with knot spacing h is just the cardinal spline in the scaled
coordinate t = (x - z_m) / h, so no general knot vector machinery is needed.

Conventions:
  * degree d, order p = d + 1; each basis function is supported on p knot
    intervals, i.e. an interval of width p*h.
  * supports are half-open: the degree-0 spline is 1 on [z_m, z_{m+1}) and the
    value at the right end of any support is 0.
  * the "periodic" variant wraps the evaluation coordinate modulo the number of
    basis functions, so `count` translates tile a period of length count*h.
  * the "interior" variant keeps only translates whose support lies inside
    [start, stop]; for degree >= 1 these vanish at both endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


def _cardinal(t, degree):
    # de Boor triangle on the integer knots 0..degree+1
    t = np.asarray(t, dtype=float)
    cols = [np.where((t >= j) & (t < j + 1), 1.0, 0.0) for j in range(degree + 1)]
    for k in range(1, degree + 1):
        for j in range(degree + 1 - k):
            cols[j] = ((t - j) / k) * cols[j] + ((j + k + 1 - t) / k) * cols[j + 1]
    return cols[0]


def cardinal_bspline(t, degree, deriv=0):
    """Evaluate the degree-`degree` cardinal B-spline (or a derivative) at t.

    The spline lives on the knots 0..degree+1.  Derivatives use the standard
    difference recursion B_d^(nu)(t) = sum_i (-1)^i C(nu,i) B_{d-nu}(t - i);
    asking for deriv > degree is an error (the result would be a distribution,
    not a function).
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if deriv < 0:
        raise ValueError("deriv must be >= 0")
    if deriv > degree:
        raise ValueError(f"derivative order {deriv} exceeds degree {degree}")
    if deriv == 0:
        return _cardinal(t, degree)
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for i in range(deriv + 1):
        out += ((-1) ** i) * comb(deriv, i) * _cardinal(t - i, degree - deriv)
    return out


@dataclass(frozen=True)
class SplineBasis:
    """A family of translated uniform B-splines.

    Attributes:
        degree:   polynomial degree d (order p = d + 1)
        start:    first knot z_0
        h:        knot spacing
        count:    number of basis functions exported
        periodic: wrap evaluation modulo the period (count * h) if True
    """

    degree: int
    start: float
    h: float
    count: int
    periodic: bool

    @property
    def order(self):
        return self.degree + 1

    @property
    def period(self):
        return self.count * self.h

    def knot(self, j):
        return self.start + j * self.h

    def support(self, m):
        """Unwrapped support [z_m, z_m + p*h] of basis function m."""
        lo = self.knot(m)
        return lo, lo + self.order * self.h

    def eval(self, m, x, deriv=0):
        """Values of basis function m (or its deriv-th derivative) at x."""
        if not 0 <= m < self.count:
            raise IndexError(f"basis index {m} out of range [0, {self.count})")
        t = (np.asarray(x, dtype=float) - self.start) / self.h - m
        if self.periodic:
            t = np.mod(t, self.count)
        return cardinal_bspline(t, self.degree, deriv) / self.h**deriv

    def eval_all(self, x, deriv=0):
        """Matrix of shape (count, len(x)) with one basis function per row."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((self.count, x.size))
        for m in range(self.count):
            out[m] = self.eval(m, x, deriv)
        return out


def periodic_basis(start, period, count, degree):
    """`count` B-splines of the given degree tiling a periodic domain.

    Knot spacing is period/count; requires count >= degree + 1 so a support
    never wraps onto itself.  The translates form a partition of unity.
    """
    if count < degree + 1:
        raise ValueError(f"periodic basis needs count >= degree + 1 (got {count} < {degree + 1})")
    if period <= 0:
        raise ValueError("period must be positive")
    return SplineBasis(degree=degree, start=float(start), h=float(period) / count,
                       count=count, periodic=True)


def interior_basis(start, stop, intervals, degree):
    """All degree-`degree` splines on `intervals` uniform knot spans inside [start, stop].

    Only translates whose support is contained in [start, stop] are kept
    (count = intervals - degree), so for degree >= 1 every exported function
    vanishes at both endpoints.
    """
    if stop <= start:
        raise ValueError("need stop > start")
    if intervals < degree + 1:
        raise ValueError(
            f"interior basis needs intervals >= degree + 1 (got {intervals} < {degree + 1})")
    h = (float(stop) - float(start)) / intervals
    return SplineBasis(degree=degree, start=float(start), h=h,
                       count=intervals - degree, periodic=False)


def gauss_points(basis, m, nodes_per_interval=16):
    """Gauss-Legendre nodes/weights covering the (unwrapped) support of basis m."""
    gnodes, gweights = np.polynomial.legendre.leggauss(nodes_per_interval)
    lo, _ = basis.support(m)
    xs, ws = [], []
    for j in range(basis.order):
        a = lo + j * basis.h
        b = a + basis.h
        xs.append(0.5 * (b - a) * gnodes + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * gweights)
    return np.concatenate(xs), np.concatenate(ws)


def moments(basis, m=0, nodes_per_interval=16):
    """Numerically integrated (mu0, mu1, mu2) of the h-normalized basis function.

    The function integrated is B_m(x)/h on its unwrapped support, so mu0 tests
    that the raw spline integrates to h.  Integration is per-knot-interval
    Gauss-Legendre, exact for the piecewise-polynomial integrands involved.
    """
    x, w = gauss_points(basis, m, nodes_per_interval)
    lo, _ = basis.support(m)
    t = (x - basis.start) / basis.h - m  # unwrapped coordinate, even if periodic
    g = cardinal_bspline(t, basis.degree) / basis.h
    mu0 = float(np.sum(w * g))
    mu1 = float(np.sum(w * x * g))
    mu2 = float(np.sum(w * x * x * g))
    return mu0, mu1, mu2


def fourier_magnitude(p, h, omega):
    """|ghat(omega)| for the h-normalized order-p uniform B-spline.

    ghat(omega) = (sin(h*omega/2) / (h*omega/2))**p, equal to 1 at omega = 0.
    Matches exp(-p*h^2*omega^2/24) to second order in omega (the Gaussian with
    sigma = sqrt(p)*h/(2*sqrt(3))).
    """
    if p < 1:
        raise ValueError("order p must be >= 1")
    if h <= 0:
        raise ValueError("knot spacing h must be positive")
    omega = np.asarray(omega, dtype=float)
    # np.sinc(z) = sin(pi z)/(pi z), so sin(u)/u with u = h*omega/2:
    out = np.sinc(h * omega / (2.0 * np.pi)) ** p
    return out if out.ndim else float(out)
