"""Pseudo-spectral reference solvers for the benchmark PDE families.

Periodic in space (FFT derivatives), classical RK4 in time on the
integrating-factor transform: the stiff constant-coefficient part L of the
right-hand side (diffusion, or the mean dispersion in the KdV case) is
absorbed into exp(L t) so the explicit stage only sees the advective terms.
Products are de-aliased with the 2/3 rule.  The step size inside each output
frame is chosen from an RK4 stability estimate on the advective spectral
radius and can be overridden for convergence studies.

Supported right-hand sides (all coefficients may vary in x):

    advection-diffusion   u_t = a(x) u_x + c u_xx
    viscous-burgers       u_t = a(x) u u_x + c u_xx
    kdv                   u_t = a(x) u u_x + b(x) u_xxx
    inviscid-burgers      u_t = a(x) u u_x   (with spectral smoothing filter)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridField

_REQUIRED = {
    "advection-diffusion": ("a", "c"),
    "viscous-burgers": ("a", "c"),
    "kdv": ("a", "b"),
    "inviscid-burgers": ("a",),
}

_SAFETY = 0.5
_RK4_IMAG_LIMIT = 2.8          # stability interval of RK4 on the imaginary axis
_BLOWUP_FACTOR = 1e6


class SimulationError(RuntimeError):
    """Raised when the integration leaves the stable regime."""


@dataclass(frozen=True, eq=False)
class PdeSpec:
    """One simulation request: equation kind, coefficients, IC, and grid.

    Coefficient values may be plain numbers or callables of x; the initial
    condition is a callable of x.  The spatial domain is the half-open
    periodic interval [x0, x0 + length) sampled at nx points; nt frames are
    written at uniform times in [t0, t1].  `substeps`, when set, forces that
    many RK4 steps per output frame instead of the automatic estimate.
    """

    kind: str
    initial: object
    coefficients: dict
    nx: int = 256
    nt: int = 200
    x0: float = 0.0
    length: float = 2.0
    t0: float = 0.0
    t1: float = 0.05
    substeps: int = 0

    def __post_init__(self):
        if self.kind not in _REQUIRED:
            raise ValueError(f"unknown PDE kind {self.kind!r}; "
                             f"choose from {sorted(_REQUIRED)}")
        missing = [n for n in _REQUIRED[self.kind] if n not in self.coefficients]
        if missing:
            raise ValueError(f"{self.kind} needs coefficient(s) {missing}")
        if not callable(self.initial):
            raise ValueError("initial condition must be callable")
        if self.nx < 8 or self.nt < 2:
            raise ValueError("grid too small (need nx >= 8, nt >= 2)")
        if self.length <= 0 or self.t1 <= self.t0:
            raise ValueError("domain extents must be positive")
        if self.substeps < 0:
            raise ValueError("substeps must be nonnegative")

    def coefficient(self, name, x):
        value = self.coefficients[name]
        if callable(value):
            return np.broadcast_to(np.asarray(value(x), dtype=float), x.shape).copy()
        return np.full_like(x, float(value))


def _spectral_mask(n_modes, nx):
    """2/3-rule de-aliasing mask for rfft coefficients."""
    mask = np.ones(n_modes)
    mask[np.arange(n_modes) > nx // 3] = 0.0
    return mask


def simulate(spec):
    """Integrate the PDE and return the clean GridField (single channel)."""
    nx, nt = spec.nx, spec.nt
    dx = spec.length / nx
    x = spec.x0 + dx * np.arange(nx)
    k = 2.0 * np.pi * np.fft.rfftfreq(nx, d=dx)
    kmax = np.pi / dx
    mask = _spectral_mask(k.size, nx)

    u0 = np.broadcast_to(np.asarray(spec.initial(x), dtype=float), x.shape)
    if not np.all(np.isfinite(u0)):
        raise SimulationError("initial condition is not finite")

    a = spec.coefficient("a", x)
    lam = np.zeros(k.size, dtype=complex)
    b_dev = None
    if spec.kind in ("advection-diffusion", "viscous-burgers"):
        c = float(spec.coefficients["c"])
        lam = -c * k ** 2 + 0j
    elif spec.kind == "kdv":
        b = spec.coefficient("b", x)
        b_mean = float(b.mean())
        lam = b_mean * (1j * k) ** 3
        b_dev = b - b_mean
    smoother = None
    if spec.kind == "inviscid-burgers":
        smoother = np.exp(-36.0 * (k / kmax) ** 36)

    def nonlinear(uh):
        u = np.fft.irfft(uh, nx)
        ux = np.fft.irfft(1j * k * uh, nx)
        if spec.kind == "advection-diffusion":
            term = a * ux
        else:
            term = a * u * ux
            if b_dev is not None:
                term = term + b_dev * np.fft.irfft((1j * k) ** 3 * uh, nx)
        return mask * np.fft.rfft(term)

    def stable_substeps(u, dt_out):
        if spec.substeps:
            return spec.substeps
        if spec.kind == "advection-diffusion":
            speed = np.abs(a).max()
        else:
            speed = np.abs(a * u).max()
        rate = speed * kmax
        if b_dev is not None:
            rate += np.abs(b_dev).max() * kmax ** 3
        if rate == 0.0:
            return 1
        return max(1, math.ceil(dt_out * rate / (_SAFETY * _RK4_IMAG_LIMIT)))

    dt_out = (spec.t1 - spec.t0) / (nt - 1)
    blowup = _BLOWUP_FACTOR * max(1.0, np.abs(u0).max())

    out = np.empty((nt, nx))
    out[0] = u0
    uh = mask * np.fft.rfft(u0)
    exp_cache = {}
    for frame in range(1, nt):
        n_sub = stable_substeps(np.fft.irfft(uh, nx), dt_out)
        h = dt_out / n_sub
        if n_sub not in exp_cache:
            half = np.exp(lam * (h / 2.0))
            exp_cache[n_sub] = (half, half * half)
        e_half, e_full = exp_cache[n_sub]
        for _ in range(n_sub):
            k1 = nonlinear(uh)
            k2 = nonlinear(e_half * (uh + (h / 2.0) * k1))
            k3 = nonlinear(e_half * uh + (h / 2.0) * k2)
            k4 = nonlinear(e_full * uh + h * e_half * k3)
            uh = e_full * uh + (h / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
            if smoother is not None:
                uh = smoother * uh
        u = np.fft.irfft(uh, nx)
        if not np.all(np.isfinite(u)) or np.abs(u).max() > blowup:
            t_fail = spec.t0 + frame * dt_out
            raise SimulationError(
                f"solution blew up near t = {t_fail:.6g}; reduce the time window "
                "or increase substeps")
        out[frame] = u

    return GridField(x0=spec.x0, x1=spec.x0 + (nx - 1) * dx,
                     t0=spec.t0, t1=spec.t1, values=out[np.newaxis],
                     periodic=True)
