"""Gridded space-time fields: container, noise model, and the text file format.

A field holds n_channels scalar functions sampled on a shared uniform grid,
values[c, n, i] = U_c(t_n, x_i) with x_i = x0 + i*dx and t_n = t0 + n*dt.
When `periodic` is set the spatial domain is half-open: x1 is the last sample
and the period is (x1 - x0) + dx (no duplicated endpoint column is stored).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field as dataclass_field

import numpy as np

GRID_MAGIC = "wgident-grid"
GRID_VERSION = 1


@dataclass(frozen=True, eq=False)
class GridField:
    x0: float
    x1: float
    t0: float
    t1: float
    values: np.ndarray  # shape (n_channels, nt, nx), float64
    periodic: bool = True

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if vals.ndim == 2:
            vals = vals[np.newaxis]
        if vals.ndim != 3:
            raise ValueError(f"values must have shape (n_channels, nt, nx), got {vals.shape}")
        object.__setattr__(self, "values", vals)
        if vals.shape[1] < 2 or vals.shape[2] < 2:
            raise ValueError(f"grid needs at least 2 samples per axis, got nt={vals.shape[1]} nx={vals.shape[2]}")
        if not (self.x1 > self.x0 and self.t1 > self.t0):
            raise ValueError("domain endpoints must satisfy x1 > x0 and t1 > t0")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")

    @property
    def n_channels(self):
        return self.values.shape[0]

    @property
    def nt(self):
        return self.values.shape[1]

    @property
    def nx(self):
        return self.values.shape[2]

    @property
    def dx(self):
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def dt(self):
        return (self.t1 - self.t0) / (self.nt - 1)

    @property
    def period(self):
        """Spatial period under the half-open convention (only meaningful if periodic)."""
        return (self.x1 - self.x0) + self.dx

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def t(self):
        return self.t0 + self.dt * np.arange(self.nt)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise scaled relative to the field."""

    nsr: float
    seed: int
    sigma_mode: str = "paper"  # "paper": nsr * mean squared deviation; "rms": nsr * root of it

    def __post_init__(self):
        if not 0.0 <= self.nsr <= 1.0:
            raise ValueError(f"nsr must lie in [0, 1], got {self.nsr}")
        if self.sigma_mode not in ("paper", "rms"):
            raise ValueError(f"sigma_mode must be 'paper' or 'rms', got {self.sigma_mode!r}")


def noise_sigma(field, channel, nsr, sigma_mode="paper"):
    """Noise standard deviation for one channel.

    "paper" mode is the published formula taken verbatim:
        sigma = nsr / (nt*nx) * sum |U - (Umax + Umin)/2|^2
    i.e. nsr times the mean *squared* deviation from the midrange (note: no
    square root, so sigma carries units of U^2).  "rms" applies the square
    root, giving sigma = nsr times the root-mean-square deviation.
    """
    u = field.values[channel]
    mid = 0.5 * (u.max() + u.min())
    msd = float(np.mean(np.abs(u - mid) ** 2))
    if sigma_mode == "paper":
        return nsr * msd
    if sigma_mode == "rms":
        return nsr * float(np.sqrt(msd))
    raise ValueError(f"sigma_mode must be 'paper' or 'rms', got {sigma_mode!r}")


def add_noise(field, noise):
    """Return a copy of `field` with i.i.d. Gaussian noise added per channel.

    Deterministic for a fixed NoiseSpec; nsr = 0 returns the input field
    unchanged (bit-exact, no RNG draw).
    """
    if not isinstance(noise, NoiseSpec):
        raise TypeError("add_noise expects a NoiseSpec")
    if noise.nsr == 0.0:
        return field
    rng = np.random.default_rng(noise.seed)
    out = field.values.copy()
    for c in range(field.n_channels):
        sigma = noise_sigma(field, c, noise.nsr, noise.sigma_mode)
        out[c] += rng.normal(0.0, sigma, size=out[c].shape)
    return GridField(x0=field.x0, x1=field.x1, t0=field.t0, t1=field.t1,
                     values=out, periodic=field.periodic)


class GridFormatError(ValueError):
    """Malformed grid file; the message names the offending line."""


def write_grid(path, field):
    """Write a field in the plain-text grid format (17 significant digits)."""
    buf = io.StringIO()
    buf.write(f"{GRID_MAGIC} {GRID_VERSION}\n")
    buf.write(f"fields {field.n_channels}\n")
    buf.write(f"nx {field.nx} nt {field.nt}\n")
    buf.write("x0 {:.17g} x1 {:.17g} t0 {:.17g} t1 {:.17g}\n".format(
        field.x0, field.x1, field.t0, field.t1))
    buf.write(f"periodic {1 if field.periodic else 0}\n")
    for c in range(field.n_channels):
        for n in range(field.nt):
            buf.write(" ".join(format(v, ".17g") for v in field.values[c, n]))
            buf.write("\n")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(buf.getvalue())


def _header_error(lineno, line, expected):
    return GridFormatError(f"line {lineno}: expected {expected}, got {line.strip()!r}")


def read_grid(path):
    """Parse a grid file written by write_grid; raises GridFormatError with a line number."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def header(lineno):
        if lineno > len(lines):
            raise GridFormatError(f"line {lineno}: unexpected end of file")
        return lines[lineno - 1]

    tok = header(1).split()
    if tok != [GRID_MAGIC, str(GRID_VERSION)]:
        raise _header_error(1, header(1), f"'{GRID_MAGIC} {GRID_VERSION}'")

    tok = header(2).split()
    if len(tok) != 2 or tok[0] != "fields":
        raise _header_error(2, header(2), "'fields <n>'")
    try:
        n_channels = int(tok[1])
    except ValueError:
        raise _header_error(2, header(2), "'fields <n>'") from None
    if n_channels < 1:
        raise GridFormatError(f"line 2: fields must be >= 1, got {n_channels}")

    tok = header(3).split()
    if len(tok) != 4 or tok[0] != "nx" or tok[2] != "nt":
        raise _header_error(3, header(3), "'nx <nx> nt <nt>'")
    try:
        nx, nt = int(tok[1]), int(tok[3])
    except ValueError:
        raise _header_error(3, header(3), "'nx <nx> nt <nt>'") from None

    tok = header(4).split()
    if len(tok) != 8 or tok[0::2] != ["x0", "x1", "t0", "t1"]:
        raise _header_error(4, header(4), "'x0 <f> x1 <f> t0 <f> t1 <f>'")
    try:
        x0, x1, t0, t1 = (float(v) for v in tok[1::2])
    except ValueError:
        raise _header_error(4, header(4), "'x0 <f> x1 <f> t0 <f> t1 <f>'") from None

    tok = header(5).split()
    if len(tok) != 2 or tok[0] != "periodic" or tok[1] not in ("0", "1"):
        raise _header_error(5, header(5), "'periodic <0|1>'")
    periodic = tok[1] == "1"

    need = n_channels * nt * nx
    values = np.empty(need)
    got = 0
    for lineno in range(6, len(lines) + 1):
        for word in lines[lineno - 1].split():
            if got >= need:
                raise GridFormatError(f"line {lineno}: {need} values expected but more found")
            try:
                values[got] = float(word)
            except ValueError:
                raise GridFormatError(f"line {lineno}: bad float {word!r}") from None
            got += 1
    if got != need:
        raise GridFormatError(
            f"line {len(lines)}: expected {need} values ({n_channels}x{nt}x{nx}), got {got}")

    try:
        return GridField(x0=x0, x1=x1, t0=t0, t1=t1,
                         values=values.reshape(n_channels, nt, nx), periodic=periodic)
    except ValueError as exc:
        raise GridFormatError(f"line 1: {exc}") from None
