"""Feature dictionaries and weak-form assembly of the regression system.

The model class is u_t = sum_k c_k(x) * d^{a_k}/dx^{a_k} f_k(u) with each
coefficient expanded in M periodic B-splines, c_k(x) = sum_m c_{k,m} psi_m(x).
Testing against separable compactly supported functions phi_r(x,t) =
B_rx(x) * B_rt(t) and integrating by parts moves every derivative off the data:

    b_r = -<d/dt phi_r, u>,
    F[r, (k,m)] = (-1)^{a_k} <d^{a_k}/dx^{a_k} (B_rx * psi_m), f_k(u)>.

No derivative of the data is ever taken: f_k(u) is evaluated pointwise and all
x-derivatives land on spline products expanded by the Leibniz rule with
analytic spline derivatives.  Quadrature is the rectangle rule in x (periodic)
and the trapezoid rule in t.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


def channel_names(n_channels):
    if n_channels == 1:
        return ("u",)
    if n_channels == 2:
        return ("v", "w")
    return tuple(f"u{i + 1}" for i in range(n_channels))


@dataclass(frozen=True)
class FeatureGroup:
    """One dictionary group: a monomial of the channels under an x-derivative.

    exponents[c] is the power of channel c; deriv_order is the number of
    spatial derivatives applied to the monomial in the model (they are moved
    onto the test functions during assembly).
    """

    exponents: tuple
    deriv_order: int

    @property
    def is_constant(self):
        return all(e == 0 for e in self.exponents)

    def label(self):
        names = channel_names(len(self.exponents))
        parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, self.exponents) if e > 0]
        base = "".join(parts) if parts else "1"
        return base + ("_" + "x" * self.deriv_order if self.deriv_order else "")

    def evaluate(self, values):
        """Pointwise f_k(u) on the grid; values has shape (n_channels, nt, nx)."""
        out = np.ones_like(values[0])
        for c, e in enumerate(self.exponents):
            if e:
                out = out * values[c] ** e
        return out


@dataclass(frozen=True)
class Dictionary:
    n_channels: int
    groups: tuple  # tuple of FeatureGroup

    def __post_init__(self):
        if len(set(self.groups)) != len(self.groups):
            raise ValueError("dictionary contains duplicate feature groups")
        if not self.groups:
            raise ValueError("dictionary must contain at least one feature group")
        for g in self.groups:
            if len(g.exponents) != self.n_channels:
                raise ValueError("feature group channel count mismatch")
            if g.is_constant and g.deriv_order > 0:
                raise ValueError("derivative of the constant feature is identically zero")

    def __len__(self):
        return len(self.groups)

    @property
    def labels(self):
        return tuple(g.label() for g in self.groups)

    @property
    def max_deriv(self):
        return max(g.deriv_order for g in self.groups)

    def index_of(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no feature group labeled {label!r}") from None


def _scalar_poly(max_power, max_deriv):
    groups = [FeatureGroup((0,), 0)]
    for q in range(1, max_power + 1):
        for a in range(max_deriv + 1):
            groups.append(FeatureGroup((q,), a))
    return Dictionary(1, tuple(groups))


# Monomial order for the two-channel cubic preset; the derivative-free count is
# 1 + 9 and each non-constant monomial carries derivative orders 0..4 (46 total).
_COMPLEX_MONOMIALS = (
    (1, 0), (2, 0), (3, 0),           # v, v^2, v^3
    (0, 1), (0, 2), (0, 3),           # w, w^2, w^3
    (1, 1), (2, 1), (1, 2),           # vw, v^2 w, v w^2
)

# "poly6-deriv6" carries 43 groups: the constant plus 6 powers x 7 derivative
# orders.  (Published tables of this dictionary sometimes quote 42 by leaving
# the constant out of the count; the constant group is kept here, consistent
# with the smaller presets.)
_PRESETS = {
    "poly2-deriv2": lambda: _scalar_poly(2, 2),
    "poly3-deriv4": lambda: _scalar_poly(3, 4),
    "poly6-deriv6": lambda: _scalar_poly(6, 6),
}


def dictionary_preset(name, n_channels=1):
    """Build one of the named feature dictionaries."""
    if name == "poly3-deriv4-complex":
        if n_channels != 2:
            raise ValueError("poly3-deriv4-complex needs a two-channel field")
        groups = [FeatureGroup((0, 0), 0)]
        for mono in _COMPLEX_MONOMIALS:
            for a in range(5):
                groups.append(FeatureGroup(mono, a))
        return Dictionary(2, tuple(groups))
    try:
        dictionary = _PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown dictionary preset {name!r}; "
                         f"choose from {sorted(_PRESETS) + ['poly3-deriv4-complex']}") from None
    if n_channels != 1:
        raise ValueError(f"preset {name!r} is single-channel")
    return dictionary


@dataclass(frozen=True, eq=False)
class WeakSystem:
    """Assembled regression system F c = b for one evolution channel."""

    F: np.ndarray          # (S, K*M)
    b: np.ndarray          # (S,)
    dictionary: Dictionary
    coeff_basis: object    # SplineBasis of the varying coefficients
    plan: object           # TestFunctionPlan that produced the rows
    channel: int

    @property
    def m_per_group(self):
        return self.coeff_basis.count

    @property
    def n_groups(self):
        return len(self.dictionary)

    @property
    def labels(self):
        return self.dictionary.labels

    def group_slice(self, k):
        m = self.m_per_group
        return slice(k * m, (k + 1) * m)

    def group_columns(self, k):
        return self.F[:, self.group_slice(k)]

    def residual_norm(self, c):
        return float(np.linalg.norm(self.F @ c - self.b))


def _trapezoid_weights(n, dt):
    w = np.full(n, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def assemble(field, dictionary, coeff_basis, plan, channel=0):
    """Build the weak system for one evolution channel of a periodic field.

    coeff_basis is the periodic spline basis for the varying coefficients; the
    test functions come from the plan.  Requires S = j_x*j_t >= K*M so the
    least-squares subproblems are overdetermined.
    """
    if not field.periodic:
        raise ValueError("weak assembly needs a spatially periodic field")
    if dictionary.n_channels != field.n_channels:
        raise ValueError(f"dictionary expects {dictionary.n_channels} channels, "
                         f"field has {field.n_channels}")
    if not 0 <= channel < field.n_channels:
        raise IndexError(f"channel {channel} out of range")
    if not coeff_basis.periodic or abs(coeff_basis.period - field.period) > 1e-9 * field.period:
        raise ValueError("coefficient basis must be periodic with the field's period")
    max_d = dictionary.max_deriv
    test_degree = plan.p - 1
    if max_d > test_degree:
        raise ValueError(f"dictionary derivative order {max_d} exceeds test spline degree {test_degree}")
    if max_d > coeff_basis.degree:
        raise ValueError(f"dictionary derivative order {max_d} exceeds coefficient spline degree "
                         f"{coeff_basis.degree}")
    n_cols = len(dictionary) * coeff_basis.count
    if plan.n_rows < n_cols:
        raise ValueError(f"only {plan.n_rows} test functions for {n_cols} unknowns; "
                         "the system must be overdetermined")

    test_x = plan.spatial_basis()
    test_t = plan.temporal_basis()
    x = field.x
    t = field.t

    # spline tables: one (rows, nx) block per derivative order
    bx = [test_x.eval_all(x, deriv=j) for j in range(max_d + 1)]
    psi = [coeff_basis.eval_all(x, deriv=j) for j in range(max_d + 1)]

    wt = _trapezoid_weights(field.nt, field.dt)
    tt = test_t.eval_all(t) * wt               # (j_t, nt), quadrature folded in
    tt_dot = test_t.eval_all(t, deriv=1) * wt

    u = field.values[channel]
    m_count = coeff_basis.count
    f_mat = np.empty((plan.n_rows, n_cols))
    for k, group in enumerate(dictionary.groups):
        a = group.deriv_order
        fk = group.evaluate(field.values)      # (nt, nx)
        w_k = tt @ fk                          # (j_t, nx) time contraction
        # Leibniz expansion of d^a/dx^a (B_rx * psi_m) on the grid
        p_k = np.zeros((plan.j_x, m_count, field.nx))
        for j in range(a + 1):
            p_k += comb(a, j) * bx[j][:, np.newaxis, :] * psi[a - j][np.newaxis, :, :]
        block = np.einsum("rmi,ti->rtm", p_k, w_k) * ((-1) ** a * field.dx)
        f_mat[:, k * m_count:(k + 1) * m_count] = block.reshape(plan.n_rows, m_count)

    b = -field.dx * np.einsum("ri,ti->rt", bx[0], tt_dot @ u).reshape(plan.n_rows)
    return WeakSystem(F=f_mat, b=b, dictionary=dictionary,
                      coeff_basis=coeff_basis, plan=plan, channel=channel)
