"""Pseudo-spectral reference solvers: closed forms, convergence, stability."""

import numpy as np
import pytest

import weakpde as wp
from conftest import advdiff_spec, burgers_spec


def test_pure_diffusion_matches_heat_kernel():
    c = 0.2
    spec = wp.PdeSpec(kind="advection-diffusion",
                      initial=lambda x: np.sin(2 * np.pi * x),
                      coefficients={"a": 0.0, "c": c},
                      nx=64, nt=11, x0=0.0, length=1.0, t0=0.0, t1=0.05)
    field = wp.simulate(spec)
    x, t = field.x, field.t
    exact = (np.exp(-c * (2 * np.pi) ** 2 * t)[:, np.newaxis]
             * np.sin(2 * np.pi * x)[np.newaxis, :])
    err = np.abs(field.values[0] - exact)
    assert np.max(err) <= 1e-6 * np.max(np.abs(exact))


def test_zero_initial_condition_stays_zero():
    spec = wp.PdeSpec(kind="viscous-burgers",
                      initial=lambda x: np.zeros_like(x),
                      coefficients={"a": 1.0, "c": 0.1},
                      nx=32, nt=9, length=2.0, t1=0.1)
    field = wp.simulate(spec)
    assert np.all(field.values == 0.0)


def final_frame(spec_fn, substeps):
    return wp.simulate(spec_fn(substeps=substeps)).values[0, -1]


def test_advection_diffusion_self_convergence():
    spec_fn = lambda substeps: advdiff_spec(nx=128, nt=17, t1=0.01,
                                            substeps=substeps)
    u1 = final_frame(spec_fn, 1)
    u2 = final_frame(spec_fn, 2)
    u4 = final_frame(spec_fn, 4)
    assert np.all(np.isfinite(u1))
    e12 = np.max(np.abs(u1 - u2))
    e24 = np.max(np.abs(u2 - u4))
    assert e24 > 0
    assert e12 / e24 >= 2.0


def test_burgers_fourth_order_in_time():
    # successive halvings of the step shrink the change by ~2^4
    spec_fn = lambda substeps: burgers_spec(nx=64, nt=9, t1=0.02,
                                            substeps=substeps)
    u1 = final_frame(spec_fn, 1)
    u2 = final_frame(spec_fn, 2)
    u4 = final_frame(spec_fn, 4)
    u8 = final_frame(spec_fn, 8)
    e12 = np.max(np.abs(u1 - u2))
    e24 = np.max(np.abs(u2 - u4))
    e48 = np.max(np.abs(u4 - u8))
    assert e48 > 1e-13  # stay above the rounding floor
    assert e12 / e24 >= 8.0
    assert e24 / e48 >= 8.0


def test_kdv_integrating_factor_smoke():
    spec = wp.PdeSpec(kind="kdv",
                      initial=lambda x: np.cos(np.pi * x),
                      coefficients={"a": 1.0, "b": 5e-4},
                      nx=128, nt=9, length=2.0, t1=0.01)
    field = wp.simulate(spec)
    assert np.all(np.isfinite(field.values))
    assert np.max(np.abs(field.values)) < 10.0


def test_inviscid_burgers_mean_stays_put():
    def u0(x):
        return (1.2 * np.sin(2 * np.pi * x) + 0.7 * np.sin(6 * np.pi * x)
                + 0.35 * np.sin(12 * np.pi * x))

    spec = wp.PdeSpec(kind="inviscid-burgers", initial=u0,
                      coefficients={"a": lambda x: np.exp(np.sin(np.pi * x))},
                      nx=400, nt=26, length=2.0, t1=0.05)
    field = wp.simulate(spec)
    means = field.values[0].mean(axis=1)
    amplitude = np.max(np.abs(field.values[0, 0]))
    assert np.max(np.abs(means - means[0])) < 1e-3 * amplitude


def test_backward_diffusion_blows_up():
    spec = wp.PdeSpec(kind="advection-diffusion",
                      initial=lambda x: np.sin(2 * np.pi * x),
                      coefficients={"a": 0.0, "c": -0.5},
                      nx=128, nt=33, length=2.0, t1=0.2)
    with pytest.raises(wp.SimulationError, match="blew up"):
        wp.simulate(spec)


def test_spec_validation():
    ic = lambda x: np.sin(np.pi * x)
    with pytest.raises(ValueError, match="unknown PDE kind"):
        wp.PdeSpec(kind="wave", initial=ic, coefficients={"a": 1.0})
    with pytest.raises(ValueError, match="coefficient"):
        wp.PdeSpec(kind="kdv", initial=ic, coefficients={"a": 1.0})
    with pytest.raises(ValueError, match="callable"):
        wp.PdeSpec(kind="advection-diffusion", initial=3.0,
                   coefficients={"a": 1.0, "c": 0.1})
    with pytest.raises(ValueError, match="nx"):
        wp.PdeSpec(kind="advection-diffusion", initial=ic,
                   coefficients={"a": 1.0, "c": 0.1}, nx=4)
    with pytest.raises(ValueError, match="substeps"):
        wp.PdeSpec(kind="advection-diffusion", initial=ic,
                   coefficients={"a": 1.0, "c": 0.1}, substeps=-1)


def test_varying_coefficients_accepted_for_nonlinear_kinds():
    spec = burgers_spec(nx=64, nt=9, t1=0.01)
    field = wp.simulate(spec)
    assert np.all(np.isfinite(field.values))
    assert field.nx == 64 and field.nt == 9
    assert field.period == pytest.approx(2.0)
