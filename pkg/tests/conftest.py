"""Shared fixtures: benchmark fields are simulated once per session.

The three fields cover the regimes the suite cares about: a linear PDE with a
strongly varying advection coefficient, a nonlinear Burgers flow with enough
spectral content for the test-function sizing to bite, and a smoother Burgers
flow used by the model-selection tests.
"""

import numpy as np
import pytest

import weakpde as wp


# --- benchmark problem definitions -----------------------------------------

def advdiff_spec(nx=256, nt=200, t1=0.05, substeps=0):
    """u_t = a(x) u_x + c u_xx with a(x) = 3(sin(2*pi*x) + 3), c = 0.2."""
    return wp.PdeSpec(
        kind="advection-diffusion",
        initial=lambda x: np.sin(4 * np.pi * x) ** 2 * np.cos(2 * np.pi * x)
        + np.sin(6 * np.pi * x),
        coefficients={"a": lambda x: 3.0 * (np.sin(2 * np.pi * x) + 3.0), "c": 0.2},
        nx=nx, nt=nt, x0=0.0, length=2.0, t0=0.0, t1=t1, substeps=substeps,
    )


# In divergence form u_t = a(x) u_x + c u_xx reads off as coefficients on the
# groups u_x and u_xx directly.
ADVDIFF_TRUTH = {
    "u_x": lambda x: 3.0 * (np.sin(2 * np.pi * x) + 3.0),
    "u_xx": 0.2,
}


def burgers_spec(nx=256, nt=200, t1=0.2, a=None, substeps=0):
    """u_t = a(x) u u_x + c u_xx with a(x) = 0.8(sin(2*pi*x) + 1), c = 0.1.

    The initial condition mixes three spatial harmonics so the critical
    spatial frequency sits well above the coefficient variation.
    """
    if a is None:
        a = lambda x: 0.8 * (np.sin(2 * np.pi * x) + 1.0)
    return wp.PdeSpec(
        kind="viscous-burgers",
        initial=lambda x: 2.0 * (np.sin(4 * np.pi * x)
                                 + 0.8 * np.cos(6 * np.pi * x + 0.5)
                                 + 0.6 * np.sin(8 * np.pi * x)),
        coefficients={"a": a, "c": 0.1},
        nx=nx, nt=nt, x0=0.0, length=2.0, t0=0.0, t1=t1, substeps=substeps,
    )


# u u_x = (u^2/2)_x, so the group u^2_x carries a(x)/2.
BURGERS_TRUTH = {
    "u^2_x": lambda x: 0.4 * (np.sin(2 * np.pi * x) + 1.0),
    "u_xx": 0.1,
}


def burgers_smooth_spec(nx=256, nt=200, t1=0.15):
    """Same Burgers coefficients driven by a smoother two-mode pulse."""
    return wp.PdeSpec(
        kind="viscous-burgers",
        initial=lambda x: 2.5 * (np.sin(2 * np.pi * x)
                                 + 2.5 * np.cos(2 * np.pi * x + 0.25)),
        coefficients={"a": lambda x: 0.8 * (np.sin(2 * np.pi * x) + 1.0), "c": 0.1},
        nx=nx, nt=nt, x0=0.0, length=2.0, t0=0.0, t1=t1,
    )


# --- pipeline helpers -------------------------------------------------------

def run_identify(field, preset="poly3-deriv4", m=7, d=6, p=7, tau_x=3.5,
                 tau_t=0.6, trim_tau=0.1, lookahead=3, rho=0.01, trim=True):
    """Default identification pipeline; returns (system, report)."""
    dictionary = wp.dictionary_preset(preset)
    basis = wp.periodic_basis(field.x0, field.period, m, d)
    plan = wp.plan_test_functions(field, p=p, tau_x=tau_x, tau_t=tau_t)
    system = wp.assemble(field, dictionary, basis, plan)
    report = wp.select_model(system, field.x, trim_tau=trim_tau,
                             lookahead=lookahead, rho=rho, trim=trim)
    return system, report


def truth_indices(dictionary, truth):
    """Group indices of the truth labels, sorted."""
    return tuple(sorted(dictionary.index_of(label) for label in truth))


def manual_plan(field, p, j_x, t_intervals, tau_x=3.5, tau_t=0.6):
    """Hand-built test-function plan with the prescribed counts.

    Inverts j = ceil(length * p / (2 alpha)) so the spline tilings are exact;
    useful when a test wants control over the system size instead of the
    spectrum-driven sizing.
    """
    length_x = field.period
    length_t = field.t1 - field.t0
    return wp.TestFunctionPlan(
        p=p, tau_x=tau_x, tau_t=tau_t, kstar_x=1, kstar_t=1,
        alpha_x=length_x * p / (2.0 * j_x),
        alpha_t=length_t * p / (2.0 * t_intervals),
        j_x=j_x, j_t=t_intervals - p + 1, t_intervals=t_intervals,
        x_start=field.x0, x_period=length_x, t0=field.t0, t1=field.t1,
    )


def lstsq_solution(system, support):
    """Least-squares GroupSolution on a fixed support (pipeline-independent)."""
    m = system.m_per_group
    support = tuple(sorted(support))
    cols = np.concatenate([np.arange(k * m, (k + 1) * m) for k in support])
    coef, *_ = np.linalg.lstsq(system.F[:, cols], system.b, rcond=None)
    c = np.zeros(system.F.shape[1])
    c[cols] = coef
    return wp.GroupSolution(support=support, coefficients=c,
                            residual=float(np.linalg.norm(system.F @ c - system.b)),
                            sparsity=len(support), iterations=0,
                            converged=True, rank_deficient=False)


# --- session fixtures -------------------------------------------------------

@pytest.fixture(scope="session")
def advdiff_clean():
    return wp.simulate(advdiff_spec())


@pytest.fixture(scope="session")
def burgers_clean():
    return wp.simulate(burgers_spec())


@pytest.fixture(scope="session")
def burgers_smooth_clean():
    return wp.simulate(burgers_smooth_spec())


@pytest.fixture(scope="session")
def advdiff_grid_path(advdiff_clean, tmp_path_factory):
    path = tmp_path_factory.mktemp("grids") / "advdiff.grid"
    wp.write_grid(path, advdiff_clean)
    return path
