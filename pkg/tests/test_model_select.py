"""Trimming, residual-reduction selection, and coefficient reconstruction."""

import numpy as np
import pytest

import weakpde as wp
from conftest import lstsq_solution, run_identify, truth_indices, BURGERS_TRUTH


def toy_system(rng, k=5, m=3, s=40):
    """Synthetic grouped system wrapped in the WeakSystem container."""
    groups = tuple(wp.FeatureGroup((1,), a) for a in range(k))
    dictionary = wp.Dictionary(1, groups)
    basis = wp.periodic_basis(0.0, 1.0, m, min(m - 1, 2))
    F = rng.standard_normal((s, k * m))
    c = np.zeros(k * m)
    c[0 * m:1 * m] = rng.standard_normal(m) + 1.0
    c[2 * m:3 * m] = rng.standard_normal(m) + 1.0
    b = F @ c + 1e-3 * rng.standard_normal(s)
    return wp.WeakSystem(F=F, b=b, dictionary=dictionary, coeff_basis=basis,
                         plan=None, channel=0)


# --- gf_trim -------------------------------------------------------------------

def test_single_group_scores_one():
    system = toy_system(np.random.default_rng(0))
    sol = lstsq_solution(system, (2,))
    report = wp.gf_trim(system, sol, tau=0.1)
    assert report.scores == {2: 1.0}
    assert report.removed == ()
    assert report.refit.support == (2,)


def test_trim_rescues_truth_from_inflated_candidate(burgers_clean):
    system, _ = run_identify(burgers_clean)
    truth = truth_indices(system.dictionary, BURGERS_TRUTH)
    junk = tuple(system.dictionary.index_of(l) for l in ("1", "u", "u^3_xx", "u_xxxx"))
    candidate = lstsq_solution(system, truth + junk)
    report = wp.gf_trim(system, candidate, tau=0.1)
    assert tuple(sorted(report.refit.support)) == truth
    assert set(report.removed) == set(junk)
    assert max(report.scores.values()) == 1.0


def test_tau_zero_never_trims():
    system = toy_system(np.random.default_rng(1))
    sol = lstsq_solution(system, (0, 1, 2, 3))
    report = wp.gf_trim(system, sol, tau=0.0)
    assert report.removed == ()
    assert report.refit is sol


def test_all_zero_candidate_forces_one_survivor():
    system = toy_system(np.random.default_rng(2))
    zero = wp.GroupSolution(support=(1, 3), coefficients=np.zeros(system.F.shape[1]),
                            residual=float(np.linalg.norm(system.b)), sparsity=2,
                            iterations=0, converged=True, rank_deficient=False)
    report = wp.gf_trim(system, zero, tau=0.5)
    assert report.forced_keep
    assert len(report.refit.support) == 1


def test_trim_refit_beats_plain_zeroing():
    rng = np.random.default_rng(4)
    system = toy_system(rng)
    sol = lstsq_solution(system, (0, 1, 2, 4))
    report = wp.gf_trim(system, sol, tau=0.35)
    assert report.removed  # threshold high enough to drop the noise groups
    zeroed = sol.coefficients.copy()
    m = system.m_per_group
    for k in report.removed:
        zeroed[k * m:(k + 1) * m] = 0.0
    assert report.refit.residual <= system.residual_norm(zeroed) + 1e-12


def test_trim_threshold_validation():
    system = toy_system(np.random.default_rng(5))
    sol = lstsq_solution(system, (0,))
    with pytest.raises(ValueError):
        wp.gf_trim(system, sol, tau=1.0)
    with pytest.raises(ValueError):
        wp.gf_trim(system, sol, tau=-0.1)


# --- rr_select -------------------------------------------------------------------

def test_rr_reference_sequence():
    theta, s, fallback = wp.rr_select([1.0, 0.5, 0.49], 1, 0.05)
    assert theta == 2
    assert s == pytest.approx([0.5, 0.01])
    assert not fallback


def test_rr_flat_residuals_pick_sparsest():
    theta, s, fallback = wp.rr_select(np.ones(6), 3, 0.01)
    assert theta == 1
    assert np.all(s == 0.0)
    assert not fallback


def test_rr_perfect_fit_short_circuits():
    theta, s, fallback = wp.rr_select([0.0, 0.0, 0.0, 0.0], 2, 0.01)
    assert theta == 1 and not fallback
    assert np.all(s == 0.0)


def test_rr_fallback_to_argmin():
    theta, s, fallback = wp.rr_select([1.0, 0.5, 0.25, 0.125], 1, 1e-4)
    assert fallback
    assert theta == 4
    assert s == pytest.approx([0.5, 0.25, 0.125])


def test_rr_scale_invariance():
    rng = np.random.default_rng(6)
    q = np.abs(rng.standard_normal(10)) + 0.01
    a = wp.rr_select(q, 3, 0.05)
    b = wp.rr_select(5.7 * q, 3, 0.05)
    assert a[0] == b[0] and a[2] == b[2]
    assert a[1] == pytest.approx(b[1])


def test_rr_validation():
    with pytest.raises(ValueError):
        wp.rr_select([1.0, 0.5], 2, 0.01)
    with pytest.raises(ValueError):
        wp.rr_select([1.0, -0.5, 0.2], 1, 0.01)


# --- reconstruction ----------------------------------------------------------------

def test_unit_coefficients_reconstruct_one():
    basis = wp.periodic_basis(0.0, 2.0, 7, 6)
    sol = wp.GroupSolution(support=(0,), coefficients=np.ones(7), residual=0.0,
                           sparsity=1, iterations=0, converged=True,
                           rank_deficient=False)
    x = np.linspace(0.0, 2.0, 257, endpoint=False)
    curves = wp.reconstruct_coefficients(sol, basis, x)
    assert np.max(np.abs(curves[0] - 1.0)) < 1e-12


def test_single_basis_coefficient_reconstructs_that_spline():
    basis = wp.periodic_basis(0.0, 2.0, 7, 6)
    c = np.zeros(7)
    c[3] = 2.0
    sol = wp.GroupSolution(support=(0,), coefficients=c, residual=0.0,
                           sparsity=1, iterations=0, converged=True,
                           rank_deficient=False)
    x = np.linspace(0.0, 2.0, 128, endpoint=False)
    curves = wp.reconstruct_coefficients(sol, basis, x)
    assert curves[0] == pytest.approx(2.0 * basis.eval_all(x)[3], abs=1e-14)


def oracle_projection(func, basis, n=1 << 14):
    """Trapezoid-rule Gram projection, independent of the library routine."""
    period = basis.period
    x = basis.start + period * np.arange(n) / n
    w = period / n
    phi = basis.eval_all(x)
    gram = (phi * w) @ phi.T
    rhs = (phi * w) @ func(x)
    return np.linalg.solve(gram, rhs), x, phi


def test_projection_matches_oracle_and_bounds_reconstruction():
    a_true = lambda x: 3.0 * (np.sin(2 * np.pi * x) + 3.0)
    basis = wp.periodic_basis(0.0, 2.0, 7, 6)
    coef = wp.project_onto_basis(a_true, basis)
    coef_oracle, x, phi = oracle_projection(a_true, basis)
    assert coef == pytest.approx(coef_oracle, rel=1e-8)
    sol = wp.GroupSolution(support=(0,), coefficients=coef, residual=0.0,
                           sparsity=1, iterations=0, converged=True,
                           rank_deficient=False)
    recon = wp.reconstruct_coefficients(sol, basis, x)[0]
    err_recon = np.linalg.norm(recon - a_true(x))
    err_proj = np.linalg.norm(coef_oracle @ phi - a_true(x))
    assert err_recon <= err_proj * (1.0 + 1e-6)


# --- select_model end to end ---------------------------------------------------------

def test_select_model_identifies_advection_diffusion(advdiff_clean):
    system, report = run_identify(advdiff_clean)
    labels = [system.labels[k] for k in report.support]
    assert sorted(labels) == ["u_x", "u_xx"]
    assert report.theta_star == 2
    assert not report.fallback
    assert len(report.q) == 16
    assert len(report.s) == 16 - report.lookahead
    k_ux = system.dictionary.index_of("u_x")
    k_uxx = system.dictionary.index_of("u_xx")
    x = advdiff_clean.x
    a_true = 3.0 * (np.sin(2 * np.pi * x) + 3.0)
    assert np.max(np.abs(report.curves[k_ux] - a_true)) < 0.05 * np.max(np.abs(a_true))
    assert np.max(np.abs(report.curves[k_uxx] - 0.2)) < 0.05 * 0.2
