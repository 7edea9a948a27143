import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfretract.dfcore import (
    MeanField,
    constants,
    constants_from_parameters,
    d_gamma_d_bound_check,
    energy,
    energy_gradient,
    energy_shifted,
    feasibility_row,
    half_weighted_trace_norm,
    hardy_checks,
    interaction_potential,
    main_estimate_terms,
    mean_field,
    op_norm,
    sublevel_bound,
    t_map,
    trace_norm,
    x_norm,
    y_norm,
)
from dfretract.dfcore.density import random_density, random_hermitian
from dfretract.exceptions import EigensolverFailure, KappaTooLarge, PreconditionViolated, ZeroEigenvalue
from dfretract.groundstate import aufbau_direction
from dfretract.model import build_synthetic

ALPHA = 1 / 137


# ---- norms -----------------------------------------------------------------


def test_norms_on_eigenvector_of_abs_D(small_model):
    m = small_model
    w, U = np.linalg.eigh(m.abs_D)
    phi = U[:, 2]
    g = np.outer(phi, phi.conj())
    assert x_norm(m, g) == pytest.approx(w[2], rel=1e-12)
    assert y_norm(m, g) == pytest.approx(math.sqrt(w[2]), rel=1e-12)
    z = np.zeros_like(g)
    assert x_norm(m, z) == 0 and y_norm(m, z) == 0


def test_y_norm_is_largest_singular_value(small_model, rng):
    m = small_model
    Q = rng.standard_normal((m.dim, m.dim))
    assert y_norm(m, Q) == pytest.approx(np.linalg.svd(m.weight_half @ Q, compute_uv=False)[0], rel=1e-12)


def test_trace_norm_matches_singular_values(rng):
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    assert trace_norm(A) == pytest.approx(np.linalg.svd(A, compute_uv=False).sum(), rel=1e-12)
    H = A + A.conj().T
    assert trace_norm(H) == pytest.approx(np.abs(np.linalg.eigvalsh(H)).sum(), rel=1e-12)


def test_x_norm_dominates_half_weighted_norm(mid_model, rng):
    g = random_density(mid_model, rng)
    assert half_weighted_trace_norm(mid_model, g) <= x_norm(mid_model, g) * (1 + 1e-12)


# ---- mean field ------------------------------------------------------------


def test_mean_field_at_zero(small_model):
    m = small_model
    mf = mean_field(m, np.zeros((m.dim, m.dim)))
    np.testing.assert_allclose(mf.H, m.D + m.V, atol=1e-14)
    w, U = np.linalg.eigh(m.D + m.V)
    P = U[:, w > 0] @ U[:, w > 0].conj().T
    np.testing.assert_allclose(mf.pplus, P, atol=1e-12)
    np.testing.assert_allclose(mf.pplus + mf.pminus, np.eye(m.dim), atol=1e-12)


def test_mean_field_spectral_data(mid_model, rng):
    g = random_density(mid_model, rng)
    mf = mean_field(mid_model, g)
    U = mf.evecs
    np.testing.assert_allclose(U.conj().T @ U, np.eye(mid_model.dim), atol=1e-12)
    np.testing.assert_allclose((U * mf.evals) @ U.conj().T, mf.H, atol=1e-12)
    assert np.all(np.diff(mf.evals) >= 0)
    P = mf.pplus
    np.testing.assert_allclose(P @ P, P, atol=1e-12)


def test_mean_field_is_reproducible_on_degenerate_spectrum():
    H = np.diag([-1.0, -1.0, 1.0, 1.0, 2.0])
    a, b = MeanField.from_operator(H), MeanField.from_operator(H.copy())
    np.testing.assert_array_equal(a.evecs, b.evecs)


def test_zero_eigenvalue_rejected():
    with pytest.raises(ZeroEigenvalue):
        MeanField.from_operator(np.diag([-1.0, 1e-14, 1.0]))


def test_non_finite_operator_rejected():
    with pytest.raises(EigensolverFailure):
        MeanField.from_operator(np.diag([np.nan, 1.0]))


def test_interaction_potential_at_zero(small_model):
    assert not np.any(interaction_potential(small_model, np.zeros((8, 8))))


# ---- energy ----------------------------------------------------------------


def test_energy_at_zero(small_model):
    z = np.zeros((8, 8))
    assert energy(small_model, z) == 0 and energy_shifted(small_model, z) == 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_rank_one_states_have_no_self_interaction(seed):
    m = build_synthetic(seed % 13, dim=8)
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    g = np.outer(psi, psi.conj())
    assert energy(m, g) == pytest.approx(np.vdot(psi, (m.D + m.V) @ psi).real, abs=1e-13)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_energy_gradient_matches_central_difference(seed):
    m = build_synthetic(seed % 11, dim=8)
    rng = np.random.default_rng(seed)
    g = random_density(m, rng)
    h = random_hermitian(m, rng)
    t = 1e-5
    fd = (energy(m, g + t * h) - energy(m, g - t * h)) / (2 * t)
    exact = np.trace(energy_gradient(m, g) @ h).real
    assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-300)


def test_occupied_levels_below_one_lower_shifted_energy(small_model):
    g = aufbau_direction(small_model)
    assert energy_shifted(small_model, g) < 0


def test_t_map_fixes_admissible_states(small_model):
    m = small_model
    assert not np.any(t_map(m, np.zeros((8, 8))))
    from dfretract.retraction import theta

    st_ = theta(m, random_density(m, np.random.default_rng(0)))
    np.testing.assert_allclose(t_map(m, st_.gamma), st_.gamma, atol=1e-10)


def test_t_map_checks_density(small_model):
    with pytest.raises(PreconditionViolated):
        t_map(small_model, 2 * np.eye(8))


# ---- constants -------------------------------------------------------------


def test_constants_at_z22():
    c = constants_from_parameters(ALPHA, 22, 22)
    assert c.kappa == pytest.approx(88 / 137, rel=1e-12)
    assert c.lambda0 == pytest.approx(1 - 22 / 137, rel=1e-12)
    assert c.lhs == pytest.approx(math.pi * ALPHA * 22, rel=1e-12)
    assert c.rhs == pytest.approx(0.5273, abs=5e-4)
    assert c.lhs == pytest.approx(0.5045, abs=1e-4)
    assert c.feasible


def test_constants_at_z23_infeasible():
    r = feasibility_row(ALPHA, 23, 23)
    assert r.lhs == pytest.approx(0.5274, abs=1e-4)
    assert r.rhs == pytest.approx(0.4636, abs=1e-4)
    assert not r.feasible


def test_derived_constants_relations():
    c = constants_from_parameters(ALPHA, 10, 5, r=0.5, R_fraction=0.6)
    assert c.kappa_r == pytest.approx(c.kappa + 2 * ALPHA * 0.5)
    assert c.lambda_r == pytest.approx(c.lambda0 - ALPHA * 0.5)
    assert c.a_r == pytest.approx(math.pi * ALPHA / 4 / math.sqrt((1 - c.kappa_r) * c.lambda_r))
    assert c.k == pytest.approx(0.6)
    assert c.A == pytest.approx(max((2 + c.a_r * 5.5) / 2, 1 / (1 - c.k)))


def test_feasibility_row_never_raises_for_large_kappa():
    r = feasibility_row(ALPHA, 80, 80)
    assert not r.feasible and math.isnan(r.rhs)
    with pytest.raises(KappaTooLarge):
        constants_from_parameters(ALPHA, 80, 80)


@pytest.mark.parametrize("Z", range(2, 64))
def test_two_electron_feasibility_range(Z):
    assert feasibility_row(ALPHA, Z, 2).feasible


def test_two_electron_feasibility_fails_at_64():
    assert not feasibility_row(ALPHA, 64, 2).feasible


def test_tiny_charge_feasible():
    assert feasibility_row(ALPHA, 1, 1e-4).feasible


def test_matrix_exact_kappa_is_smaller_than_hardy_bound(neon_like):
    exact = constants(neon_like, kappa_mode="matrix_exact")
    bound = constants(neon_like, kappa_mode="hardy_bound")
    assert exact.kappa <= bound.kappa


def test_sublevel_bound_values():
    m = build_synthetic(0, dim=8, potential_scale=0.05, q=1.0)
    c = constants(m, kappa_mode="hardy_bound")
    assert sublevel_bound(m, "hardy_bound") == pytest.approx(1 / c.margin)
    big = constants_from_parameters(ALPHA, 22, 22)
    assert 22 / big.margin == pytest.approx(95.0, abs=0.1)


# ---- estimates -------------------------------------------------------------


def test_d_gamma_d_bound_for_aufbau_states(mid_model):
    g = aufbau_direction(mid_model)
    chk = d_gamma_d_bound_check(mid_model, g, nu=2.0, gamma_ref=np.zeros((32, 32)))
    assert chk.ok and chk.lhs <= chk.rhs
    assert d_gamma_d_bound_check(mid_model, np.zeros((32, 32)), nu=1.0).lhs == 0


def test_d_gamma_d_bound_requires_window(mid_model, rng):
    g = random_density(mid_model, rng)
    with pytest.raises(PreconditionViolated):
        d_gamma_d_bound_check(mid_model, g, nu=0.5, gamma_ref=np.zeros((32, 32)))


def test_main_estimate_holds_on_samples(mid_model, rng):
    c = constants(mid_model)
    for _ in range(10):
        t = main_estimate_terms(mid_model, random_density(mid_model, rng), c)
        assert t["lhs"] <= t["rhs"] * (1 + 1e-9)


def test_hardy_checks_pass_on_synthetic(mid_model):
    rep = hardy_checks(mid_model, samples=20, seed=3)
    assert rep.passed
    assert {r.name for r in rep.rows if r.asserted} == {"field_upper", "field_lower", "projector_weight", "spectral_gap"}
    d = rep.to_dict()
    assert d["passed"] and len(d["rows"]) == len(rep.rows)


def test_hardy_checks_include_kato_herbst_for_radial(neon_like):
    rep = hardy_checks(neon_like, samples=5, seed=0)
    row = rep.row("kato_herbst")
    assert row.asserted and row.passed
    assert rep.passed


def test_mean_field_gap_at_least_lambda_r(mid_model, rng):
    c = constants(mid_model)
    for _ in range(20):
        mf = mean_field(mid_model, random_density(mid_model, rng))
        assert mf.gap >= c.lambda_r
    assert op_norm(mf.H) > 0
