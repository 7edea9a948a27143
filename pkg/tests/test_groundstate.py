import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfretract.dfcore import mean_field
from dfretract.dfcore.density import random_density
from dfretract.exceptions import DomainError, NotAdmissible, PreconditionViolated
from dfretract.groundstate import (
    SolveConfig,
    aufbau_direction,
    aufbau_occupations,
    binding_curve,
    eigen_count_window,
    energy_noise_floor,
    euler_lagrange_residual,
    optimality_gap,
    solve_ground_state,
)
from dfretract.model import build_radial_hydrogenic, build_synthetic
from dfretract.retraction import theta


# ---- aufbau ----------------------------------------------------------------


def test_aufbau_integer_filling():
    occ = aufbau_occupations(np.array([-1.5, 0.4, 0.7, 0.9, 1.2]), 2)
    np.testing.assert_array_equal(occ, [0, 1, 1, 0, 0])


def test_aufbau_fractional_last_level():
    np.testing.assert_allclose(aufbau_occupations(np.array([0.4, 0.7]), 1.5), [1, 0.5])


def test_aufbau_splits_degenerate_cluster():
    occ = aufbau_occupations(np.array([0.5, 0.8, 0.8, 0.8]), 2)
    np.testing.assert_allclose(occ, [1, 1 / 3, 1 / 3, 1 / 3])


def test_aufbau_without_bound_levels():
    assert not np.any(aufbau_occupations(np.array([-2.0, 1.0, 1.5]), 3))
    m = build_synthetic(0, dim=8, potential_scale=0.0)
    assert not np.any(aufbau_direction(m))


@settings(max_examples=50, deadline=None)
@given(
    evals=st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=12),
    q=st.floats(0, 6, allow_nan=False),
)
def test_aufbau_occupation_properties(evals, q):
    evals = np.sort(np.array(evals))
    occ = aufbau_occupations(evals, q)
    assert np.all((occ >= 0) & (occ <= 1))
    assert occ.sum() <= q + 1e-12
    inside = (evals > 0) & (evals < 1)
    assert not np.any(occ[~inside])
    assert occ.sum() == pytest.approx(min(q, inside.sum()), abs=1e-12)


def test_gap_positive_at_zero(small_model):
    assert optimality_gap(small_model, np.zeros((8, 8))) > 0


def test_gap_requires_admissible_state(small_model):
    mf = mean_field(small_model, np.zeros((8, 8)))
    with pytest.raises(NotAdmissible):
        optimality_gap(small_model, mf.pminus / 8)


# ---- solver ----------------------------------------------------------------


@pytest.fixture(scope="module")
def hydrogen_solution(hydrogen):
    return solve_ground_state(hydrogen)


def test_hydrogen_ground_state(hydrogen, hydrogen_solution):
    rep = hydrogen_solution
    assert rep.converged
    assert rep.energy_q < -1e-12
    assert rep.trace_gamma == pytest.approx(1.0, abs=1e-8)
    exact = math.sqrt(1 - (hydrogen.alpha * hydrogen.Z) ** 2)
    # one electron has no self-repulsion, so the energy is that of the lowest level
    assert rep.energy_q == pytest.approx(exact - 1, rel=1e-6)
    assert optimality_gap(hydrogen, rep.gamma_star) <= 1e-10


def test_solution_is_self_consistent_aufbau(hydrogen, hydrogen_solution):
    g = hydrogen_solution.gamma_star
    np.testing.assert_allclose(aufbau_direction(hydrogen, g), g, atol=1e-8)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_synthetic_solutions_satisfy_stationarity(seed):
    m = build_synthetic(seed, dim=16, q=2.0, n_bound=4)
    rep = solve_ground_state(m)
    el = euler_lagrange_residual(m, rep.gamma_star)
    assert rep.converged
    assert el.commutator_norm <= 1e-8 * rep.mean_field_norm
    assert el.structure_deviation <= 1e-8
    assert rep.trace_gamma == pytest.approx(2.0, abs=1e-8)
    assert rep.mu < 1 - 1e-8
    e = np.array(rep.energy_history)
    assert np.all(np.diff(e) <= energy_noise_floor(e.min(), m.q))


def test_energy_strictly_decreases_before_polishing(neon_like):
    rep = solve_ground_state(neon_like)
    e = np.array(rep.energy_history)
    gaps = np.array(rep.gap_history)
    descent = gaps[: len(e) - 1] > SolveConfig().tol_gap
    assert np.all(np.diff(e)[descent] < 0)
    assert rep.converged and rep.energy_q < 0


def test_zero_seed_start_reaches_same_energy(hydrogen, hydrogen_solution):
    rep = solve_ground_state(hydrogen, SolveConfig(start="zero_seed"))
    assert rep.energy_q == pytest.approx(hydrogen_solution.energy_q, rel=1e-9)


def test_explicit_start(small_model, rng):
    rep = solve_ground_state(small_model, SolveConfig(start=random_density(small_model, rng)))
    assert rep.converged


def test_budget_exhaustion_is_reported(neon_like):
    rep = solve_ground_state(neon_like, SolveConfig(max_outer=1))
    assert not rep.converged
    assert any("budget" in w for w in rep.warnings)


def test_infeasible_model_needs_force():
    m = build_radial_hydrogenic(30, n_per_channel=10, q=30)
    with pytest.raises(PreconditionViolated):
        solve_ground_state(m)
    rep = solve_ground_state(m, SolveConfig(force=True))
    assert any("feasibility" in w for w in rep.warnings)


def test_q_above_z_is_flagged():
    m = build_synthetic(0, dim=8, potential_scale=0.005, q=2.0)
    assert m.q > m.Z
    rep = solve_ground_state(m)
    assert any("q > Z" in w for w in rep.warnings)


def test_config_validation():
    for kw in ({"tol_gap": 0}, {"tol_comm": 0}, {"tol_structure": 0}, {"max_outer": 0}, {"ls_shrink": 1.0}, {"start": "x"}):
        with pytest.raises(DomainError):
            SolveConfig(**kw)


def test_report_serializes(hydrogen_solution):
    d = hydrogen_solution.to_dict()
    json.dumps(d)
    assert d["converged"] and "gamma_star" in d
    assert "gamma_star" not in hydrogen_solution.to_dict(include_gamma=False)


# ---- Euler-Lagrange residual ---------------------------------------------------


def test_el_residual_at_zero(small_model):
    el = euler_lagrange_residual(small_model, np.zeros((8, 8)))
    assert el.commutator_norm == 0 and el.structure_deviation == 0


def test_non_self_consistent_aufbau_has_commutator(mid_model):
    g = theta(mid_model, aufbau_direction(mid_model)).gamma
    assert euler_lagrange_residual(mid_model, g).commutator_norm > 1e-8


# ---- binding curve and eigenvalue count --------------------------------------


def test_binding_curve_validation(small_model):
    assert binding_curve(small_model, []) == []
    with pytest.raises(DomainError):
        binding_curve(small_model, [1.0, 0.5])
    (q, e), = binding_curve(small_model, [0.5])
    assert q == 0.5 and e < 0


def test_binding_curve_decreasing(mid_model):
    curve = binding_curve(mid_model, [0.5, 1.0, 1.5, 2.0])
    es = [e for _, e in curve]
    assert all(b < a for a, b in zip(es, es[1:]))


def test_eigen_count_free_model():
    m = build_synthetic(0, dim=8, potential_scale=0.0)
    assert eigen_count_window(m, np.zeros((8, 8)), 0.1) == (0, 0)


def test_eigen_count_hydrogen_small_window(hydrogen):
    low, mid = eigen_count_window(hydrogen, np.zeros((hydrogen.dim,) * 2), 1e-5)
    assert low >= 1 and mid >= low
    with pytest.raises(DomainError):
        eigen_count_window(hydrogen, np.zeros((hydrogen.dim,) * 2), 1.5)


def test_noise_floor_scales():
    assert energy_noise_floor(0.0, 1.0) < energy_noise_floor(0.0, 100.0)
