import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfretract.dfcore import mean_field
from dfretract.dfcore.density import random_density
from dfretract.exceptions import (
    ChecksumMismatch,
    DimensionMismatch,
    DomainError,
    ModelFileError,
    SchemaMismatch,
    SubcriticalityViolated,
)
from dfretract.model import (
    ModelSpace,
    build_radial_hydrogenic,
    build_synthetic,
    contract_direct,
    contract_exchange,
    dirac_coulomb_ground_energy,
    load_model,
    repulsion_tensor,
    save_model,
)
from dfretract.model.io import MAGIC
from dfretract.model.radial import channel_quantum_numbers


def lowest_positive(m):
    w = np.linalg.eigvalsh(m.D + m.V)
    return w[w > 0].min()


# ---- ModelSpace ----------------------------------------------------------


def test_model_space_validates_shapes_and_hermiticity():
    D = np.diag([1.0, -1.0])
    with pytest.raises(DimensionMismatch):
        ModelSpace(D, np.zeros((3, 3)), np.zeros((0, 2, 2)))
    with pytest.raises(DomainError):
        ModelSpace(D, np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((0, 2, 2)))
    with pytest.raises(DomainError):
        ModelSpace(D, np.zeros((2, 2)), np.zeros((0, 2, 2)), q=0)


def test_model_space_is_read_only(small_model):
    with pytest.raises(ValueError):
        small_model.D[0, 0] = 5.0


def test_spectral_functions_of_D(small_model):
    m = small_model
    np.testing.assert_allclose(m.weight_half @ m.weight_half, m.abs_D, atol=1e-12)
    np.testing.assert_allclose(m.D @ m.D_inv, np.eye(m.dim), atol=1e-12)
    np.testing.assert_allclose(m.abs_D_power(1.0), m.abs_D, atol=1e-12)
    assert np.trace(m.free_projector).real == pytest.approx(m.dim / 2)


def test_with_q_keeps_matrices(small_model):
    m2 = small_model.with_q(0.5)
    assert m2.q == 0.5 and m2.D is not None
    np.testing.assert_array_equal(m2.V, small_model.V)


# ---- synthetic builder --------------------------------------------------


def test_synthetic_is_deterministic():
    a, b = build_synthetic(7, dim=16), build_synthetic(7, dim=16)
    np.testing.assert_array_equal(a.D, b.D)
    np.testing.assert_array_equal(a.V, b.V)
    np.testing.assert_array_equal(a.factors, b.factors)
    assert a.checksum == b.checksum


def test_synthetic_without_potential_has_free_projector():
    m = build_synthetic(1, dim=12, potential_scale=0.0)
    assert not np.any(m.V)
    mf = mean_field(m, np.zeros((12, 12)))
    np.testing.assert_allclose(mf.pplus, m.free_projector, atol=1e-12)
    assert np.trace(mf.pplus).real == pytest.approx(6)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), dim=st.sampled_from([4, 8, 16]))
def test_builder_outputs_respect_free_gap(seed, dim):
    m = build_synthetic(seed, dim=dim)
    assert np.abs(m.d_eigenvalues).min() >= 1 - 1e-9
    # interaction factors are positive semidefinite
    for L in m.factors:
        assert np.linalg.eigvalsh(L).min() >= -1e-12


# ---- radial builder ------------------------------------------------------


def test_channel_quantum_numbers():
    assert channel_quantum_numbers(-1) == (0, 1)
    assert channel_quantum_numbers(1) == (1, 2)
    assert channel_quantum_numbers(-2) == (1, 2)
    assert channel_quantum_numbers(2) == (2, 3)
    with pytest.raises(DomainError):
        channel_quantum_numbers(0)


def test_free_radial_model():
    m = build_radial_hydrogenic(0, channels=(-1, 1), n_per_channel=10)
    assert not np.any(m.V)
    assert m.rank > 0
    assert np.abs(m.d_eigenvalues).min() >= 1 - 1e-9


def test_radial_spectrum_gap_and_hermiticity(neon_like):
    m = neon_like
    assert np.abs(m.d_eigenvalues).min() >= 1 - 1e-9
    np.testing.assert_allclose(m.D, m.D.T, atol=1e-12)


def test_hydrogen_ground_level():
    m = build_radial_hydrogenic(1, channels=(-1,), n_per_channel=60, interaction=False)
    exact = dirac_coulomb_ground_energy(1)
    assert exact == pytest.approx(np.sqrt(1 - (1 / 137) ** 2), rel=1e-15)
    assert abs(lowest_positive(m) - exact) / exact < 1e-5


def test_supercritical_charge_rejected():
    with pytest.raises(SubcriticalityViolated):
        build_radial_hydrogenic(140)


def test_hydrogenic_self_repulsion_oracle():
    # exact 1s density: the direct and exchange self-energy both equal 5 alpha Z / 8 in these units
    m = build_radial_hydrogenic(1, channels=(-1,), n_per_channel=30)
    w, U = np.linalg.eigh(m.D + m.V)
    psi = U[:, np.flatnonzero(w > 0)[0]]
    g = np.outer(psi, psi.conj())
    tj = np.trace(contract_direct(m, g) @ g).real
    tk = np.trace(contract_exchange(m, g) @ g).real
    assert tj == pytest.approx(tk, rel=1e-12)
    alpha_z = m.alpha * m.Z
    # relativistic density differs from the Schroedinger one at order (alpha Z)^2
    assert tj == pytest.approx(5 * alpha_z / 8, rel=1e-3)


# ---- interaction contractions --------------------------------------------


def test_contractions_vanish_at_zero(small_model):
    z = np.zeros((small_model.dim,) * 2)
    assert not np.any(contract_direct(small_model, z))
    assert not np.any(contract_exchange(small_model, z))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000))
def test_contractions_match_dense_tensor(seed):
    m = build_synthetic(seed % 17, dim=6, interaction_rank=3)
    rng = np.random.default_rng(seed)
    g = random_density(m, rng)
    T = repulsion_tensor(m)
    # (ij|kl) with J_ij = sum_kl (ij|kl) g_lk and K_il = sum_jk (ij|kl) g_jk
    J = np.einsum("ijkl,lk->ij", T, g)
    K = np.einsum("ijkl,jk->il", T, g)
    np.testing.assert_allclose(contract_direct(m, g), J, atol=1e-12)
    np.testing.assert_allclose(contract_exchange(m, g), K, atol=1e-12)


# ---- persistence ----------------------------------------------------------


@pytest.mark.parametrize("complex_", [True, False])
def test_save_load_roundtrip_bit_exact(tmp_path, complex_):
    m = build_synthetic(2, dim=8, complex_=complex_)
    p = tmp_path / "m.dfr"
    save_model(m, p)
    m2 = load_model(p)
    for a, b in ((m.D, m2.D), (m.V, m2.V), (m.factors, m2.factors)):
        assert a.dtype == b.dtype
        np.testing.assert_array_equal(a, b)
    assert (m2.alpha, m2.Z, m2.q) == (m.alpha, m.Z, m.q)
    assert m2.basis_meta == m.basis_meta
    assert m2.checksum == m.checksum


def test_radial_roundtrip(tmp_path, hydrogen):
    p = tmp_path / "h.dfr"
    save_model(hydrogen, p)
    assert load_model(p).checksum == hydrogen.checksum


def test_wrong_schema_version(tmp_path, small_model):
    p = tmp_path / "m.dfr"
    save_model(small_model, p)
    raw = p.read_bytes()
    p.write_bytes(raw.replace(b'"schema_version":1', b'"schema_version":9', 1))
    with pytest.raises(SchemaMismatch):
        load_model(p)


def test_truncated_file(tmp_path, small_model):
    p = tmp_path / "m.dfr"
    save_model(small_model, p)
    p.write_bytes(p.read_bytes()[:-40])
    with pytest.raises(ChecksumMismatch):
        load_model(p)


def test_corrupted_payload(tmp_path, small_model):
    p = tmp_path / "m.dfr"
    save_model(small_model, p)
    raw = bytearray(p.read_bytes())
    raw[-20] ^= 0xFF
    p.write_bytes(bytes(raw))
    with pytest.raises(ChecksumMismatch):
        load_model(p)


def test_not_a_model_file(tmp_path):
    p = tmp_path / "x"
    p.write_bytes(b"hello world, not a model")
    with pytest.raises(ModelFileError):
        load_model(p)
    assert MAGIC == b"DFRMODEL"
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "missing")
