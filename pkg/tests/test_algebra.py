import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrans.algebra import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    FockConfig,
    LeakageError,
    annihilation_op,
    check_state,
    coherent_amplitudes,
    coherent_state_vector,
    commutator,
    embed3,
    excitation_indices,
    fidelity,
    interior_indices,
    jordan_schwinger,
    mode_operators,
    number_op,
    restrict,
)

cutoffs = st.integers(min_value=2, max_value=7)


class TestFockConfig:
    @pytest.mark.parametrize("n_a,n_b", [(1, 4), (4, 1), (0, 0), (2.5, 3)])
    def test_rejects_bad_cutoffs(self, n_a, n_b):
        with pytest.raises(ValueError):
            FockConfig(n_a, n_b)

    @pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
    def test_rejects_bad_leakage_tol(self, tol):
        with pytest.raises(ValueError):
            FockConfig(3, 3, tol)

    @given(cutoffs, cutoffs)
    def test_index_round_trip(self, n_a, n_b):
        cfg = FockConfig(n_a, n_b)
        seen = set()
        for q in range(2):
            for i in range(n_a):
                for j in range(n_b):
                    k = cfg.index(q, i, j)
                    assert cfg.labels(k) == (q, i, j)
                    assert k == q * n_a * n_b + i * n_b + j
                    seen.add(k)
        assert seen == set(range(cfg.dim))

    def test_out_of_range(self):
        cfg = FockConfig(3, 3)
        with pytest.raises(IndexError):
            cfg.index(2, 0, 0)
        with pytest.raises(IndexError):
            cfg.labels(cfg.dim)
        with pytest.raises(IndexError):
            cfg.mode_state(3, 0)


class TestLadder:
    def test_rejects_small_cutoff(self):
        with pytest.raises(ValueError):
            annihilation_op(1)

    def test_vacuum_annihilated(self):
        a = annihilation_op(4)
        np.testing.assert_array_equal(a @ np.eye(4)[0], np.zeros(4))

    def test_lowering_two(self):
        a = annihilation_op(4)
        np.testing.assert_allclose(a @ np.eye(4)[2], np.sqrt(2) * np.eye(4)[1], atol=0)

    def test_number_spectrum(self):
        a = annihilation_op(4)
        np.testing.assert_allclose(np.linalg.eigvalsh(a.conj().T @ a), [0, 1, 2, 3], atol=1e-15)
        np.testing.assert_allclose(a.conj().T @ a, number_op(4), atol=1e-14)

    @given(st.integers(min_value=2, max_value=30))
    def test_ccr_below_cutoff(self, n):
        a = annihilation_op(n)
        c = commutator(a, a.conj().T)
        np.testing.assert_allclose(c[: n - 1, : n - 1], np.eye(n - 1), atol=1e-13)
        assert abs(c[n - 1, n - 1] + (n - 1)) < 1e-13


class TestEmbedding:
    def test_sigma_z_on_ground(self):
        cfg = FockConfig(3, 4)
        psi = cfg.basis_state(0, 0, 0)
        np.testing.assert_array_equal(embed3(SIGMA_Z, None, None, cfg) @ psi, -psi)

    def test_identity(self):
        cfg = FockConfig(3, 4)
        np.testing.assert_array_equal(embed3(None, None, None, cfg), np.eye(24))

    def test_modes_commute(self):
        cfg = FockConfig(4, 3)
        a, b = mode_operators(cfg)
        assert np.max(np.abs(commutator(a, b))) == 0
        assert np.max(np.abs(commutator(a, b.conj().T))) == 0

    def test_dimension_mismatch(self):
        cfg = FockConfig(3, 4)
        with pytest.raises(ValueError):
            embed3(None, annihilation_op(4), None, cfg)

    def test_sigma_plus_raises_ground(self):
        cfg = FockConfig(2, 2)
        sp = embed3(SIGMA_PLUS, None, None, cfg)
        np.testing.assert_array_equal(sp @ cfg.basis_state(0, 1, 0), cfg.basis_state(1, 1, 0))
        np.testing.assert_array_equal(SIGMA_MINUS, SIGMA_PLUS.T)

    def test_pauli_algebra(self):
        np.testing.assert_allclose(commutator(SIGMA_Z, SIGMA_X), 2j * SIGMA_Y, atol=0)
        np.testing.assert_allclose(commutator(SIGMA_X, SIGMA_Y), 2j * SIGMA_Z, atol=0)
        np.testing.assert_allclose(SIGMA_PLUS @ SIGMA_MINUS - SIGMA_MINUS @ SIGMA_PLUS, SIGMA_Z, atol=0)


class TestJordanSchwinger:
    def test_jz_eigenvalue(self):
        cfg = FockConfig(4, 4)
        jx, jy, jz, n = jordan_schwinger(cfg)
        psi = cfg.mode_state(1, 0)
        np.testing.assert_allclose(jz @ psi, 0.5 * psi, atol=0)

    @given(cutoffs, cutoffs)
    def test_number_commutes(self, n_a, n_b):
        jx, jy, jz, n = jordan_schwinger(FockConfig(n_a, n_b))
        assert np.max(np.abs(commutator(n, jy))) < 1e-12
        assert np.max(np.abs(commutator(n, jz))) < 1e-12
        assert np.max(np.abs(commutator(n, jx))) < 1e-12

    @given(cutoffs, cutoffs)
    def test_so3_relations_on_bounded_subspace(self, n_a, n_b):
        cfg = FockConfig(n_a, n_b)
        jx, jy, jz, _ = jordan_schwinger(cfg)
        idx = excitation_indices(cfg, min(n_a, n_b) - 2)
        for lhs, rhs in (((jz, jx), jy), ((jx, jy), jz), ((jy, jz), jx)):
            c = restrict(commutator(*lhs), idx)
            assert np.max(np.abs(c - 1j * restrict(rhs, idx))) < 1e-12

    def test_casimir_on_complete_blocks(self):
        # J^2 = (N/2)(N/2 + 1) on complete excitation blocks
        cfg = FockConfig(5, 5)
        jx, jy, jz, n = jordan_schwinger(cfg)
        idx = excitation_indices(cfg, 4)
        j2 = restrict(jx @ jx + jy @ jy + jz @ jz, idx)
        nd = np.real(np.diag(restrict(n, idx)))
        np.testing.assert_allclose(j2, np.diag(nd / 2 * (nd / 2 + 1)), atol=1e-12)


class TestSubspaces:
    def test_interior_excludes_top_levels(self):
        cfg = FockConfig(3, 4)
        for k in interior_indices(cfg):
            _, i, j = cfg.labels(k)
            assert i < 2 and j < 3
        assert len(interior_indices(cfg)) == 2 * 2 * 3

    def test_excitation_indices(self):
        cfg = FockConfig(3, 3)
        idx = excitation_indices(cfg, 1, with_qubit=True)
        assert sorted(cfg.labels(k)[1:] for k in idx) == sorted([(0, 0), (0, 1), (1, 0)] * 2)


class TestCoherent:
    def test_vacuum(self):
        np.testing.assert_array_equal(coherent_state_vector(0, 5), np.eye(5)[0])

    def test_poisson_moments(self):
        psi = coherent_state_vector(1.0, 20)
        p = np.abs(psi) ** 2
        m = np.arange(20)
        mean = p @ m
        assert abs(mean - 1.0) < 1e-9
        assert abs(p @ m**2 - mean**2 - 1.0) < 1e-9

    def test_leakage_error(self):
        with pytest.raises(LeakageError):
            coherent_state_vector(3.0, 5)

    @given(st.floats(0, 1.6), st.floats(-np.pi, np.pi))
    def test_matches_displacement(self, r, phase):
        # oracle: D(z)|0> from the matrix exponential on a larger space
        from scipy.linalg import expm

        z = r * np.exp(1j * phase)
        big = 60
        a = annihilation_op(big)
        ref = expm(z * a.conj().T - np.conj(z) * a)[:, 0][:25]
        psi = coherent_state_vector(z, 25)
        assert fidelity(psi, ref / np.linalg.norm(ref)) > 1 - 1e-12
        c, lost = coherent_amplitudes(z, 25)
        np.testing.assert_allclose(c, ref, atol=1e-12)
        assert lost < 1e-6


class TestUtilities:
    def test_commutator_self(self, rng):
        H = rng.normal(size=(5, 5))
        assert np.max(np.abs(commutator(H, H))) == 0

    def test_commutator_shape_mismatch(self):
        with pytest.raises(ValueError):
            commutator(np.eye(2), np.eye(3))

    def test_check_state(self):
        with pytest.raises(ValueError):
            check_state(np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            check_state(np.array([1.0, 0.0]), dim=3)
        check_state(np.array([1.0, 0.0]), dim=2)
