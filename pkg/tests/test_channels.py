"""Kraus maps, derived superoperator/Choi views, and the channel zoo."""

import numpy as np
import pytest

from qmchain import (
    KrausMap,
    PreconditionError,
    amplitude_damping,
    bit_flip,
    choi_matrix,
    classify,
    depolarizing,
    direct_sum,
    identity,
    identity_channel,
    is_completely_positive,
    iterate,
    matrix_unit,
    phase_damping,
    random_cptni,
    random_cptp,
    random_density,
    random_unitary_channel,
    superoperator_matrix,
    unitary_channel,
    vectorize,
)
from qmchain.operators import PAULI_X, PAULI_Z


def test_apply_identity_channel(rng):
    ch = identity_channel(2)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    np.testing.assert_allclose(ch.apply(x), x)


def test_bit_flip_kills_sigma_z():
    # sigma_x sigma_z sigma_x = -sigma_z cancels the direct term at p = 1/2
    ch = bit_flip(0.5)
    np.testing.assert_allclose(ch.apply(PAULI_Z), np.zeros((2, 2)), atol=1e-15)


def test_full_amplitude_damping_decays_excited_state():
    ch = amplitude_damping(1.0)
    np.testing.assert_allclose(
        ch.apply(matrix_unit(2, 1, 1)), matrix_unit(2, 0, 0), atol=1e-15
    )


def test_adjoint_apply_identity_on_tp_map():
    ch = amplitude_damping(0.7)
    np.testing.assert_allclose(ch.adjoint_apply(identity(2)), identity(2), atol=1e-15)


def test_adjoint_pairing(rng):
    ch = random_cptp(3, 4, seed=11)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    lhs = np.trace(ch.adjoint_apply(y).conj().T @ x)
    rhs = np.trace(y.conj().T @ ch.apply(x))
    assert lhs == pytest.approx(rhs, abs=1e-12)


class TestSuperoperator:
    def test_identity(self):
        np.testing.assert_allclose(superoperator_matrix(identity_channel(2)), np.eye(4))

    def test_diagonal_unitary(self):
        ch = unitary_channel(np.diag([1, 1j]))
        np.testing.assert_allclose(
            superoperator_matrix(ch), np.diag([1, 1j, -1j, 1]), atol=1e-15
        )

    def test_matches_direct_application(self, rng):
        ch = random_cptp(3, 3, seed=4)
        sop = superoperator_matrix(ch)
        for _ in range(20):
            x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            np.testing.assert_allclose(
                (sop @ vectorize(x)).reshape((3, 3), order="F"),
                ch.apply(x),
                atol=1e-12,
            )

    def test_adjoint_map_is_conjugate_transpose(self):
        ch = random_cptp(2, 3, seed=9)
        adj = KrausMap([a.conj().T for a in ch.kraus])
        np.testing.assert_allclose(
            superoperator_matrix(adj), superoperator_matrix(ch).conj().T, atol=1e-14
        )


class TestClassify:
    def test_bit_flip_is_tp_and_unital(self):
        cls = classify(bit_flip(0.3))
        assert cls.trace_preserving and cls.unital
        assert cls.trace_nonincreasing and cls.subunital

    def test_amplitude_damping_not_subunital(self):
        # P(I) = diag(1 + gamma, 1 - gamma) is neither <= I nor = I
        cls = classify(amplitude_damping(0.5))
        assert cls.trace_preserving
        assert not cls.unital and not cls.subunital

    def test_shrunken_identity(self):
        cls = classify(KrausMap([0.5 * identity(2)]))
        assert not cls.trace_preserving
        assert cls.trace_nonincreasing


class TestChoi:
    def test_identity_channel_is_entangled_projector(self):
        choi = choi_matrix(identity_channel(2))
        eigs = np.sort(np.linalg.eigvalsh(choi))
        np.testing.assert_allclose(eigs, [0, 0, 0, 1], atol=1e-12)
        phi = vectorize(identity(2)) / np.sqrt(2)
        np.testing.assert_allclose(choi, np.outer(phi, phi.conj()), atol=1e-12)

    def test_fully_depolarizing_is_maximally_mixed(self):
        np.testing.assert_allclose(
            choi_matrix(depolarizing(1.0)), np.eye(4) / 4, atol=1e-12
        )

    def test_transpose_map_is_not_cp(self):
        # superoperator of X -> X^T is the swap; Choi eigenvalue -1/2
        swap = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                swap[j * 2 + i, i * 2 + j] = 1.0
        choi = choi_matrix(swap)
        assert np.linalg.eigvalsh(choi).min() == pytest.approx(-0.5)
        assert not is_completely_positive(swap)

    def test_kraus_and_reshuffle_routes_agree(self):
        ch = random_cptp(3, 4, seed=21)
        np.testing.assert_allclose(
            choi_matrix(ch), choi_matrix(superoperator_matrix(ch)), atol=1e-13
        )

    def test_kraus_maps_are_always_cp(self):
        assert is_completely_positive(amplitude_damping(0.3))
        assert is_completely_positive(random_cptni(3, 2, seed=5, shrink=0.7))


class TestIterate:
    def test_zero_iterations(self, rng):
        ch = random_cptp(2, 2, seed=1)
        x = rng.standard_normal((2, 2)) + 0j
        np.testing.assert_allclose(iterate(ch, x, 0), x)

    def test_bit_flip_geometric_decay(self):
        # P(sigma_z) = (1 - 2p) sigma_z
        out = iterate(bit_flip(0.3), PAULI_Z, 5)
        np.testing.assert_allclose(out, 0.4**5 * PAULI_Z, atol=1e-14)

    def test_unitary_phase_period(self):
        ch = unitary_channel(np.diag([1, 1j]))
        e12 = matrix_unit(2, 0, 1)
        np.testing.assert_allclose(iterate(ch, e12, 4), e12, atol=1e-14)

    def test_negative_count_rejected(self):
        with pytest.raises(PreconditionError):
            iterate(identity_channel(2), identity(2), -1)


class TestZoo:
    def test_amplitude_damping_kraus_form(self):
        ch = amplitude_damping(0.5)
        np.testing.assert_allclose(ch.kraus[0], np.diag([1, np.sqrt(0.5)]))
        np.testing.assert_allclose(ch.kraus[1], np.sqrt(0.5) * matrix_unit(2, 0, 1))
        total = sum(a.conj().T @ a for a in ch.kraus)
        np.testing.assert_allclose(total, identity(2), atol=1e-15)

    def test_even_mixture_is_bit_flip(self):
        mixture = random_unitary_channel([0.5, 0.5], [identity(2), PAULI_X])
        np.testing.assert_allclose(
            superoperator_matrix(mixture), superoperator_matrix(bit_flip(0.5)), atol=1e-15
        )
        assert classify(mixture).unital

    def test_random_cptp_is_trace_preserving(self):
        ch = random_cptp(3, 4, seed=42)
        total = sum(a.conj().T @ a for a in ch.kraus)
        np.testing.assert_allclose(total, identity(3), atol=1e-12)

    def test_random_cptni_shrinks(self):
        ch = random_cptni(2, 3, seed=42, shrink=0.5)
        cls = classify(ch)
        assert cls.trace_nonincreasing and not cls.trace_preserving

    def test_parameter_validation(self):
        with pytest.raises(PreconditionError):
            amplitude_damping(1.5)
        with pytest.raises(PreconditionError):
            depolarizing(-0.1)
        with pytest.raises(PreconditionError):
            phase_damping(2.0)
        with pytest.raises(PreconditionError):
            random_unitary_channel([0.5, 0.6], [identity(2), PAULI_X])
        with pytest.raises(PreconditionError):
            random_cptni(2, 2, seed=0, shrink=0.0)
        with pytest.raises(PreconditionError):
            unitary_channel(np.array([[1, 1], [0, 1]]))

    def test_direct_sum_blocks(self):
        ch = direct_sum(amplitude_damping(0.5), identity_channel(2))
        assert ch.dim == 4
        assert classify(ch).trace_preserving
        x = np.diag([1.0, 0, 0, 0]).astype(complex)
        np.testing.assert_allclose(ch.apply(x), x, atol=1e-15)


class TestMapProperties:
    def test_preserves_hermiticity_and_positivity(self, rng):
        for seed in range(5):
            ch = random_cptp(3, 3, seed=seed)
            rho = random_density(3, rng)
            out = ch.apply(rho)
            assert np.max(np.abs(out - out.conj().T)) < 1e-12
            assert np.linalg.eigvalsh(out).min() >= -1e-10

    def test_trace_monotonicity(self, rng):
        for seed in range(5):
            tp = random_cptp(2, 3, seed=seed)
            tni = random_cptni(2, 3, seed=seed, shrink=0.8)
            rho = random_density(2, rng)
            assert np.trace(tp.apply(rho)).real == pytest.approx(1.0, abs=1e-10)
            assert np.trace(tni.apply(rho)).real <= np.trace(rho).real + 1e-10

    def test_matrix_element_bound_under_iteration(self):
        # |<l| P^n(|i><j|) |k>| stays within [0, 1] for trace
        # non-increasing maps, for every basis unit and n <= 50
        for seed in range(3):
            ch = random_cptni(3, 3, seed=seed, shrink=0.9)
            sop = superoperator_matrix(ch)
            for i in range(3):
                for j in range(3):
                    vec = vectorize(matrix_unit(3, i, j))
                    for _ in range(50):
                        vec = sop @ vec
                        assert np.max(np.abs(vec)) <= 1 + 1e-9

    def test_induced_norm_equals_adjoint_norm(self):
        # the operator norm induced by the Hilbert-Schmidt norm is the
        # largest singular value of the superoperator, shared with the
        # adjoint map
        for seed in range(5):
            ch = random_cptp(3, 3, seed=seed)
            adj = KrausMap([a.conj().T for a in ch.kraus])
            norm = np.linalg.norm(superoperator_matrix(ch), 2)
            norm_adj = np.linalg.norm(superoperator_matrix(adj), 2)
            assert norm == pytest.approx(norm_adj, abs=1e-12)

    def test_general_channels_need_not_contract(self):
        # random unitary mixtures contract the Hilbert-Schmidt norm;
        # amplitude damping is trace preserving yet expands it
        mixture = random_unitary_channel([0.5, 0.5], [identity(2), PAULI_X])
        assert np.linalg.norm(superoperator_matrix(mixture), 2) <= 1 + 1e-12
        damping = amplitude_damping(0.5)
        assert np.linalg.norm(superoperator_matrix(damping), 2) > 1 + 1e-3


def test_kraus_map_validation():
    with pytest.raises(PreconditionError):
        KrausMap([])
    with pytest.raises(PreconditionError):
        KrausMap([identity(2), identity(3)])
    with pytest.raises(PreconditionError):
        KrausMap([np.array([[np.nan, 0], [0, 1]])])
    with pytest.raises(PreconditionError):
        identity_channel(2).apply(identity(3))
