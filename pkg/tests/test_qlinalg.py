import math

import numpy as np
import pytest

from qdimtest.entropy import binary_entropy
from qdimtest.qlinalg import (
    HADAMARD,
    BipartiteState,
    MeasurementBasis,
    NonPhysicalStateError,
    apply_channel_1q,
    bit_flip,
    check_density_matrix,
    complementarity,
    conditional_entropy,
    dephasing,
    depolarizing,
    eigh_jacobi,
    measure_A,
    measured_conditional_entropy,
    partial_trace,
    pauli_basis,
    tensor_basis,
    unitary,
    von_neumann_entropy,
)


def random_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def epr(n=1):
    d = 2**n
    psi = np.eye(d).reshape(-1) / math.sqrt(d)
    return BipartiteState(d, d, np.outer(psi, psi.conj()).astype(complex))


class TestJacobi:
    def test_reconstruction_sweep(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(1000):
            d = int(rng.integers(2, 65))
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            a = (a + a.conj().T) / 2
            w, v = eigh_jacobi(a)
            worst = max(worst, np.linalg.norm(v @ np.diag(w) @ v.conj().T - a))
        assert worst < 1e-10

    def test_matches_lapack(self):
        rng = np.random.default_rng(3)
        for d in (1, 2, 5, 17, 40):
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            a = a + a.conj().T
            w, v = eigh_jacobi(a)
            np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-11)
            np.testing.assert_allclose(v.conj().T @ v, np.eye(d), atol=1e-12)

    def test_diagonal_and_degenerate(self):
        w, v = eigh_jacobi(np.diag([3.0, 1.0, 1.0, -2.0]))
        np.testing.assert_allclose(w, [-2, 1, 1, 3])
        w, _ = eigh_jacobi(np.eye(6) / 6)
        np.testing.assert_allclose(w, np.full(6, 1 / 6), atol=1e-15)


class TestEntropy:
    def test_pure(self):
        assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0

    @pytest.mark.parametrize("d", [2, 3, 8, 64])
    def test_maximally_mixed(self, d):
        assert von_neumann_entropy(np.eye(d) / d) == pytest.approx(math.log2(d), abs=1e-12)

    def test_binary(self):
        assert von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(binary_entropy(0.25), abs=1e-14)

    def test_rejects_non_psd(self):
        with pytest.raises(NonPhysicalStateError):
            von_neumann_entropy(np.diag([1.1, -0.1]))
        with pytest.raises(NonPhysicalStateError):
            check_density_matrix(np.diag([0.5, 0.6]))

    def test_range(self):
        rng = np.random.default_rng(8)
        for d in (2, 5, 16):
            h = von_neumann_entropy(random_density(rng, d))
            assert 0.0 <= h <= math.log2(d) + 1e-12


class TestConditionalEntropy:
    def test_epr(self):
        assert conditional_entropy(epr()) == pytest.approx(-1.0, abs=1e-12)
        assert conditional_entropy(epr(2)) == pytest.approx(-2.0, abs=1e-12)

    def test_products(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            ra, rb = random_density(rng, da), random_density(rng, db)
            state = BipartiteState(da, db, np.kron(ra, rb))
            assert conditional_entropy(state) == pytest.approx(von_neumann_entropy(ra), abs=1e-9)

    def test_random_bounds(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            state = BipartiteState(2, 4, random_density(rng, 8, rank=int(rng.integers(1, 9))))
            h = conditional_entropy(state)
            assert -1.0 - 1e-9 <= h <= 1.0 + 1e-9

    def test_partial_traces(self):
        rng = np.random.default_rng(1)
        ra, rb = random_density(rng, 3), random_density(rng, 2)
        joint = np.kron(ra, rb)
        np.testing.assert_allclose(partial_trace(joint, 3, 2, "A"), ra, atol=1e-14)
        np.testing.assert_allclose(partial_trace(joint, 3, 2, "B"), rb, atol=1e-14)


class TestMeasureA:
    def test_fixed_point(self):
        rng = np.random.default_rng(2)
        rho = np.kron(np.diag([0.3, 0.7]), random_density(rng, 2))
        state = BipartiteState(2, 2, rho)
        out = measure_A(state, pauli_basis("Z"))
        np.testing.assert_allclose(out.state, rho, atol=1e-14)

    def test_epr_z(self):
        out = measure_A(epr(), pauli_basis("Z"))
        assert conditional_entropy(out) == pytest.approx(0.0, abs=1e-12)

    def test_idempotent_and_trace(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            state = BipartiteState(4, 2, random_density(rng, 8))
            basis = tensor_basis("XY")
            once = measure_A(state, basis)
            twice = measure_A(once, basis)
            assert np.max(np.abs(once.state - twice.state)) < 1e-12
            assert abs(np.trace(once.state) - 1) < 1e-12

    def test_entropy_never_decreases(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            state = BipartiteState(2, 3, random_density(rng, 6))
            for label in "XYZ":
                pinched = measure_A(state, pauli_basis(label))
                assert von_neumann_entropy(pinched.state) >= von_neumann_entropy(state.state) - 1e-10

    def test_block_route_matches_generic(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            state = BipartiteState(4, 3, random_density(rng, 12))
            for label in ("XX", "ZY", "XZ"):
                basis = tensor_basis(label)
                generic = conditional_entropy(measure_A(state, basis))
                assert measured_conditional_entropy(state, basis) == pytest.approx(generic, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            measure_A(epr(), tensor_basis("XX"))


class TestChannels:
    def test_bit_flip_zero_identity(self):
        rng = np.random.default_rng(0)
        rho = random_density(rng, 2)
        np.testing.assert_allclose(apply_channel_1q(rho, bit_flip(0.0)), rho)

    def test_full_depolarizing(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            out = apply_channel_1q(random_density(rng, 2), depolarizing(0.75))
            np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-15)

    def test_dephasing_plus(self):
        plus = np.full((2, 2), 0.5, dtype=complex)
        for p in (0.0, 0.1, 0.5, 1.0):
            out = apply_channel_1q(plus, dephasing(p))
            np.testing.assert_allclose(out, [[0.5, 0.5 * (1 - 2 * p)], [0.5 * (1 - 2 * p), 0.5]], atol=1e-15)

    def test_preserves_trace_and_psd(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            rho = random_density(rng, 2)
            p = float(rng.random())
            for ch in (bit_flip(p), dephasing(p), depolarizing(0.75 * p), unitary(HADAMARD)):
                out = apply_channel_1q(rho, ch)
                assert abs(np.trace(out) - 1) < 1e-12
                check_density_matrix(out)

    @pytest.mark.parametrize("ch", [bit_flip(1.2), dephasing(-0.1), depolarizing(0.8)])
    def test_rate_range(self, ch):
        with pytest.raises(ValueError):
            apply_channel_1q(np.eye(2) / 2, ch)


class TestComplementarity:
    def test_identical(self):
        assert complementarity(pauli_basis("X"), pauli_basis("X")) == pytest.approx(1.0)

    def test_qubit_mub(self):
        assert complementarity(pauli_basis("X"), pauli_basis("Z")) == pytest.approx(0.5)
        assert complementarity(pauli_basis("Y"), pauli_basis("Z")) == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_transversal(self, n):
        assert complementarity(tensor_basis("X" * n), tensor_basis("Z" * n)) == pytest.approx(2.0**-n)

    def test_basis_validation(self):
        with pytest.raises(ValueError):
            MeasurementBasis(np.array([[1, 1], [0, 1]], dtype=complex))
        b = MeasurementBasis.from_vectors([[1, 0], [0, 1]])
        assert b.dim == 2
