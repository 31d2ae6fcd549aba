"""
Unit tests for the Hamiltonian builder
"""

import numpy as np
import pytest

from src.core.exceptions import DimensionMismatch, InvalidInstance, InvalidSchedule
from src.core.hamiltonian_builder import (
    HamiltonianPair,
    PartitionInstance,
    ScheduleSpec,
    build_ising,
    build_transverse,
    hamiltonian_norm_bound,
    initial_state,
    interpolate,
    ising_diagonal,
    partition_field,
)
from src.core.qubit_algebra import apply, expectation, pauli_matrix


class TestPartitionInstance:
    """Test cases for PartitionInstance validation"""

    def test_integer_instance(self):
        instance = PartitionInstance((3, 1, 1, 1))
        assert instance.num_qubits == 4
        assert instance.is_integer
        assert instance.total == 6

    def test_real_instance(self):
        instance = PartitionInstance((0.5, 0.25))
        assert not instance.is_integer

    def test_nonpositive_weight(self):
        with pytest.raises(InvalidInstance):
            PartitionInstance((1, 0))
        with pytest.raises(InvalidInstance):
            PartitionInstance((1, -2))

    def test_too_few_weights(self):
        with pytest.raises(InvalidInstance):
            PartitionInstance((5,))

    def test_non_numeric_weight(self):
        with pytest.raises(InvalidInstance):
            PartitionInstance((1, True))
        with pytest.raises(InvalidInstance):
            PartitionInstance((1, "2"))


class TestScheduleSpec:
    """Test cases for ScheduleSpec"""

    def test_linear_schedule(self):
        schedule = ScheduleSpec(10.0, 4)
        assert schedule.dt == pytest.approx(2.5)
        assert schedule.s(5.0) == pytest.approx(0.5)
        assert np.allclose(schedule.step_midpoints(), [0.125, 0.375, 0.625, 0.875])

    def test_sudden_quench(self):
        schedule = ScheduleSpec.sudden()
        assert schedule.is_sudden
        assert schedule.s(0.0) == 0.0
        assert schedule.s(1e-9) == 1.0

    def test_invalid_values(self):
        with pytest.raises(InvalidSchedule):
            ScheduleSpec(-1.0, 10)
        with pytest.raises(InvalidSchedule):
            ScheduleSpec(1.0, 0)
        with pytest.raises(InvalidSchedule):
            ScheduleSpec(float("inf"), 10)


class TestBuilders:
    """Test cases for the transverse and Ising Hamiltonians"""

    def test_transverse_spectrum(self):
        values = np.linalg.eigvalsh(build_transverse(2).to_dense())
        assert np.allclose(values, [-2, 0, 0, 2])

    def test_transverse_ground_energy(self):
        assert np.linalg.eigvalsh(build_transverse(3).to_dense())[0] == pytest.approx(-3.0)

    def test_transverse_on_uniform_state(self):
        for num_qubits in (1, 2, 4):
            state = initial_state(num_qubits)
            h_trans = build_transverse(num_qubits)
            assert np.allclose(apply(h_trans, state), -num_qubits * state.amplitudes)
            assert expectation(state, h_trans) == pytest.approx(-num_qubits)

    def test_ising_diagonal(self):
        h_ising = build_ising(PartitionInstance((1, 1)))
        assert np.array_equal(h_ising.diagonal().real, [4, 0, 0, 4])
        assert h_ising.matrix.nnz <= 4

    def test_ising_perfect_partition_entry(self):
        diagonal = ising_diagonal(PartitionInstance((3, 1, 1, 1)))
        assert diagonal[0b0111] == 0
        assert diagonal.min() == 0
        assert diagonal.dtype == np.int64

    def test_partition_field_leading_fixed(self):
        instance = PartitionInstance((1, 2, 4))
        full = partition_field(instance)
        half = partition_field(instance, leading_fixed=True)
        assert np.array_equal(half, full[:4])

    def test_ising_commutes_with_every_z(self):
        instance = PartitionInstance((3, 1, 2, 5))
        ising = build_ising(instance).matrix
        for qubit in range(instance.num_qubits):
            letters = ["I"] * instance.num_qubits
            letters[qubit] = "Z"
            z = pauli_matrix("".join(letters)).matrix
            assert abs(ising @ z - z @ ising).max() == 0

    def test_initial_state(self):
        assert np.allclose(initial_state(1).amplitudes, [2 ** -0.5] * 2)
        assert np.allclose(initial_state(2).amplitudes, [0.5] * 4)


class TestInterpolation:
    """Test cases for interpolate and HamiltonianPair"""

    def setup_method(self):
        """Set up test fixtures"""
        self.instance = PartitionInstance((1, 2, 3))
        self.pair = HamiltonianPair(self.instance)

    def test_endpoints_exact(self):
        assert interpolate(self.pair.h_trans, self.pair.h_ising, 0.0) is self.pair.h_trans
        assert interpolate(self.pair.h_trans, self.pair.h_ising, 1.0) is self.pair.h_ising

    def test_midpoint(self):
        middle = self.pair.at(0.5).to_dense()
        expected = 0.5 * self.pair.h_trans.to_dense() + 0.5 * self.pair.h_ising.to_dense()
        assert np.allclose(middle, expected)

    def test_out_of_range(self):
        with pytest.raises(InvalidSchedule):
            self.pair.at(1.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            interpolate(build_transverse(2), self.pair.h_ising, 0.5)

    def test_global_flip_symmetry(self):
        flip = pauli_matrix("XXX").matrix
        for s in (0.0, 0.3, 1.0):
            h = self.pair.matrix_at(s)
            assert abs(flip @ h @ flip - h).max() == 0

    def test_affine_in_s(self):
        for s1, s2, weight in ((0.1, 0.9, 0.25), (0.0, 0.6, 0.5), (0.3, 1.0, 0.8)):
            combined = self.pair.at(weight * s1 + (1 - weight) * s2).to_dense()
            expected = weight * self.pair.at(s1).to_dense() + (1 - weight) * self.pair.at(s2).to_dense()
            assert np.allclose(combined, expected, atol=1e-12)

    def test_norm_bound(self):
        bound = hamiltonian_norm_bound(self.instance)
        assert bound == 3 + 36
        for s in (0.0, 0.5, 1.0):
            assert np.max(np.abs(np.linalg.eigvalsh(self.pair.at(s).to_dense()))) <= bound


if __name__ == "__main__":
    pytest.main([__file__])
