"""
Unit tests for the RealityOracle module
"""

from collections import Counter

import numpy as np
import pytest

from src.core.adiabatic_engine import AdiabaticEngine
from src.core.exceptions import DimensionMismatch, PartitionCapExceeded
from src.core.hamiltonian_builder import PartitionInstance, build_ising, initial_state
from src.core.instance_io import generate_instance
from src.core.qubit_algebra import basis_state
from src.core.reality_oracle import PartitionSolution, RealityOracle, SpinAssignment, verification_cost


class TestSpinAssignment:
    """Test cases for SpinAssignment"""

    def test_index_mapping(self):
        assignment = SpinAssignment.from_index(1, 2)
        assert assignment.values == (1, -1)
        assert assignment.to_index() == 1
        assert str(assignment) == "+-"

    def test_flipped(self):
        assert SpinAssignment((1, -1, -1)).flipped().values == (-1, 1, 1)

    def test_invalid_values(self):
        with pytest.raises(ValueError):
            SpinAssignment((1, 0))


class TestRealityOracle:
    """Test cases for RealityOracle"""

    def setup_method(self):
        """Set up test fixtures"""
        self.oracle = RealityOracle()

    def test_evaluate_ising(self):
        assert self.oracle.evaluate_ising(SpinAssignment((1, -1, -1, -1)), PartitionInstance((3, 1, 1, 1))) == 0
        assert self.oracle.evaluate_ising(SpinAssignment((1, 1)), PartitionInstance((1, 1))) == 4

    def test_evaluate_minimum_by_enumeration(self):
        instance = PartitionInstance((1, 1, 3))
        values = [self.oracle.evaluate_ising(SpinAssignment.from_index(i, 3), instance) for i in range(8)]
        assert min(values) == 1

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            self.oracle.evaluate_ising(SpinAssignment((1, 1, 1)), PartitionInstance((1, 1)))

    def test_verify_zero_ground(self):
        assert self.oracle.verify_zero_ground(SpinAssignment((1, -1, -1, -1)), PartitionInstance((3, 1, 1, 1)))
        assert self.oracle.verify_zero_ground(SpinAssignment((1, -1)), PartitionInstance((1, 1)))
        instance = PartitionInstance((1, 1, 3))
        assert not any(
            self.oracle.verify_zero_ground(SpinAssignment.from_index(i, 3), instance) for i in range(8)
        )

    def test_verification_cost(self):
        self.oracle.verify_zero_ground(SpinAssignment((1, -1, 1)), PartitionInstance((1, 2, 1)))
        assert self.oracle.last_verification_cost == 4
        assert verification_cost(10) == 11

    def test_real_weights_tolerance(self):
        instance = PartitionInstance((0.1, 0.2, 0.3))
        assert self.oracle.verify_zero_ground(SpinAssignment((1, 1, -1)), instance)

    def test_brute_force_pair(self):
        solution = self.oracle.brute_force(PartitionInstance((1, 1)))
        assert solution.min_value == 0
        assert solution.is_perfect
        assert {a.values for a in solution.optimal_assignments} == {(1, -1), (-1, 1)}

    def test_brute_force_unique_split(self):
        solution = self.oracle.brute_force(PartitionInstance((3, 1, 1, 1)))
        assert solution.min_value == 0
        assert len(solution.optimal_assignments) == 2

    def test_brute_force_imperfect(self):
        solution = self.oracle.brute_force(PartitionInstance((1, 2, 4)))
        assert solution.min_value == 1
        assert not solution.is_perfect

    def test_brute_force_cap(self):
        with pytest.raises(PartitionCapExceeded):
            RealityOracle(max_qubits=3).brute_force(PartitionInstance((1, 1, 1, 1)))

    def test_solution_dict(self):
        solution = self.oracle.brute_force(PartitionInstance((1, 1, 2, 2)))
        data = solution.to_dict(assignment_cap=2)
        assert data["num_optimal"] == 4
        assert len(data["assignments"]) == 2
        assert isinstance(solution, PartitionSolution)

    def test_measure_basis_deterministic(self):
        for seed in range(5):
            assert self.oracle.measure_basis(basis_state(2, 1), seed).values == (1, -1)

    def test_measure_basis_uniform_on_initial_state(self):
        state = initial_state(2)
        counts = Counter(self.oracle.measure_basis(state, seed).to_index() for seed in range(4000))
        assert sorted(counts) == [0, 1, 2, 3]
        assert all(850 <= count <= 1150 for count in counts.values())

    def test_evolved_samples_verify(self):
        instance = PartitionInstance((1, 1))
        engine = AdiabaticEngine()
        result = engine.propagate(instance, engine.default_schedule(instance, 50.0), record_trace=False)
        assert result.success_probability > 0.99
        verified = sum(
            self.oracle.verify_zero_ground(self.oracle.measure_basis(result.final_state, seed), instance)
            for seed in range(100)
        )
        assert verified >= 98

    def test_matches_ising_ground_space(self):
        for num_qubits in range(2, 13):
            for seed in range(100):
                instance = generate_instance("uniform-int", num_qubits, seed)
                diagonal = build_ising(instance).diagonal().real
                expected = set(np.flatnonzero(diagonal == diagonal.min()).tolist())
                assert set(self.oracle.brute_force(instance).basis_indices) == expected


if __name__ == "__main__":
    pytest.main([__file__])
