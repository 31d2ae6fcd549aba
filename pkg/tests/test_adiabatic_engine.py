"""
Unit tests for the AdiabaticEngine module
"""

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import expm

from src.core.adiabatic_engine import (
    AdiabaticEngine,
    GroundSpaceProjector,
    compose_steps,
    criterion_ratio,
    exact_propagator,
    short_time_propagator,
    success_probability,
)
from src.core.exceptions import DegenerateGap, InvalidInstance, InvalidSchedule, ScanCapExceeded, StepTooCoarse
from src.core.hamiltonian_builder import HamiltonianPair, PartitionInstance, ScheduleSpec, initial_state
from src.core.morphism_ledger import MorphismLedger
from src.core.qubit_algebra import HermitianOperator, basis_state, fidelity, pauli_matrix


class TestPropagators:
    """Test cases for the short-time and exact propagators"""

    def test_zero_step_is_identity(self):
        op = short_time_propagator(pauli_matrix("XZ"), 0.0)
        vector = np.arange(4, dtype=complex)
        assert np.allclose(op @ vector, vector)

    def test_diagonal_action(self):
        op = short_time_propagator(pauli_matrix("Z"), 0.01)
        assert np.allclose(op @ np.array([1.0, 0.0]), [1 - 0.01j, 0])

    def test_negative_step(self):
        with pytest.raises(InvalidSchedule):
            short_time_propagator(pauli_matrix("Z"), -0.1)

    def test_first_order_error_ratio(self):
        rng = np.random.default_rng(5)
        raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = HermitianOperator(sp.csr_matrix((raw + raw.conj().T) / 2))
        errors = []
        for dt in (1e-2, 5e-3, 2.5e-3):
            approximate = short_time_propagator(h, dt) @ np.eye(4)
            errors.append(np.linalg.norm(approximate - exact_propagator(h, dt)))
        for coarse, fine in zip(errors, errors[1:]):
            assert 3.2 <= coarse / fine <= 4.8

    def test_exact_propagator_unitary(self):
        u = exact_propagator(pauli_matrix("XY"), 0.7)
        assert np.allclose(u.conj().T @ u, np.eye(4))


class TestSuccessProbability:
    """Test cases for the ground-space projector"""

    def setup_method(self):
        """Set up test fixtures"""
        self.projector = GroundSpaceProjector(2, frozenset({1, 2}))

    def test_examples(self):
        assert success_probability(basis_state(2, 1), self.projector) == pytest.approx(1.0)
        assert success_probability(initial_state(2), self.projector) == pytest.approx(0.5)
        assert success_probability(basis_state(2, 0), self.projector) == 0.0

    def test_from_instance(self):
        projector = GroundSpaceProjector.from_instance(PartitionInstance((1, 1)))
        assert projector.basis_indices == frozenset({1, 2})

    def test_must_be_flip_closed(self):
        with pytest.raises(InvalidInstance):
            GroundSpaceProjector(2, frozenset({1}))

    def test_criterion_ratio(self):
        assert criterion_ratio(100, 0.1) == pytest.approx(1.0)
        assert criterion_ratio(4, 2) == pytest.approx(16.0)
        with pytest.raises(DegenerateGap):
            criterion_ratio(4, 0.0)


class TestComposeSteps:
    """Test cases for compose_steps"""

    def test_matches_sequential_product(self):
        rng = np.random.default_rng(11)
        raw = rng.standard_normal((5, 3, 3)) + 1j * rng.standard_normal((5, 3, 3))
        unitaries = np.linalg.qr(raw)[0]
        expected = np.eye(3)
        for unitary in unitaries:
            expected = unitary @ expected
        assert np.allclose(compose_steps(unitaries), expected)

    def test_single_unitary(self):
        unitary = np.array([[[0.0, 1.0], [1.0, 0.0]]], dtype=complex)
        assert np.array_equal(compose_steps(unitary), unitary[0])


class TestPropagate:
    """Test cases for propagate and reverse_propagate"""

    def setup_method(self):
        """Set up test fixtures"""
        self.engine = AdiabaticEngine()
        self.pair = PartitionInstance((1, 1))

    def test_default_schedule(self):
        schedule = self.engine.default_schedule(self.pair, 5.0)
        assert schedule.num_steps == 300
        assert self.engine.default_schedule(self.pair, 0.0).is_sudden

    def test_sudden_quench(self):
        result = self.engine.propagate(self.pair, ScheduleSpec.sudden())
        assert result.success_probability == pytest.approx(0.5, abs=1e-12)
        assert result.norm_drift == pytest.approx(0.0, abs=1e-15)
        assert len(result.ground_overlap_trace) == 17
        assert [s for s, _ in result.ground_overlap_trace] == [j / 16 for j in range(17)]

    def test_sudden_quench_degenerate_ground_space(self):
        result = self.engine.propagate(PartitionInstance((1, 1, 2, 2)), ScheduleSpec.sudden())
        assert result.success_probability == pytest.approx(4 / 16, abs=1e-6)

    def test_unitarity_and_flip_symmetry(self):
        for weights, total_time in (((1, 1), 5.0), ((1, 1, 2, 2), 2.0), ((1, 2, 3), 1.0)):
            instance = PartitionInstance(weights)
            result = self.engine.propagate(instance, self.engine.default_schedule(instance, total_time))
            assert result.norm_drift < 1e-8
            assert result.valid
            assert all(abs(value - 1.0) < 1e-8 for _, value in result.flip_trace)

    def test_trace_checkpoints(self):
        result = self.engine.propagate(self.pair, self.engine.default_schedule(self.pair, 5.0))
        s_values = [s for s, _ in result.ground_overlap_trace]
        assert len(s_values) == 17
        assert s_values[0] == 0.0 and s_values[-1] == 1.0
        assert result.ground_overlap_trace[0][1] == pytest.approx(1.0)

    def test_checkpoints_inside_coarse_steps(self):
        result = self.engine.propagate(self.pair, ScheduleSpec(0.1, 2))
        assert [s for s, _ in result.ground_overlap_trace] == [j / 16 for j in range(17)]
        assert [s for s, _ in result.flip_trace] == [j / 16 for j in range(17)]
        assert all(abs(value - 1.0) < 1e-10 for _, value in result.flip_trace)

        h_trans, h_ising = HamiltonianPair(self.pair).dense_pair()
        matrix = 0.75 * h_trans + 0.25 * h_ising
        psi = expm(-1j * 0.025 * matrix) @ initial_state(2).amplitudes
        ground = np.linalg.eigh(matrix)[1][:, 0]
        assert result.ground_overlap_trace[4][1] == pytest.approx(abs(np.vdot(ground, psi)) ** 2, abs=1e-10)

    def test_final_energy_falls_with_time(self):
        energies = [
            self.engine.propagate(self.pair, self.engine.default_schedule(self.pair, t), record_trace=False).final_energy
            for t in (0.0, 0.25, 1.0, 16.0)
        ]
        assert energies[0] == pytest.approx(2.0)
        assert energies[1] > energies[2] > energies[3]
        assert energies[3] < 0.05

    def test_final_energy_matches_success(self):
        result = self.engine.propagate(self.pair, self.engine.default_schedule(self.pair, 3.0))
        assert result.final_energy == pytest.approx(4.0 * (1.0 - result.success_probability), abs=1e-10)

    def test_step_too_coarse(self):
        with pytest.raises(StepTooCoarse):
            self.engine.propagate(self.pair, ScheduleSpec(10.0, 10))

    def test_result_dict(self):
        result = self.engine.propagate(self.pair, ScheduleSpec.sudden(), seed=3)
        data = result.to_dict()
        assert data["seed"] == 3
        assert data["T"] == 0.0
        assert len(data["final_state"]["real"]) == 4
        assert "final_state" not in result.to_dict(include_state=False)

    def test_reverse_recovers_initial_state(self):
        instance = PartitionInstance((1, 1, 2, 2))
        schedule = self.engine.default_schedule(instance, 2.0)
        forward = self.engine.propagate(instance, schedule, record_trace=False)
        returned = self.engine.reverse_propagate(instance, schedule, forward.final_state)
        assert fidelity(returned, initial_state(4)) >= 1 - max(1e-10, 10 * forward.norm_drift)

    def test_sparse_path_agrees_with_dense(self):
        instance = PartitionInstance((1, 1, 2))
        schedule = ScheduleSpec(1.0, 200)
        dense = AdiabaticEngine().propagate(instance, schedule, record_trace=False)
        sparse = AdiabaticEngine(dense_max_qubits=1).propagate(instance, schedule, record_trace=False)
        assert np.allclose(dense.final_state.amplitudes, sparse.final_state.amplitudes, atol=1e-8)

    def test_composed_steps_agree_with_stepwise(self):
        instance = PartitionInstance((1, 1, 2, 2))
        schedule = self.engine.default_schedule(instance, 2.0)
        composed = self.engine.propagate(instance, schedule, record_trace=False)
        stepwise = AdiabaticEngine(compose_max_dimension=0).propagate(instance, schedule, record_trace=False)
        assert np.allclose(composed.final_state.amplitudes, stepwise.final_state.amplitudes, atol=1e-10)

    def test_reverse_of_mixed_parity_state(self):
        instance = PartitionInstance((1, 1, 2))
        schedule = ScheduleSpec(1.0, 200)
        state = basis_state(3, 1)
        dense = AdiabaticEngine().reverse_propagate(instance, schedule, state)
        sparse = AdiabaticEngine(dense_max_qubits=1).reverse_propagate(instance, schedule, state)
        assert np.allclose(dense.amplitudes, sparse.amplitudes, atol=1e-8)

    def test_second_order_convergence(self):
        instance = PartitionInstance((1, 1, 1, 1))
        reference = self.engine.propagate(instance, ScheduleSpec(1.0, 6400), record_trace=False)
        deviations = []
        for steps in (200, 400):
            result = self.engine.propagate(instance, ScheduleSpec(1.0, steps), record_trace=False)
            deviations.append(np.linalg.norm(result.final_state.amplitudes - reference.final_state.amplitudes))
        assert 3.0 <= deviations[0] / deviations[1] <= 5.0


class TestThresholdScan:
    """Test cases for find_threshold_time"""

    def setup_method(self):
        """Set up test fixtures"""
        self.engine = AdiabaticEngine()
        self.pair = PartitionInstance((1, 1))

    def test_sudden_meets_target(self):
        result = self.engine.find_threshold_time(self.pair, 0.5)
        assert result.at_floor
        assert result.time == 1.0
        assert result.evaluations == 1

    def test_reaches_target(self):
        result = self.engine.find_threshold_time(self.pair, 0.99)
        assert result.success >= 0.99
        assert self.engine.success_at(self.pair, result.time) >= 0.99
        assert self.engine.success_at(self.pair, result.time / 8) < 0.99

    def test_cap_exceeded(self):
        with pytest.raises(ScanCapExceeded) as excinfo:
            self.engine.find_threshold_time(self.pair, 0.99, cap=0.5)
        assert excinfo.value.last_time == 0.0
        assert excinfo.value.cap == 0.5

    @pytest.mark.slow
    @pytest.mark.integration
    def test_threshold_on_perfect_instances(self):
        instances = [self.pair] + MorphismLedger().perfect_instances(4, 3, seed=0)
        for instance in instances:
            result = self.engine.find_threshold_time(instance, 0.99)
            assert result.success >= 0.99
            assert self.engine.success_at(instance, result.time / 8) < 0.99

    def test_invalid_target(self):
        with pytest.raises(InvalidSchedule):
            self.engine.find_threshold_time(self.pair, 1.0)


if __name__ == "__main__":
    pytest.main([__file__])
