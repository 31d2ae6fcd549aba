"""
Unit tests for the TomographyLab module
"""

import math

import numpy as np
import pytest

from src.core.exceptions import InconsistentRecords, InvalidObservable, MissingPauliStrings, SizeOverflow
from src.core.hamiltonian_builder import initial_state
from src.core.qubit_algebra import PauliString, basis_state, fidelity, product_state
from src.core.tomography_lab import (
    MeasurementRecord,
    TomographyLab,
    bloch_vectors,
    budget,
    density_fidelity,
    dominant_state,
    exact_expectations,
    min_eigenvalue,
    non_identity_strings,
    observable_seed,
)

HALF = 1.0 / math.sqrt(2.0)


def random_product_state(rng, num_qubits):
    factors = []
    for _ in range(num_qubits):
        theta = rng.uniform(0, math.pi)
        phi = rng.uniform(-math.pi, math.pi)
        factors.append((math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)))
    return product_state(factors)


class TestBudget:
    """Test cases for operation budgets"""

    def test_full_counts(self):
        assert budget("full", 3).operation_count == 63
        assert budget("full", 1).operation_count == 3
        for num_qubits in range(1, 11):
            assert budget("full", num_qubits).operation_count == 4 ** num_qubits - 1

    def test_product_counts(self):
        assert budget("product", 5).operation_count == 15

    def test_invalid(self):
        with pytest.raises(SizeOverflow):
            budget("full", 0)
        with pytest.raises(ValueError):
            budget("shadow", 2)


class TestSimulateMeasurement:
    """Test cases for finite-shot Pauli measurements"""

    def setup_method(self):
        """Set up test fixtures"""
        self.lab = TomographyLab()
        self.plus = product_state([(HALF, HALF)])

    def test_eigenstate_outcomes(self):
        record = self.lab.simulate_measurement(self.plus, "X", 500, seed=1)
        assert record.count_plus == 500
        assert self.lab.simulate_measurement(basis_state(1, 0), "Z", 100, seed=2).estimate == 1.0

    def test_binomial_concentration(self):
        close = sum(
            abs(self.lab.simulate_measurement(self.plus, "Z", 10 ** 4, seed).estimate) <= 0.05
            for seed in range(100)
        )
        assert close >= 95

    def test_reproducible_and_order_independent(self):
        state = random_product_state(np.random.default_rng(0), 2)
        direct = self.lab.simulate_measurement(state, "XI", 1000, seed=9)
        grouped = self.lab.measure_product_settings(state, 1000, seed=9)
        assert grouped[0][0] == direct
        assert self.lab.simulate_measurement(state, "XI", 1000, seed=9) == direct

    def test_observable_seed_differs(self):
        assert observable_seed(1, PauliString("XI")) != observable_seed(1, PauliString("IX"))

    def test_identity_rejected(self):
        with pytest.raises(InvalidObservable):
            self.lab.simulate_measurement(self.plus, "I", 10, seed=0)

    def test_nonpositive_shots(self):
        with pytest.raises(InvalidObservable):
            self.lab.simulate_measurement(self.plus, "X", 0, seed=0)

    def test_record_validation(self):
        with pytest.raises(InconsistentRecords):
            MeasurementRecord(PauliString("Z"), 10, 11)
        record = MeasurementRecord.from_dict({"observable": "XZ", "shots": 4, "count_plus": 1})
        assert record.estimate == -0.5


class TestProductReconstruction:
    """Test cases for Bloch-vector reconstruction"""

    def setup_method(self):
        """Set up test fixtures"""
        self.lab = TomographyLab()

    def test_cardinal_states(self):
        assert np.allclose(self.lab.reconstruct_from_bloch([(1, 0, 0)]).amplitudes, [HALF, HALF])
        assert np.allclose(self.lab.reconstruct_from_bloch([(0, 0, 1)]).amplitudes, [1, 0])
        assert np.allclose(self.lab.reconstruct_from_bloch([(0, 1, 0)]).amplitudes, [HALF, 1j * HALF])
        assert np.allclose(self.lab.reconstruct_from_bloch([(0, 0, -1)]).amplitudes, [0, 1])

    def test_clipping_and_rejection(self):
        state = self.lab.reconstruct_from_bloch([(0, 0, 1.03)])
        assert np.allclose(state.amplitudes, [1, 0])
        with pytest.raises(InconsistentRecords):
            self.lab.reconstruct_from_bloch([(0, 0, 1.2)])
        with pytest.raises(InconsistentRecords):
            self.lab.reconstruct_from_bloch([(0, 0, 0)])

    def test_exact_expectations_round_trip(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            num_qubits = int(rng.integers(1, 7))
            state = random_product_state(rng, num_qubits)
            values = exact_expectations(
                state, [PauliString.single(num_qubits, q, a) for q in range(num_qubits) for a in "XYZ"]
            )
            vectors = [
                [values[str(PauliString.single(num_qubits, q, a))] for a in "XYZ"] for q in range(num_qubits)
            ]
            assert fidelity(self.lab.reconstruct_from_bloch(vectors), state) >= 1 - 1e-10

    def test_sampled_fidelity(self):
        rng = np.random.default_rng(7)
        fidelities = []
        for seed in range(20):
            state = random_product_state(rng, 3)
            triples = self.lab.measure_product_settings(state, 10 ** 4, seed)
            fidelities.append(fidelity(self.lab.reconstruct_product_state(triples), state))
        assert np.median(fidelities) >= 0.999

    def test_shot_noise_scaling(self):
        state = random_product_state(np.random.default_rng(11), 1)
        exact = np.array([[v for v in exact_expectations(state, [PauliString(a) for a in "XYZ"]).values()]])
        shot_counts = [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5]
        errors = []
        for shots in shot_counts:
            per_seed = [
                np.linalg.norm(bloch_vectors(self.lab.measure_product_settings(state, shots, seed)) - exact)
                for seed in range(50)
            ]
            errors.append(np.median(per_seed))
        slope = np.polyfit(np.log(shot_counts), np.log(errors), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_mismatched_triple(self):
        state = basis_state(2, 0)
        triples = self.lab.measure_product_settings(state, 10, 0)
        swapped = [triples[1], triples[0]]
        with pytest.raises(InconsistentRecords):
            bloch_vectors(swapped)


class TestFullReconstruction:
    """Test cases for linear inversion"""

    def setup_method(self):
        """Set up test fixtures"""
        self.lab = TomographyLab()

    def test_basis_state(self):
        rho = self.lab.full_state_reconstruct({"X": 0.0, "Y": 0.0, "Z": 1.0}, 1)
        assert np.allclose(rho, [[1, 0], [0, 0]])

    def test_uniform_state_rank_one(self):
        state = initial_state(2)
        rho = self.lab.full_state_reconstruct(exact_expectations(state, non_identity_strings(2)), 2)
        assert np.linalg.matrix_rank(rho, tol=1e-10) == 1
        assert density_fidelity(rho, state) == pytest.approx(1.0)
        assert fidelity(dominant_state(rho), state) == pytest.approx(1.0)
        assert min_eigenvalue(rho) == pytest.approx(0.0, abs=1e-12)

    def test_missing_strings(self):
        with pytest.raises(MissingPauliStrings) as excinfo:
            self.lab.full_state_reconstruct({"XI": 0.0}, 2)
        assert len(excinfo.value.missing) == 14

    def test_sampled_fidelity(self):
        state = random_product_state(np.random.default_rng(3), 2)
        good = 0
        for seed in range(100):
            records = self.lab.measure_all_paulis(state, 10 ** 4, seed)
            rho = self.lab.full_state_reconstruct({r.observable: r.estimate for r in records}, 2)
            assert np.allclose(np.trace(rho), 1.0)
            good += density_fidelity(rho, state) >= 0.99
        assert good >= 95

    def test_setting_count(self):
        records = self.lab.measure_all_paulis(basis_state(2, 0), 10, 0)
        assert len(records) == budget("full", 2).operation_count
        assert len(non_identity_strings(3)) == 63


if __name__ == "__main__":
    pytest.main([__file__])
