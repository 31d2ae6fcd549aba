"""
RealityOracle: the classical side of the ledger

Evaluates the partition energy on spin assignments, verifies zero-ground-state
membership in N + 1 operations, brute-forces the exact optimum and samples
computational-basis measurements.
"""

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Tuple, Union
import logging

import numpy as np

from src.config.settings import INSTANCE_CONFIG, QUBIT_CONFIG
from src.core.exceptions import DimensionMismatch, PartitionCapExceeded
from src.core.hamiltonian_builder import PartitionInstance, partition_field
from src.core.qubit_algebra import QuantumState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpinAssignment:
    """Spin values y_1..y_N, each +1 or -1"""

    values: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if not values or any(v not in (1, -1) for v in values):
            raise ValueError(f"spin values must be +1 or -1, got {self.values!r}")
        object.__setattr__(self, "values", values)

    @property
    def num_qubits(self) -> int:
        return len(self.values)

    @classmethod
    def from_index(cls, index: int, num_qubits: int) -> "SpinAssignment":
        """Bit 0 maps to +1, bit 1 to -1; qubit 0 is the most significant bit"""
        return cls(tuple(1 - 2 * ((int(index) >> (num_qubits - 1 - q)) & 1) for q in range(num_qubits)))

    def to_index(self) -> int:
        index = 0
        for value in self.values:
            index = (index << 1) | (0 if value == 1 else 1)
        return index

    def flipped(self) -> "SpinAssignment":
        return SpinAssignment(tuple(-v for v in self.values))

    def __str__(self) -> str:
        return "".join("+" if v == 1 else "-" for v in self.values)


@dataclass(frozen=True)
class PartitionSolution:
    """Exact optimum of a partition instance with every optimal assignment"""

    min_value: Union[int, float]
    optimal_assignments: FrozenSet[SpinAssignment]

    @property
    def is_perfect(self) -> bool:
        return self.min_value == 0

    @property
    def basis_indices(self) -> FrozenSet[int]:
        return frozenset(a.to_index() for a in self.optimal_assignments)

    def to_dict(self, assignment_cap: int = None) -> Dict[str, Any]:
        ordered = sorted(self.optimal_assignments, key=lambda a: a.to_index())
        if assignment_cap is not None:
            ordered = ordered[:assignment_cap]
        return {
            "min_value": self.min_value,
            "is_perfect": self.is_perfect,
            "num_optimal": len(self.optimal_assignments),
            "assignments": [list(a.values) for a in ordered],
        }


def verification_cost(num_qubits: int) -> int:
    """Operation count of one zero-ground verification: N multiply-adds and a square"""
    return int(num_qubits) + 1


class RealityOracle:
    """Classical evaluation, verification and exact solution of partition instances"""

    def __init__(self, max_qubits: int = None):
        """Initialize the oracle"""
        self.max_qubits = max_qubits or QUBIT_CONFIG["max_qubits"]
        self.real_zero_rtol = INSTANCE_CONFIG["real_zero_rtol"]
        self.last_verification_cost = 0

    def _check_lengths(self, assignment: SpinAssignment, instance: PartitionInstance) -> None:
        if assignment.num_qubits != instance.num_qubits:
            raise DimensionMismatch(
                f"assignment has {assignment.num_qubits} spins, instance has {instance.num_qubits} weights"
            )

    def evaluate_ising(self, assignment: SpinAssignment, instance: PartitionInstance) -> Union[int, float]:
        """
        Partition energy (sum_i n_i y_i)^2

        Integer instances are evaluated exactly; real instances in double precision.
        """
        self._check_lengths(assignment, instance)
        total = 0
        for weight, spin in zip(instance.weights, assignment.values):
            total += weight * spin
        return total * total

    def verify_zero_ground(self, assignment: SpinAssignment, instance: PartitionInstance) -> bool:
        """
        Check that an assignment is a perfect partition

        Exact for integer weights; real weights use a tolerance relative to (sum n_i)^2.
        """
        value = self.evaluate_ising(assignment, instance)
        self.last_verification_cost = verification_cost(instance.num_qubits)
        if instance.is_integer:
            return value == 0
        return value <= self.real_zero_rtol * float(instance.total) ** 2

    def brute_force(self, instance: PartitionInstance) -> PartitionSolution:
        """
        Exact optimum by enumeration over half the basis (y_1 = +1), mirrored

        Raises:
            PartitionCapExceeded: if N exceeds the enumeration cap
        """
        num_qubits = instance.num_qubits
        if num_qubits > self.max_qubits:
            raise PartitionCapExceeded(
                f"brute force limited to {self.max_qubits} weights, instance has {num_qubits}"
            )
        field = partition_field(instance, leading_fixed=True)
        energies = field * field
        minimum = energies.min()
        if instance.is_integer:
            candidates = np.flatnonzero(energies == minimum)
        else:
            slack = 1e-12 * float(instance.total) ** 2
            candidates = np.flatnonzero(energies <= minimum + slack)

        evaluated = []
        for index in candidates:
            assignment = SpinAssignment.from_index(int(index), num_qubits)
            evaluated.append((self.evaluate_ising(assignment, instance), assignment))
        min_value = min(value for value, _ in evaluated)

        optimal = set()
        for value, assignment in evaluated:
            if value == min_value:
                optimal.add(assignment)
                optimal.add(assignment.flipped())

        logger.debug(f"Brute force N={num_qubits}: min {min_value}, {len(optimal)} optimal assignments")
        return PartitionSolution(min_value=min_value, optimal_assignments=frozenset(optimal))

    def measure_basis(self, state: QuantumState, seed: int) -> SpinAssignment:
        """Born-rule sample of a computational-basis outcome, mapped to spins"""
        probabilities = state.probabilities()
        probabilities = probabilities / probabilities.sum()
        rng = np.random.default_rng(seed)
        index = int(rng.choice(state.dimension, p=probabilities))
        return SpinAssignment.from_index(index, state.num_qubits)
