"""
Hamiltonian builder for the transverse-field to number-partitioning sweep

H_trans = -sum_i X_i, H_Ising = (sum_i n_i Z_i)^2 and the linear interpolation
H(s) = (1 - s) H_trans + s H_Ising, with hbar = 1 throughout.
"""

from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple, Union
import logging
import math

import numpy as np
import scipy.sparse as sp

from src.config.settings import INSTANCE_CONFIG
from src.core.exceptions import DimensionMismatch, InvalidInstance, InvalidSchedule
from src.core.qubit_algebra import HermitianOperator, QuantumState, check_num_qubits

logger = logging.getLogger(__name__)

Weight = Union[int, float]


@dataclass(frozen=True)
class PartitionInstance:
    """Positive weights n_1..n_N of a number-partitioning instance"""

    weights: Tuple[Weight, ...]

    def __post_init__(self):
        weights = []
        for position, weight in enumerate(self.weights):
            if isinstance(weight, bool) or not isinstance(weight, (int, float, np.integer, np.floating)):
                raise InvalidInstance(f"weight {position + 1} is not a number: {weight!r}")
            weight = int(weight) if isinstance(weight, (int, np.integer)) else float(weight)
            if not math.isfinite(weight) or weight <= 0:
                raise InvalidInstance(f"weight {position + 1} must be positive, got {weight!r}")
            weights.append(weight)
        if len(weights) < INSTANCE_CONFIG["min_qubits"]:
            raise InvalidInstance(
                f"need at least {INSTANCE_CONFIG['min_qubits']} weights, got {len(weights)}"
            )
        check_num_qubits(len(weights), INSTANCE_CONFIG["min_qubits"])
        object.__setattr__(self, "weights", tuple(weights))

    @property
    def num_qubits(self) -> int:
        return len(self.weights)

    @property
    def is_integer(self) -> bool:
        """Integer instances are evaluated in exact integer arithmetic"""
        return all(isinstance(weight, int) for weight in self.weights)

    @property
    def total(self) -> Weight:
        return sum(self.weights)

    def to_dict(self) -> Dict[str, Any]:
        return {"weights": list(self.weights)}


@dataclass(frozen=True)
class ScheduleSpec:
    """
    Linear schedule s(t) = t / total_time over num_steps equal steps

    total_time = 0 is the sudden-quench limit: the Hamiltonian jumps from
    H_trans to H_Ising with no evolution in between.
    """

    total_time: float
    num_steps: int

    def __post_init__(self):
        if not math.isfinite(self.total_time) or self.total_time < 0:
            raise InvalidSchedule(f"total_time must be finite and >= 0, got {self.total_time}")
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise InvalidSchedule(f"num_steps must be a positive integer, got {self.num_steps}")
        object.__setattr__(self, "total_time", float(self.total_time))
        object.__setattr__(self, "num_steps", int(self.num_steps))

    @classmethod
    def sudden(cls) -> "ScheduleSpec":
        return cls(0.0, 1)

    @property
    def is_sudden(self) -> bool:
        return self.total_time == 0.0

    @property
    def dt(self) -> float:
        return self.total_time / self.num_steps

    def s(self, t: float) -> float:
        """Reduced time, clamped to [0, 1]"""
        if self.is_sudden:
            return 1.0 if t > 0 else 0.0
        return min(1.0, max(0.0, t / self.total_time))

    def step_midpoints(self) -> np.ndarray:
        """Reduced time at the middle of every step"""
        return (np.arange(self.num_steps) + 0.5) / self.num_steps

    def to_dict(self) -> Dict[str, Any]:
        return {"total_time": self.total_time, "num_steps": self.num_steps, "schedule": "linear"}


def partition_field(instance: PartitionInstance, leading_fixed: bool = False) -> np.ndarray:
    """
    Signed sums sum_i n_i y_i over the computational basis

    Args:
        instance: Partition instance
        leading_fixed: Only enumerate the half of the basis with y_1 = +1

    Returns:
        Array indexed by basis index (int64 for integer instances, float64 otherwise)
    """
    num_qubits = instance.num_qubits
    free = num_qubits - 1 if leading_fixed else num_qubits
    if instance.is_integer:
        dtype = np.int64 if instance.total ** 2 < 2 ** 62 else object
    else:
        dtype = np.float64
    indices = np.arange(2 ** free, dtype=np.int64)
    field = np.zeros(2 ** free, dtype=dtype)
    for qubit, weight in enumerate(instance.weights):
        if leading_fixed and qubit == 0:
            field += weight
            continue
        bit = (indices >> (num_qubits - 1 - qubit)) & 1
        field += weight * (1 - 2 * bit).astype(dtype)
    return field


def ising_diagonal(instance: PartitionInstance) -> np.ndarray:
    """Exact diagonal (sum_i n_i y_i)^2 of H_Ising"""
    field = partition_field(instance)
    return field * field


def build_transverse(num_qubits: int) -> HermitianOperator:
    """
    Transverse-field Hamiltonian -sum_i X_i

    Ground energy -N, unique ground state equal to the uniform superposition.
    """
    num_qubits = check_num_qubits(num_qubits)
    dimension = 2 ** num_qubits
    rows = np.repeat(np.arange(dimension, dtype=np.int64), num_qubits)
    masks = np.tile(1 << np.arange(num_qubits - 1, -1, -1, dtype=np.int64), dimension)
    cols = rows ^ masks
    data = -np.ones(rows.shape[0], dtype=float)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(dimension, dimension))
    return HermitianOperator(matrix)


def build_ising(instance: PartitionInstance) -> HermitianOperator:
    """Number-partitioning Hamiltonian (sum_i n_i Z_i)^2, diagonal and nonnegative"""
    diagonal = np.asarray(ising_diagonal(instance), dtype=float)
    logger.debug(f"H_Ising built for N={instance.num_qubits}, min diagonal {diagonal.min():g}")
    return HermitianOperator(sp.diags(diagonal, format="csr"))


def interpolate(h_trans: HermitianOperator, h_ising: HermitianOperator, s: float) -> HermitianOperator:
    """
    Linear interpolation (1 - s) h_trans + s h_ising

    Endpoints return the input operators themselves.
    """
    if not 0.0 <= s <= 1.0:
        raise InvalidSchedule(f"reduced time s must lie in [0, 1], got {s}")
    if h_trans.dimension != h_ising.dimension:
        raise DimensionMismatch(
            f"cannot interpolate operators of dimension {h_trans.dimension} and {h_ising.dimension}"
        )
    if s == 0.0:
        return h_trans
    if s == 1.0:
        return h_ising
    return HermitianOperator((1.0 - s) * h_trans.matrix + s * h_ising.matrix)


def initial_state(num_qubits: int) -> QuantumState:
    """Uniform superposition, every amplitude 2^(-N/2)"""
    num_qubits = check_num_qubits(num_qubits)
    dimension = 2 ** num_qubits
    return QuantumState(num_qubits, np.full(dimension, 1.0 / math.sqrt(dimension), dtype=complex))


def hamiltonian_norm_bound(instance: PartitionInstance) -> float:
    """N + (sum n_i)^2, an upper bound on ||H(s)|| for every s"""
    return float(instance.num_qubits + float(instance.total) ** 2)


class HamiltonianPair:
    """H_trans and H_Ising of one instance, built once and interpolated on demand"""

    def __init__(self, instance: PartitionInstance):
        self.instance = instance
        self.h_trans = build_transverse(instance.num_qubits)
        self.h_ising = build_ising(instance)

    def at(self, s: float) -> HermitianOperator:
        return interpolate(self.h_trans, self.h_ising, s)

    def matrix_at(self, s: float) -> sp.csr_matrix:
        """Interpolated CSR matrix without the Hermiticity re-check"""
        return (1.0 - s) * self.h_trans.matrix + s * self.h_ising.matrix

    def dense_pair(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.h_trans.to_dense(), self.h_ising.to_dense()
