"""
AdiabaticEngine: time-dependent Schroedinger evolution under H(s(t))

Midpoint piecewise-constant exponential integrator with s = t / T, the
first-order short-time propagator used as a consistency oracle, success
probability against the degenerate Ising ground space and the threshold-time
scan behind the adiabatic criterion T * gap^2.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple
import logging
import math

import numpy as np
from scipy.sparse.linalg import LinearOperator, expm_multiply

from src.config.settings import EVOLUTION_CONFIG, SPECTRAL_CONFIG
from src.core.exceptions import (
    DegenerateGap,
    DimensionMismatch,
    InvalidInstance,
    InvalidSchedule,
    ScanCapExceeded,
    StepTooCoarse,
)
from src.core.hamiltonian_builder import (
    HamiltonianPair,
    PartitionInstance,
    ScheduleSpec,
    hamiltonian_norm_bound,
    initial_state,
    ising_diagonal,
)
from src.core.qubit_algebra import HermitianOperator, QuantumState, flip_all_index
from src.core.spectral_analyzer import flip_sector_isometry, ground_eigenspace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundSpaceProjector:
    """Computational-basis indices spanning the ground space of H_Ising"""

    num_qubits: int
    basis_indices: FrozenSet[int]

    def __post_init__(self):
        indices = frozenset(int(i) for i in self.basis_indices)
        if not indices:
            raise InvalidInstance("ground space must be nonempty")
        if min(indices) < 0 or max(indices) >= 2 ** self.num_qubits:
            raise DimensionMismatch(f"ground-space index out of range for {self.num_qubits} qubits")
        mirrored = frozenset(int(flip_all_index(i, self.num_qubits)) for i in indices)
        if mirrored != indices:
            raise InvalidInstance("ground space must be closed under the global bit flip")
        object.__setattr__(self, "basis_indices", indices)

    @classmethod
    def from_instance(cls, instance: PartitionInstance) -> "GroundSpaceProjector":
        """Indices achieving the minimal diagonal of H_Ising"""
        diagonal = ising_diagonal(instance)
        indices = np.flatnonzero(diagonal == diagonal.min())
        return cls(instance.num_qubits, frozenset(int(i) for i in indices))

    def index_array(self) -> np.ndarray:
        return np.array(sorted(self.basis_indices), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    """
    Outcome of one propagation from s = 0 to s = 1

    norm_drift is |norm - 1| of the final state; the state is never renormalized.
    """

    final_state: QuantumState
    norm_drift: float
    ground_overlap_trace: Tuple[Tuple[float, float], ...]
    flip_trace: Tuple[Tuple[float, float], ...]
    success_probability: float
    final_energy: float
    total_time: float
    steps: int
    seed: int = 0

    @property
    def valid(self) -> bool:
        return self.norm_drift < EVOLUTION_CONFIG["valid_norm_drift"]

    def to_dict(self, include_state: bool = True) -> Dict[str, Any]:
        data = {
            "T": self.total_time,
            "steps": self.steps,
            "success_probability": self.success_probability,
            "norm_drift": self.norm_drift,
            "final_energy": self.final_energy,
            "valid": self.valid,
            "seed": self.seed,
            "trace": [[s, overlap] for s, overlap in self.ground_overlap_trace],
            "flip_trace": [[s, value] for s, value in self.flip_trace],
        }
        if include_state:
            data["final_state"] = self.final_state.to_dict()
        return data


@dataclass(frozen=True)
class ThresholdResult:
    """Least scanned total time reaching the target success probability"""

    time: float
    success: float
    capped: bool = False
    at_floor: bool = False
    evaluations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "time": self.time,
            "success": self.success,
            "capped": self.capped,
            "at_floor": self.at_floor,
            "evaluations": self.evaluations,
        }


def short_time_propagator(h: HermitianOperator, dt: float) -> LinearOperator:
    """
    First-order propagator v -> (I - i h dt) v, hbar = 1

    Not unitary; used to check the production integrator, never to evolve.
    """
    if dt < 0:
        raise InvalidSchedule(f"time step must be nonnegative, got {dt}")
    matrix = h.matrix

    def matvec(v):
        v = np.asarray(v, dtype=complex).reshape(-1)
        return v - 1j * dt * (matrix @ v)

    return LinearOperator(matrix.shape, matvec=matvec, dtype=complex)


def exact_propagator(h: HermitianOperator, dt: float) -> np.ndarray:
    """exp(-i h dt) as a dense matrix via eigendecomposition"""
    values, vectors = np.linalg.eigh(h.to_dense())
    return (vectors * np.exp(-1j * values * dt)) @ vectors.conj().T


def success_probability(state: QuantumState, projector: GroundSpaceProjector) -> float:
    """Squared amplitude mass on the ground-space basis states"""
    if state.num_qubits != projector.num_qubits:
        raise DimensionMismatch(
            f"{state.num_qubits}-qubit state against {projector.num_qubits}-qubit ground space"
        )
    amplitudes = state.amplitudes[projector.index_array()]
    return float(np.sum(np.abs(amplitudes) ** 2))


def flip_expectation(amplitudes: np.ndarray) -> float:
    """<psi|X^N|psi>; X^N reverses the basis order"""
    return float(np.vdot(amplitudes, amplitudes[::-1]).real)


def criterion_ratio(total_time: float, min_gap: float) -> float:
    """Dimensionless adiabatic criterion T * gap^2 (hbar = 1)"""
    if min_gap <= 0:
        raise DegenerateGap(f"minimum gap must be positive, got {min_gap}")
    return float(total_time) * float(min_gap) ** 2


def compose_steps(unitaries: np.ndarray) -> np.ndarray:
    """
    Product U[m-1] ... U[1] U[0] of a stack of step unitaries, U[0] acting first

    Neighbouring pairs are multiplied level by level so each level is one
    batched matmul.
    """
    stack = np.asarray(unitaries)
    while stack.shape[0] > 1:
        tail = stack[-1:] if stack.shape[0] % 2 else None
        paired = stack[:-1] if tail is not None else stack
        stack = paired[1::2] @ paired[0::2]
        if tail is not None:
            stack = np.concatenate([stack, tail])
    return stack[0]


class AdiabaticEngine:
    """Integrates the interpolated Hamiltonian and scans for threshold times"""

    def __init__(self, **overrides):
        """
        Initialize the engine

        Args:
            overrides: Replacement values for EVOLUTION_CONFIG keys
        """
        self.config = {**EVOLUTION_CONFIG, **overrides}
        self.spectral_config = SPECTRAL_CONFIG

    def default_schedule(self, instance: PartitionInstance, total_time: float) -> ScheduleSpec:
        """Step count keeping ||H||_bound * dt at the target step angle"""
        if total_time == 0:
            return ScheduleSpec.sudden()
        bound = hamiltonian_norm_bound(instance)
        steps = max(1, math.ceil(total_time * bound / self.config["target_step_angle"]))
        return ScheduleSpec(total_time, steps)

    def _check_step(self, instance: PartitionInstance, schedule: ScheduleSpec) -> None:
        if schedule.is_sudden:
            return
        angle = hamiltonian_norm_bound(instance) * schedule.dt
        if angle >= self.config["max_step_angle"]:
            raise StepTooCoarse(
                f"step angle {angle:.4g} >= {self.config['max_step_angle']} with "
                f"{schedule.num_steps} steps over T={schedule.total_time:g}"
            )

    def _sector_blocks(self, pair: HamiltonianPair, psi: np.ndarray) -> List[Tuple[np.ndarray, ...]]:
        """(isometry, H_trans, H_Ising, coefficients) for each X^N parity sector psi occupies"""
        trans, ising = (m.real for m in pair.dense_pair())
        blocks = []
        for parity in (1, -1):
            isometry = flip_sector_isometry(pair.instance.num_qubits, parity).toarray()
            coefficients = isometry.T @ psi
            if np.any(coefficients):
                blocks.append(
                    (isometry, isometry.T @ trans @ isometry, isometry.T @ ising @ isometry, coefficients)
                )
        return blocks

    def _evolve(self, pair: HamiltonianPair, schedule: ScheduleSpec, psi: np.ndarray,
                reverse: bool = False, stops: Iterable[int] = (),
                on_step: Optional[Callable[[int, np.ndarray], None]] = None) -> np.ndarray:
        """
        Apply the midpoint steps exp(-i H(s_k) dt) in time order

        reverse applies exp(+i H(s_k) dt) from the last step to the first.
        on_step receives the number of completed steps and the current vector
        after every count listed in stops.
        """
        num_steps = schedule.num_steps
        dt = schedule.dt
        midpoints = schedule.step_midpoints()
        order = np.arange(num_steps)[::-1] if reverse else np.arange(num_steps)
        sign = 1.0 if reverse else -1.0
        stops = {int(k) for k in stops if 0 < k <= num_steps}

        if pair.instance.num_qubits > self.config["dense_max_qubits"]:
            for done, k in enumerate(order, start=1):
                generator = (sign * 1j * dt) * pair.matrix_at(float(midpoints[k]))
                psi = expm_multiply(generator, psi)
                if on_step is not None and done in stops:
                    on_step(done, psi)
            return psi

        # H(s) commutes with X^N, so each parity sector evolves on its own
        blocks = self._sector_blocks(pair, psi)
        dimension = blocks[0][1].shape[0]
        batch = max(1, self.config["eig_batch"] // dimension)
        compose = dimension <= self.config["compose_max_dimension"]
        bounds = sorted(set(range(0, num_steps, batch)) | stops | {num_steps})

        for start, end in zip(bounds[:-1], bounds[1:]):
            s = midpoints[order[start:end]]
            for index, (isometry, trans, ising, coefficients) in enumerate(blocks):
                stack = (1.0 - s)[:, None, None] * trans + s[:, None, None] * ising
                values, vectors = np.linalg.eigh(stack)
                phases = np.exp(sign * 1j * values * dt)
                if compose:
                    unitaries = (vectors * phases[:, None, :]) @ vectors.transpose(0, 2, 1)
                    coefficients = compose_steps(unitaries) @ coefficients
                else:
                    for j in range(len(s)):
                        coefficients = vectors[j] @ (phases[j] * (vectors[j].T @ coefficients))
                blocks[index] = (isometry, trans, ising, coefficients)
            if on_step is not None and end in stops:
                on_step(end, sum(block[0] @ block[3] for block in blocks))

        return sum(block[0] @ block[3] for block in blocks)

    def _partial_step(self, pair: HamiltonianPair, s: float, duration: float, psi: np.ndarray) -> np.ndarray:
        """exp(-i H(s) duration) psi for a checkpoint inside a step"""
        if pair.instance.num_qubits <= self.config["dense_max_qubits"]:
            trans, ising = pair.dense_pair()
            values, vectors = np.linalg.eigh((1.0 - s) * trans + s * ising)
            return vectors @ (np.exp(-1j * values * duration) * (vectors.conj().T @ psi))
        return expm_multiply((-1j * duration) * pair.matrix_at(s), psi)

    def _ground_overlap(self, pair: HamiltonianPair, s: float, psi: np.ndarray) -> float:
        if pair.instance.num_qubits <= self.config["dense_max_qubits"]:
            trans, ising = pair.dense_pair()
            matrix = (1.0 - s) * trans + s * ising
        else:
            matrix = pair.matrix_at(s)
        _, vectors = ground_eigenspace(matrix, self.spectral_config, s)
        return float(np.sum(np.abs(vectors.conj().T @ psi) ** 2))

    def propagate(self, instance: PartitionInstance, schedule: ScheduleSpec, seed: int = 0,
                  record_trace: bool = True) -> EvolutionResult:
        """
        Evolve the uniform superposition from s = 0 to s = 1

        Args:
            instance: Partition instance
            schedule: Total time and number of equal steps; total_time 0 is the sudden quench
            seed: Recorded with the result; the integration itself is deterministic
            record_trace: Skip the checkpoint eigensolves when False (threshold scans)

        Returns:
            EvolutionResult with overlap and flip-symmetry traces at s = j/16

        Raises:
            StepTooCoarse: if ||H||_bound * dt reaches the configured step angle
        """
        self._check_step(instance, schedule)
        pair = HamiltonianPair(instance)
        num_qubits = instance.num_qubits
        psi = initial_state(num_qubits).amplitudes.copy()

        checkpoints = self.config["checkpoints"]
        # checkpoint j sits remainder/checkpoints of the way into step `done`
        marks: Dict[int, List[Tuple[float, float]]] = {}
        for j in range(checkpoints + 1):
            if schedule.is_sudden:
                done, offset = 0, 0.0
            else:
                done, remainder = divmod(j * schedule.num_steps, checkpoints)
                offset = remainder * schedule.dt / checkpoints
            marks.setdefault(done, []).append((j / checkpoints, offset))
        midpoints = schedule.step_midpoints() if not schedule.is_sudden else None

        overlap_trace: List[Tuple[float, float]] = []
        flip_trace: List[Tuple[float, float]] = []

        def record(done: int, vector: np.ndarray) -> None:
            if not record_trace:
                return
            for s, offset in marks.get(done, ()):
                if offset > 0.0:
                    vector_at = self._partial_step(pair, float(midpoints[done]), offset, vector)
                else:
                    vector_at = vector
                overlap_trace.append((s, self._ground_overlap(pair, s, vector_at)))
                flip_trace.append((s, flip_expectation(vector_at)))

        record(0, psi)
        if not schedule.is_sudden:
            stops = [done for done in marks if done > 0] if record_trace else []
            psi = self._evolve(pair, schedule, psi, stops=stops, on_step=record)

        norm_drift = abs(float(np.linalg.norm(psi)) - 1.0)
        final_state = QuantumState(num_qubits, psi, norm_tolerance=math.inf)
        projector = GroundSpaceProjector.from_instance(instance)
        success = success_probability(final_state, projector)
        energy = float(np.dot(np.abs(psi) ** 2, pair.h_ising.diagonal().real))

        result = EvolutionResult(
            final_state=final_state,
            norm_drift=norm_drift,
            ground_overlap_trace=tuple(overlap_trace),
            flip_trace=tuple(flip_trace),
            success_probability=success,
            final_energy=energy,
            total_time=schedule.total_time,
            steps=schedule.num_steps,
            seed=seed,
        )
        if not result.valid:
            logger.warning(f"Norm drift {norm_drift:.3e} exceeds {self.config['valid_norm_drift']:g}")
        logger.debug(
            f"Propagated N={num_qubits} T={schedule.total_time:g} steps={schedule.num_steps}: "
            f"success {success:.6f}, drift {norm_drift:.2e}"
        )
        return result

    def reverse_propagate(self, instance: PartitionInstance, schedule: ScheduleSpec,
                          state: QuantumState) -> QuantumState:
        """
        Run the schedule backwards from s = 1 to s = 0 (the adjoint of propagate)

        Every step is the exact inverse of the matching forward step, so applied
        to the output of propagate it returns the initial state up to round-off.
        """
        if state.num_qubits != instance.num_qubits:
            raise DimensionMismatch(
                f"{state.num_qubits}-qubit state for a {instance.num_qubits}-weight instance"
            )
        self._check_step(instance, schedule)
        psi = state.amplitudes.copy()
        if not schedule.is_sudden:
            psi = self._evolve(HamiltonianPair(instance), schedule, psi, reverse=True)
        return QuantumState(instance.num_qubits, psi, norm_tolerance=math.inf)

    def success_at(self, instance: PartitionInstance, total_time: float) -> float:
        """
        Success probability after the default schedule of length total_time

        Args:
            instance: Partition instance
            total_time: T; 0 is the sudden quench

        Returns:
            Final mass on the Ising ground space, without checkpoint eigensolves
        """
        schedule = self.default_schedule(instance, total_time)
        return self.propagate(instance, schedule, record_trace=False).success_probability

    def find_threshold_time(self, instance: PartitionInstance, target: float,
                            floor: float = None, cap: float = None) -> ThresholdResult:
        """
        Least scanned T with success probability >= target

        Doubles T from the floor until the target is met, then bisects the last
        bracket to the configured relative width. A sudden quench that already
        meets the target returns the floor with at_floor set.

        Raises:
            ScanCapExceeded: if the doubling scan passes the cap
        """
        if not 0.0 < target < 1.0:
            raise InvalidSchedule(f"target success must lie in (0, 1), got {target}")
        floor = self.config["scan_floor"] if floor is None else float(floor)
        cap = self.config["scan_cap"] if cap is None else float(cap)

        sudden = self.success_at(instance, 0.0)
        evaluations = 1
        if sudden >= target:
            logger.info(f"Sudden quench already reaches {sudden:.4f} >= {target}")
            return ThresholdResult(floor, sudden, at_floor=True, evaluations=evaluations)

        lower, lower_success = 0.0, sudden
        upper = floor
        while True:
            if upper > cap:
                logger.warning(f"Threshold scan passed cap {cap:g} at T={upper:g}")
                raise ScanCapExceeded(lower, cap, lower_success)
            success = self.success_at(instance, upper)
            evaluations += 1
            if success >= target:
                break
            lower, lower_success = upper, success
            upper *= 2.0

        if upper == floor:
            logger.info(f"Target {target} met at the scan floor T={floor:g}")
            return ThresholdResult(floor, success, at_floor=True, evaluations=evaluations)

        while upper - lower > self.config["bisection_rtol"] * upper:
            middle = 0.5 * (lower + upper)
            middle_success = self.success_at(instance, middle)
            evaluations += 1
            if middle_success >= target:
                upper, success = middle, middle_success
            else:
                lower = middle

        logger.info(
            f"Threshold T*={upper:.6g} for N={instance.num_qubits} "
            f"(success {success:.4f}, {evaluations} evaluations)"
        )
        return ThresholdResult(upper, success, evaluations=evaluations)
