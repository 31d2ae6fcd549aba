"""
TomographyLab: the direct morphism as simulated state tomography

Finite-shot projective Pauli measurements, product-state reconstruction from
per-qubit Bloch vectors, full linear inversion over the Pauli basis and the
operation budgets of both protocols.
"""

from dataclasses import dataclass
from functools import partial
from itertools import product
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union
import hashlib
import logging
import math

import numpy as np
import scipy.sparse as sp

from src.config.settings import TOMOGRAPHY_CONFIG
from src.core.exceptions import (
    DimensionMismatch,
    InconsistentRecords,
    InvalidObservable,
    MissingPauliStrings,
    SizeOverflow,
)
from src.core.parallel import parallel_map
from src.core.qubit_algebra import (
    PauliString,
    QuantumState,
    expectation,
    pauli_matrix,
    product_state,
)

logger = logging.getLogger(__name__)

# p within this distance of 0 or 1 is taken as exact (eigenstate measurements)
_PROBABILITY_SNAP = 1e-12


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts of one Pauli measurement setting repeated over C shots"""

    observable: PauliString
    shots: int
    count_plus: int

    def __post_init__(self):
        if not isinstance(self.observable, PauliString):
            object.__setattr__(self, "observable", PauliString(self.observable))
        if self.shots < 1:
            raise InvalidObservable(f"shots must be positive, got {self.shots}")
        if not 0 <= self.count_plus <= self.shots:
            raise InconsistentRecords(
                f"count_plus {self.count_plus} outside [0, {self.shots}] for {self.observable}"
            )

    @property
    def estimate(self) -> float:
        """(2c - C) / C, the estimated expectation value"""
        return (2 * self.count_plus - self.shots) / self.shots

    def to_dict(self) -> Dict[str, Any]:
        return {
            "observable": str(self.observable),
            "shots": self.shots,
            "count_plus": self.count_plus,
            "estimate": self.estimate,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MeasurementRecord":
        return cls(PauliString(data["observable"]), int(data["shots"]), int(data["count_plus"]))


@dataclass(frozen=True)
class TomographyBudget:
    """Number of distinct measurement settings a protocol needs"""

    mode: str
    num_qubits: int
    operation_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {"mode": self.mode, "num_qubits": self.num_qubits, "operation_count": self.operation_count}


def budget(mode: str, num_qubits: int) -> TomographyBudget:
    """
    Operation count of full (4^N - 1 Pauli settings) or product (3N settings) tomography

    Settings are counted, not shots.
    """
    if int(num_qubits) != num_qubits or num_qubits < 1:
        raise SizeOverflow(f"number of qubits must be a positive integer, got {num_qubits}")
    num_qubits = int(num_qubits)
    if mode == "full":
        count = 4 ** num_qubits - 1
    elif mode == "product":
        count = 3 * num_qubits
    else:
        raise ValueError(f"unknown tomography mode {mode!r}; expected one of {TOMOGRAPHY_CONFIG['modes']}")
    return TomographyBudget(mode, num_qubits, count)


def observable_seed(seed: int, observable: PauliString) -> int:
    """Per-observable generator seed, independent of measurement order"""
    digest = hashlib.sha256(str(observable).encode("ascii")).digest()
    return int(seed) ^ int.from_bytes(digest[:8], "big")


def non_identity_strings(num_qubits: int) -> List[PauliString]:
    """All 4^N - 1 non-identity Pauli strings in lexicographic IXYZ order"""
    strings = ("".join(letters) for letters in product("IXYZ", repeat=num_qubits))
    return [PauliString(s) for s in strings if set(s) != {"I"}]


def exact_expectations(state: QuantumState, strings: Sequence[PauliString]) -> Dict[str, float]:
    """
    Noise-free <P> for every string, keyed by its text

    Args:
        state: State to evaluate
        strings: Pauli strings on the same number of qubits

    Returns:
        Mapping such as {"XI": 0.0, ...} in input order
    """
    return {str(p): expectation(state, pauli_matrix(p)) for p in strings}


def _measure(state: QuantumState, shots: int, seed: int, observable: PauliString) -> MeasurementRecord:
    if observable.is_identity:
        raise InvalidObservable("the all-identity string has no outcome to measure")
    if observable.num_qubits != state.num_qubits:
        raise DimensionMismatch(
            f"{observable.num_qubits}-qubit observable {observable} on a {state.num_qubits}-qubit state"
        )
    if shots < 1:
        raise InvalidObservable(f"shots must be positive, got {shots}")
    p = (1.0 + expectation(state, pauli_matrix(observable))) / 2.0
    if p < _PROBABILITY_SNAP:
        p = 0.0
    elif p > 1.0 - _PROBABILITY_SNAP:
        p = 1.0
    rng = np.random.default_rng(observable_seed(seed, observable))
    return MeasurementRecord(observable, int(shots), int(rng.binomial(shots, p)))


def bloch_vectors(records: Sequence[Tuple[MeasurementRecord, MeasurementRecord, MeasurementRecord]]) -> np.ndarray:
    """
    Per-qubit (<X>, <Y>, <Z>) estimates from X, Y, Z record triples

    Raises:
        InconsistentRecords: if a triple is not X, Y, Z on its own qubit
    """
    num_qubits = len(records)
    vectors = np.zeros((num_qubits, 3))
    for qubit, triple in enumerate(records):
        if len(triple) != 3:
            raise InconsistentRecords(f"qubit {qubit} needs X, Y and Z records, got {len(triple)}")
        for axis, (letter, record) in enumerate(zip("XYZ", triple)):
            if record.observable != PauliString.single(num_qubits, qubit, letter):
                raise InconsistentRecords(
                    f"qubit {qubit} expected {PauliString.single(num_qubits, qubit, letter)}, "
                    f"got {record.observable}"
                )
            vectors[qubit, axis] = record.estimate
    return vectors


def density_fidelity(rho: np.ndarray, state: QuantumState) -> float:
    """<psi|rho|psi> for a pure reference state"""
    return float(np.vdot(state.amplitudes, rho @ state.amplitudes).real)


def min_eigenvalue(rho: np.ndarray) -> float:
    """Smallest eigenvalue; negative under shot noise since positivity is not enforced"""
    return float(np.linalg.eigvalsh(rho)[0])


def dominant_state(rho: np.ndarray) -> QuantumState:
    """Eigenvector of the largest eigenvalue as a state"""
    values, vectors = np.linalg.eigh(rho)
    vector = vectors[:, -1]
    num_qubits = int(rho.shape[0]).bit_length() - 1
    return QuantumState(num_qubits, vector / np.linalg.norm(vector))


class TomographyLab:
    """Simulated Pauli measurements and state reconstruction"""

    def __init__(self, jobs: int = 1, **overrides):
        self.config = {**TOMOGRAPHY_CONFIG, **overrides}
        self.jobs = jobs

    def simulate_measurement(self, state: QuantumState, observable: Union[PauliString, str],
                             shots: int, seed: int) -> MeasurementRecord:
        """
        Measure a Pauli observable over C shots

        The +1 probability p = (1 + <P>) / 2 is exact; the count is a binomial
        draw from a generator seeded by seed xor hash(observable).

        Raises:
            InvalidObservable: for the all-identity string or nonpositive shots
        """
        if not isinstance(observable, PauliString):
            observable = PauliString(observable)
        return _measure(state, shots, seed, observable)

    def _measure_many(self, state: QuantumState, observables: Sequence[PauliString],
                      shots: int, seed: int) -> List[MeasurementRecord]:
        task = partial(_measure, state, shots, seed)
        return parallel_map(task, observables, self.jobs)

    def measure_product_settings(self, state: QuantumState, shots: int,
                                 seed: int) -> List[Tuple[MeasurementRecord, ...]]:
        """X, Y and Z on every qubit: 3N settings grouped per qubit"""
        num_qubits = state.num_qubits
        observables = [
            PauliString.single(num_qubits, qubit, letter)
            for qubit in range(num_qubits)
            for letter in "XYZ"
        ]
        records = self._measure_many(state, observables, shots, seed)
        return [tuple(records[3 * q:3 * q + 3]) for q in range(num_qubits)]

    def measure_all_paulis(self, state: QuantumState, shots: int, seed: int) -> List[MeasurementRecord]:
        """Every non-identity Pauli string: 4^N - 1 settings"""
        return self._measure_many(state, non_identity_strings(state.num_qubits), shots, seed)

    def reconstruct_from_bloch(self, vectors: Sequence[Sequence[float]]) -> QuantumState:
        """
        Product state from per-qubit Bloch vectors

        Amplitudes are (cos(theta/2), e^{i phi} sin(theta/2)) with a_1 real and
        nonnegative; a_2 = 1 when a_1 vanishes. Norms in (1, 1 + tolerance] are
        clipped to 1.

        Raises:
            InconsistentRecords: for a Bloch norm above 1 + tolerance or a zero vector
        """
        tolerance = self.config["bloch_clip_tolerance"]
        factors = []
        for qubit, (x, y, z) in enumerate(vectors):
            radius = math.sqrt(x * x + y * y + z * z)
            if radius > 1.0 + tolerance:
                raise InconsistentRecords(
                    f"qubit {qubit} Bloch norm {radius:.4f} exceeds 1 + {tolerance}"
                )
            if radius == 0.0:
                raise InconsistentRecords(f"qubit {qubit} has a zero Bloch vector")
            if radius > 1.0:
                logger.warning(f"Clipping Bloch norm {radius:.4f} on qubit {qubit}")
            cos_theta = min(1.0, max(-1.0, z / radius))
            if cos_theta == -1.0:
                factors.append((0.0, 1.0))
                continue
            theta = math.acos(cos_theta)
            phi = math.atan2(y, x)
            factors.append((math.cos(theta / 2), complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)))
        return product_state(factors)

    def reconstruct_product_state(
        self, records: Sequence[Tuple[MeasurementRecord, MeasurementRecord, MeasurementRecord]]
    ) -> QuantumState:
        """Product state from one (X, Y, Z) record triple per qubit"""
        return self.reconstruct_from_bloch(bloch_vectors(records))

    def full_state_reconstruct(self, expectations: Mapping[Union[PauliString, str], float],
                               num_qubits: int) -> np.ndarray:
        """
        Linear inversion rho = 2^-N (I + sum_P <P> P)

        The result is symmetrized and has its trace set to 1; positivity is
        not enforced.

        Raises:
            MissingPauliStrings: if any non-identity string lacks an expectation
        """
        values = {str(key): float(value) for key, value in expectations.items()}
        strings = non_identity_strings(num_qubits)
        missing = [str(p) for p in strings if str(p) not in values]
        if missing:
            raise MissingPauliStrings(missing)

        dimension = 2 ** num_qubits
        accumulated = sp.identity(dimension, dtype=complex, format="csr")
        for p in strings:
            accumulated = accumulated + values[str(p)] * pauli_matrix(p).matrix
        rho = accumulated.toarray() / dimension
        rho = 0.5 * (rho + rho.conj().T)
        rho[np.diag_indices(dimension)] += (1.0 - np.trace(rho).real) / dimension

        lowest = min_eigenvalue(rho)
        if lowest < 0:
            logger.warning(f"Reconstructed density matrix is not positive (min eigenvalue {lowest:.3e})")
        return rho
