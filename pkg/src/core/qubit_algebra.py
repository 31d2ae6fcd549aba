"""
Qubit algebra: N-qubit state vectors, Pauli strings and sparse Hermitian operators

Basis convention: qubit i is bit i of the basis index counted from the most
significant end, bit 0 is |z=0> (spin y=+1) and bit 1 is |z=1> (spin y=-1).
"""

from dataclasses import dataclass, field, InitVar
from functools import reduce
from typing import List, Sequence, Tuple, Union
import logging

import numpy as np
import scipy.sparse as sp

from src.config.settings import QUBIT_CONFIG
from src.core.exceptions import (
    DimensionMismatch,
    NonHermitianDrift,
    SizeOverflow,
    UnnormalizedFactor,
)

logger = logging.getLogger(__name__)

PAULI_LETTERS = "IXYZ"

_SINGLE_SITE = {
    "I": sp.csr_matrix(np.array([[1, 0], [0, 1]], dtype=complex)),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


def check_num_qubits(num_qubits: int, minimum: int = 1) -> int:
    """Validate a qubit count against the configured ceiling"""
    if int(num_qubits) != num_qubits or num_qubits < minimum:
        raise SizeOverflow(f"number of qubits must be an integer >= {minimum}, got {num_qubits}")
    if num_qubits > QUBIT_CONFIG["max_qubits"]:
        raise SizeOverflow(
            f"{num_qubits} qubits exceeds the configured maximum of {QUBIT_CONFIG['max_qubits']}"
        )
    return int(num_qubits)


def flip_all_index(index: Union[int, np.ndarray], num_qubits: int):
    """Basis index after the global bit flip X^N"""
    return index ^ ((1 << num_qubits) - 1)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Unit-norm amplitude vector over the 2^N computational basis"""

    num_qubits: int
    amplitudes: np.ndarray
    norm_tolerance: InitVar[float] = None

    def __post_init__(self, norm_tolerance):
        check_num_qubits(self.num_qubits)
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != 2 ** self.num_qubits:
            raise DimensionMismatch(
                f"{amplitudes.shape[0]} amplitudes for {self.num_qubits} qubits "
                f"(expected {2 ** self.num_qubits})"
            )
        tolerance = QUBIT_CONFIG["norm_atol"] if norm_tolerance is None else norm_tolerance
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > tolerance:
            raise UnnormalizedFactor(f"state norm {norm:.15g} deviates from 1 by more than {tolerance:g}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dimension(self) -> int:
        return 2 ** self.num_qubits

    def probabilities(self) -> np.ndarray:
        """Born-rule probabilities |a_b|^2 over the computational basis"""
        return np.abs(self.amplitudes) ** 2

    def to_dict(self) -> dict:
        """
        JSON-safe form with real and imaginary parts as separate lists

        Returns:
            {"num_qubits": N, "real": [...], "imag": [...]}
        """
        return {
            "num_qubits": self.num_qubits,
            "real": self.amplitudes.real.tolist(),
            "imag": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict, norm_tolerance: float = None) -> "QuantumState":
        amplitudes = np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float)
        return cls(int(data["num_qubits"]), amplitudes, norm_tolerance)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Paulis, one letter per qubit"""

    letters: str

    def __post_init__(self):
        letters = "".join(self.letters).upper()
        if not letters:
            raise ValueError("Pauli string must be nonempty")
        bad = set(letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {letters!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @classmethod
    def single(cls, num_qubits: int, qubit: int, letter: str) -> "PauliString":
        letters = ["I"] * num_qubits
        letters[qubit] = letter
        return cls("".join(letters))

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """
    Sparse 2^N x 2^N Hermitian matrix

    Stored as a canonical CSR matrix (sorted, deduplicated). The entry set is
    checked to be closed under conjugate transpose at construction.
    """

    matrix: sp.csr_matrix
    num_qubits: int = field(default=None)

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix)
        matrix.sum_duplicates()
        matrix.sort_indices()
        rows, cols = matrix.shape
        if rows != cols:
            raise DimensionMismatch(f"operator must be square, got {rows}x{cols}")
        num_qubits = int(rows).bit_length() - 1
        if 2 ** num_qubits != rows:
            raise DimensionMismatch(f"operator dimension {rows} is not a power of two")
        if self.num_qubits is not None and self.num_qubits != num_qubits:
            raise DimensionMismatch(f"dimension {rows} does not match {self.num_qubits} qubits")
        defect = matrix - matrix.conj().T
        if defect.nnz and np.max(np.abs(defect.data)) > 0.0:
            raise NonHermitianDrift("operator entries are not closed under conjugate transpose")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "num_qubits", num_qubits)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def entries(self) -> List[Tuple[int, int, complex]]:
        """Sorted coordinate list of stored (row, col, value) entries"""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[k]), int(coo.col[k]), complex(coo.data[k])) for k in order]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def norm_bound(self) -> float:
        """Maximum absolute row sum, an upper bound on the spectral norm"""
        return float(np.max(np.asarray(abs(self.matrix).sum(axis=1)).ravel()))


def _as_pauli(string: Union[PauliString, str]) -> PauliString:
    return string if isinstance(string, PauliString) else PauliString(string)


def pauli_matrix(string: Union[PauliString, str]) -> HermitianOperator:
    """
    Kronecker lift of a Pauli string to the full 2^N space

    Args:
        string: Pauli string, qubit 0 first

    Returns:
        Hermitian, unitary operator on N qubits
    """
    string = _as_pauli(string)
    check_num_qubits(string.num_qubits)
    factors = [_SINGLE_SITE[letter] for letter in string.letters]
    matrix = reduce(lambda left, right: sp.kron(left, right, format="csr"), factors)
    return HermitianOperator(sp.csr_matrix(matrix, copy=True))


def _check_dimension(op: HermitianOperator, state: QuantumState) -> None:
    if op.dimension != state.dimension:
        raise DimensionMismatch(
            f"operator dimension {op.dimension} does not match {state.num_qubits}-qubit state"
        )


def apply(op: HermitianOperator, state: QuantumState) -> np.ndarray:
    """Sparse matrix-vector product op . amplitudes (not renormalized)"""
    _check_dimension(op, state)
    return op.matrix @ state.amplitudes


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, conjugate-linear in a"""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatch(f"inner product of {a.num_qubits}- and {b.num_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """|<a|b>|^2"""
    return abs(inner_product(a, b)) ** 2


def expectation(state: QuantumState, op: HermitianOperator) -> float:
    """
    Real expectation value <state|op|state>

    Raises:
        NonHermitianDrift: if the imaginary part exceeds the configured tolerance
    """
    value = complex(np.vdot(state.amplitudes, apply(op, state)))
    if abs(value.imag) >= QUBIT_CONFIG["hermitian_imag_atol"]:
        raise NonHermitianDrift(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def product_state(factors: Sequence[Tuple[complex, complex]]) -> QuantumState:
    """
    Tensor product of single-qubit states a1|0> + a2|1>, qubit 0 first

    Raises:
        UnnormalizedFactor: if any |a1|^2 + |a2|^2 differs from 1 beyond tolerance
    """
    if len(factors) == 0:
        raise ValueError("product state needs at least one factor")
    vectors = []
    for qubit, (a1, a2) in enumerate(factors):
        norm_sq = abs(a1) ** 2 + abs(a2) ** 2
        if abs(norm_sq - 1.0) > QUBIT_CONFIG["factor_atol"]:
            raise UnnormalizedFactor(f"factor {qubit} has squared norm {norm_sq:.12g}")
        # accepted factors are rescaled so the product meets the state norm tolerance
        vectors.append(np.array([a1, a2], dtype=complex) / np.sqrt(norm_sq))
    amplitudes = reduce(np.kron, vectors)
    return QuantumState(len(vectors), amplitudes)


def basis_state(num_qubits: int, index: int) -> QuantumState:
    """Computational basis state |index>"""
    amplitudes = np.zeros(2 ** check_num_qubits(num_qubits), dtype=complex)
    amplitudes[index] = 1.0
    return QuantumState(num_qubits, amplitudes)
