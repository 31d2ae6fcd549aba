"""
SpectralAnalyzer for the instantaneous spectrum of H(s)

Computes the two lowest levels of H(s) on a grid of reduced times, either in
the full space or in the flip-symmetric sector (+1 eigenspace of X^N), and
fits the minimum gap against the number of qubits.
"""

from dataclasses import dataclass
from functools import partial
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy import linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from src.config.settings import SPECTRAL_CONFIG
from src.core.exceptions import (
    DegenerateGap,
    DimensionMismatch,
    EigensolverFailure,
    InsufficientData,
    InvalidSchedule,
)
from src.core.hamiltonian_builder import HamiltonianPair, PartitionInstance, ising_diagonal
from src.core.parallel import parallel_map
from src.core.qubit_algebra import HermitianOperator, check_num_qubits, flip_all_index

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix]

SECTOR_ALIASES = {
    "full": "full",
    "flip_symmetric": "flip_symmetric",
    "sym": "flip_symmetric",
}


def normalize_sector(sector: str) -> str:
    """Canonical sector name; "sym" is accepted for flip_symmetric"""
    try:
        return SECTOR_ALIASES[sector]
    except KeyError:
        raise ValueError(f"unknown sector {sector!r}; expected one of {sorted(SECTOR_ALIASES)}")


def flip_sector_isometry(num_qubits: int, parity: int = 1) -> sp.csr_matrix:
    """
    Orthonormal basis of the ``parity`` eigenspace of X^N, one basis vector per column

    Column z (z < 2^(N-1), leading bit 0) is (|z> + parity |z xor 1..1>) / sqrt(2).
    """
    if parity not in (1, -1):
        raise ValueError(f"parity must be +1 or -1, got {parity}")
    num_qubits = check_num_qubits(num_qubits)
    half = 2 ** (num_qubits - 1)
    columns = np.arange(half, dtype=np.int64)
    rows = np.concatenate([columns, flip_all_index(columns, num_qubits)])
    scale = 1.0 / math.sqrt(2.0)
    data = np.concatenate([np.full(half, scale), np.full(half, parity * scale)])
    return sp.csr_matrix(
        (data, (rows, np.concatenate([columns, columns]))), shape=(2 * half, half)
    )


def flip_symmetric_isometry(num_qubits: int) -> sp.csr_matrix:
    """Orthonormal basis of the +1 eigenspace of X^N"""
    return flip_sector_isometry(num_qubits, 1)


def restrict_to_sector(matrix: sp.spmatrix, sector: str) -> sp.csr_matrix:
    """Project a 2^N x 2^N operator onto the chosen sector"""
    sector = normalize_sector(sector)
    matrix = sp.csr_matrix(matrix)
    if sector == "full":
        return matrix
    num_qubits = int(matrix.shape[0]).bit_length() - 1
    isometry = flip_symmetric_isometry(num_qubits)
    return (isometry.T @ matrix @ isometry).tocsr()


def dense_levels(matrix: Matrix, k: int) -> np.ndarray:
    """k smallest eigenvalues by full dense diagonalization"""
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    return np.linalg.eigvalsh(dense)[:k]


def _is_diagonal(matrix: sp.spmatrix) -> bool:
    coo = matrix.tocoo()
    stored = coo.data != 0
    return bool(np.all(coo.row[stored] == coo.col[stored]))


def _as_real(matrix: Matrix) -> Matrix:
    if np.iscomplexobj(matrix) and not np.any(matrix.imag if not sp.issparse(matrix) else matrix.data.imag):
        return matrix.real
    return matrix


def _gershgorin_floor(matrix: sp.spmatrix) -> float:
    """Lower bound on the spectrum from Gershgorin discs"""
    diagonal = matrix.diagonal().real
    radii = np.asarray(abs(matrix).sum(axis=1)).ravel() - np.abs(diagonal)
    return float(np.min(diagonal - radii))


def _subset_eigh(matrix: Matrix, k: int, vectors: bool = False):
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    return linalg.eigh(dense, subset_by_index=[0, k - 1], eigvals_only=not vectors)


def _shift_invert(matrix: sp.spmatrix, k: int, config: Dict[str, Any], s: float = None,
                  vectors: bool = False):
    # the shift sits strictly below the spectrum, so the levels nearest to it are the lowest
    sigma = _gershgorin_floor(matrix) - config["shift_margin"]
    rng = np.random.default_rng(config["lanczos_seed"])
    v0 = rng.standard_normal(matrix.shape[0]).astype(matrix.dtype)
    try:
        result = eigsh(
            matrix.tocsc(),
            k=k,
            sigma=sigma,
            which="LM",
            v0=v0,
            tol=config["eigsh_tol"],
            maxiter=config["eigsh_maxiter"],
            return_eigenvectors=vectors,
        )
    except ArpackNoConvergence as e:
        raise EigensolverFailure(
            f"Lanczos converged on {len(e.eigenvalues)} of {k} levels", s
        )
    except (ArpackError, RuntimeError) as e:
        raise EigensolverFailure(f"Lanczos failed: {e}", s)
    if not vectors:
        return np.sort(np.real(result))
    values, basis = result
    order = np.argsort(np.real(values))
    return np.real(values[order]), basis[:, order]


def _lowest(matrix: Matrix, k: int, config: Dict[str, Any], s: float = None, vectors: bool = False):
    """k lowest eigenpairs of a non-diagonal operator, ascending"""
    matrix = _as_real(matrix)
    if not sp.issparse(matrix) or matrix.shape[0] <= config["subset_max_dimension"] or k >= matrix.shape[0] - 1:
        return _subset_eigh(matrix, k, vectors)
    return _shift_invert(matrix, k, config, s, vectors)


def sector_levels(matrix: Matrix, k: int, config: Dict[str, Any] = None, s: float = None) -> np.ndarray:
    """
    k smallest eigenvalues of an already restricted operator, ascending

    Full dense diagonalization up to ``dense_max_dimension``; a diagonal
    operator is read off directly; above that a partial dense solve up to
    ``subset_max_dimension`` and shift-invert Lanczos beyond it.
    """
    config = config or SPECTRAL_CONFIG
    dimension = matrix.shape[0]
    if k < 1 or k > dimension:
        raise DimensionMismatch(f"cannot take {k} levels of a {dimension}-dimensional space")
    if not sp.issparse(matrix) or dimension <= config["dense_max_dimension"]:
        return dense_levels(matrix, k)
    if _is_diagonal(matrix):
        return np.sort(matrix.diagonal().real)[:k]
    return np.asarray(_lowest(matrix, k, config, s), dtype=float)


def ground_eigenspace(matrix: Matrix, config: Dict[str, Any] = None, s: float = None) -> Tuple[float, np.ndarray]:
    """
    Lowest eigenvalue and an orthonormal basis of its eigenspace

    Returns:
        (energy, vectors) with one basis vector per column
    """
    config = config or SPECTRAL_CONFIG
    atol = config["degeneracy_atol"]
    dimension = matrix.shape[0]

    if not sp.issparse(matrix) or dimension <= config["dense_max_dimension"]:
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
        values, vectors = np.linalg.eigh(dense)
        keep = values <= values[0] + atol
        return float(values[0]), vectors[:, keep]

    if _is_diagonal(matrix):
        diagonal = matrix.diagonal().real
        minimum = diagonal.min()
        indices = np.flatnonzero(diagonal <= minimum + atol)
        vectors = np.zeros((dimension, len(indices)), dtype=complex)
        vectors[indices, np.arange(len(indices))] = 1.0
        return float(minimum), vectors

    k = 2
    while True:
        values, vectors = _lowest(matrix, k, config, s, vectors=True)
        keep = values <= values[0] + atol
        if not keep.all() or k >= dimension - 2:
            return float(values[0]), vectors[:, keep]
        k = min(2 * k, dimension - 2)


def log_linear_fit(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """
    Least-squares line y = slope * x + intercept

    Returns:
        (slope, intercept, root-mean-square residual)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), residual


@dataclass(frozen=True, eq=False)
class GapProfile:
    """
    Ground level e0 and tracked excited level e1 of H(s) over an increasing s-grid

    ``level`` is the index of the level stored in e1; it is 1 unless the final
    ground space is degenerate within the sector.
    """

    num_qubits: int
    sector: str
    s_grid: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    level: int = 1

    def __post_init__(self):
        s_grid = np.asarray(self.s_grid, dtype=float)
        e0 = np.asarray(self.e0, dtype=float)
        e1 = np.asarray(self.e1, dtype=float)
        if not (s_grid.shape == e0.shape == e1.shape) or s_grid.size == 0:
            raise DimensionMismatch("s_grid, e0 and e1 must be nonempty and of equal length")
        if np.any(np.diff(s_grid) <= 0) or s_grid[0] < 0.0 or s_grid[-1] > 1.0:
            raise InvalidSchedule("s_grid must be strictly increasing within [0, 1]")
        if np.any(e1 < e0 - 1e-10):
            raise EigensolverFailure("first excited level below ground level")
        object.__setattr__(self, "sector", normalize_sector(self.sector))
        object.__setattr__(self, "s_grid", s_grid)
        object.__setattr__(self, "e0", e0)
        object.__setattr__(self, "e1", e1)

    @property
    def gaps(self) -> np.ndarray:
        return self.e1 - self.e0

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())

    @property
    def argmin_s(self) -> float:
        return float(self.s_grid[int(np.argmin(self.gaps))])

    def to_frame(self) -> pd.DataFrame:
        """
        Plot-ready table with columns s, e0, e1, gap

        A trailing level column is added when e1 holds a level other than E1.
        """
        frame = pd.DataFrame({"s": self.s_grid, "e0": self.e0, "e1": self.e1, "gap": self.gaps})
        if self.level != 1:
            frame["level"] = self.level
        return frame

    def summary(self) -> Dict[str, Any]:
        return {
            "N": self.num_qubits,
            "sector": self.sector,
            "min_gap": self.min_gap,
            "argmin_s": self.argmin_s,
            "grid_points": int(self.s_grid.size),
            "level": self.level,
        }


@dataclass(frozen=True)
class GapScalingFit:
    """
    Minimum-gap scaling across N

    Exponential model: log(median gap) = log(amplitude) - c N
    Power model: log(median gap) = const - power_exponent log N
    """

    samples: Tuple[Tuple[int, float], ...]
    c: float
    log_residual: float
    amplitude: float
    power_exponent: float
    power_residual: float

    @property
    def preferred_model(self) -> str:
        return "exponential" if self.log_residual < self.power_residual else "power"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "samples": [[n, median] for n, median in self.samples],
            "c": self.c,
            "log_residual": self.log_residual,
            "amplitude": self.amplitude,
            "power_exponent": self.power_exponent,
            "power_residual": self.power_residual,
            "preferred_model": self.preferred_model,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GapScalingFit":
        return cls(
            samples=tuple((int(n), float(median)) for n, median in data["samples"]),
            c=float(data["c"]),
            log_residual=float(data["log_residual"]),
            amplitude=float(data["amplitude"]),
            power_exponent=float(data["power_exponent"]),
            power_residual=float(data["power_residual"]),
        )


def _levels_at(trans: Matrix, ising: Matrix, config: Dict[str, Any], k: int, s: float) -> np.ndarray:
    if s == 0.0:
        matrix = trans
    elif s == 1.0:
        matrix = ising
    else:
        matrix = (1.0 - s) * trans + s * ising
    if sp.issparse(matrix):
        matrix = matrix.tocsr()
    return sector_levels(matrix, k, config, s)


class SpectralAnalyzer:
    """Instantaneous spectrum of H(s) and minimum-gap statistics"""

    def __init__(self, jobs: int = 1, **overrides):
        """
        Initialize the analyzer

        Args:
            jobs: Worker processes for independent grid points
            overrides: Replacement values for SPECTRAL_CONFIG keys
        """
        self.config = {**SPECTRAL_CONFIG, **overrides}
        self.jobs = jobs

    def lowest_levels(self, h: HermitianOperator, k: int, sector: str = None) -> np.ndarray:
        """
        k smallest eigenvalues of h restricted to a sector

        Args:
            h: Operator on N qubits
            k: Number of levels
            sector: "full" or "flip_symmetric" (default from config)

        Returns:
            Ascending eigenvalues

        Raises:
            EigensolverFailure: if the Lanczos iteration does not converge
        """
        sector = normalize_sector(sector or self.config["default_sector"])
        return sector_levels(restrict_to_sector(h.matrix, sector), k, self.config)

    def restricted_pair(self, instance: PartitionInstance, sector: str) -> Tuple[Matrix, Matrix]:
        """H_trans and H_Ising projected onto a sector; dense when small enough"""
        pair = HamiltonianPair(instance)
        trans = restrict_to_sector(pair.h_trans.matrix, sector)
        ising = restrict_to_sector(pair.h_ising.matrix, sector)
        if trans.shape[0] <= self.config["dense_max_dimension"]:
            return trans.toarray(), ising.toarray()
        return trans, ising

    def tracked_level(self, instance: PartitionInstance, sector: str) -> int:
        """
        Index of the level whose distance to E0 is reported as the gap

        The full sector reports E1. In the flip-symmetric sector the final
        ground space has one state per mirror pair of optimal assignments;
        when several pairs exist, the gap is taken to the first level above
        that space at s = 1.
        """
        if normalize_sector(sector) == "full":
            return 1
        diagonal = ising_diagonal(instance)
        optimal = int(np.count_nonzero(diagonal == diagonal.min()))
        return max(1, optimal // 2)

    def _levels_on(self, trans: Matrix, ising: Matrix, level: int, s_values: Iterable[float]) -> np.ndarray:
        s_values = list(s_values)
        if not s_values:
            return np.empty((0, 2))
        task = partial(_levels_at, trans, ising, self.config, level + 1)
        levels = np.array(parallel_map(task, s_values, self.jobs))
        return levels[:, [0, level]]

    def gap_profile(self, instance: PartitionInstance, grid_size: int = None,
                    sector: str = None, refine: bool = None) -> GapProfile:
        """
        Two lowest levels over a uniform s-grid including both endpoints

        With refinement, s* +- h/2 are added around the coarse minimum (h the
        grid spacing), then one point at s* +- h/4 on the side whose new gap
        is lower. Points outside [0, 1] are skipped.
        """
        grid_size = self.config["grid_size"] if grid_size is None else int(grid_size)
        sector = normalize_sector(sector or self.config["default_sector"])
        refine = self.config["refine"] if refine is None else refine
        if grid_size < 3:
            raise InvalidSchedule(f"grid_size must be at least 3, got {grid_size}")

        trans, ising = self.restricted_pair(instance, sector)
        level = self.tracked_level(instance, sector)
        s_grid = np.linspace(0.0, 1.0, grid_size)
        levels = self._levels_on(trans, ising, level, s_grid)

        if refine:
            spacing = 1.0 / (grid_size - 1)
            center = float(s_grid[int(np.argmin(levels[:, 1] - levels[:, 0]))])
            halves = [s for s in (center - spacing / 2, center + spacing / 2) if 0.0 < s < 1.0]
            half_levels = self._levels_on(trans, ising, level, halves)
            half_gaps = half_levels[:, 1] - half_levels[:, 0]
            side = 1.0 if halves[int(np.argmin(half_gaps))] > center else -1.0
            quarter = [center + side * spacing / 4]
            quarter_levels = self._levels_on(trans, ising, level, quarter)

            s_grid = np.concatenate([s_grid, halves, quarter])
            levels = np.vstack([levels, half_levels, quarter_levels])
            order = np.argsort(s_grid)
            s_grid, levels = s_grid[order], levels[order]

        profile = GapProfile(instance.num_qubits, sector, s_grid, levels[:, 0], levels[:, 1], level)
        logger.info(
            f"Gap profile N={instance.num_qubits} sector={sector}: "
            f"min gap {profile.min_gap:.6g} at s={profile.argmin_s:.4f}"
        )
        return profile

    def fit_gap_scaling(self, profiles: Sequence[Tuple[int, Sequence[float]]]) -> GapScalingFit:
        """
        Fit median minimum gap per N to exponential and power-law decay

        Args:
            profiles: (N, minimum gaps over instances) pairs; repeated N are merged

        Raises:
            InsufficientData: fewer distinct N or instances per N than configured
            DegenerateGap: a nonpositive minimum gap (use the flip-symmetric sector)
        """
        grouped: Dict[int, List[float]] = {}
        for num_qubits, gaps in profiles:
            grouped.setdefault(int(num_qubits), []).extend(float(g) for g in gaps)

        if len(grouped) < self.config["fit_min_distinct_n"]:
            raise InsufficientData(
                f"need gaps for at least {self.config['fit_min_distinct_n']} distinct N, got {len(grouped)}"
            )
        for num_qubits, gaps in grouped.items():
            if len(gaps) < self.config["fit_min_instances"]:
                raise InsufficientData(
                    f"N={num_qubits} has {len(gaps)} instances, need {self.config['fit_min_instances']}"
                )
            if min(gaps) <= 0.0:
                raise DegenerateGap(
                    f"nonpositive minimum gap at N={num_qubits}; the full sector is degenerate at s=1"
                )

        sizes = sorted(grouped)
        medians = [float(np.median(grouped[n])) for n in sizes]
        log_medians = np.log(medians)
        slope, intercept, residual = log_linear_fit(sizes, log_medians)
        power_slope, _, power_residual = log_linear_fit(np.log(sizes), log_medians)

        fit = GapScalingFit(
            samples=tuple(zip(sizes, medians)),
            c=-slope,
            log_residual=residual,
            amplitude=math.exp(intercept),
            power_exponent=-power_slope,
            power_residual=power_residual,
        )
        logger.info(
            f"Gap scaling over N={sizes}: c={fit.c:.4f} (residual {fit.log_residual:.3g}), "
            f"power {fit.power_exponent:.4f} (residual {fit.power_residual:.3g})"
        )
        return fit
