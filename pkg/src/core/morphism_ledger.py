"""
MorphismLedger: per-N costs of the direct morphism (tomography), the inverse
morphism (measurement plus verification) and the adiabatic evolution time

Fits the median threshold time against N with an exponential and a power-law
model and records which one describes the tested range better. The verdict is
a statement about the tested scale only.
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
from pathlib import Path
import json
import logging

import numpy as np
import pandas as pd

from src.config.settings import LEDGER_CONFIG, SPECTRAL_CONFIG
from src.core.adiabatic_engine import AdiabaticEngine, criterion_ratio
from src.core.exceptions import (
    DegenerateGap,
    LedgerDataError,
    ReportFormatError,
    RejectionSamplingExhausted,
    ScanCapExceeded,
)
from src.core.hamiltonian_builder import PartitionInstance, ScheduleSpec, initial_state
from src.core.instance_io import generate_instance
from src.core.parallel import parallel_map
from src.core.qubit_algebra import basis_state, fidelity
from src.core.reality_oracle import RealityOracle, verification_cost
from src.core.report_io import atomic_write_text, dumps_canonical, with_metadata
from src.core.spectral_analyzer import GapScalingFit, SpectralAnalyzer, log_linear_fit
from src.core.tomography_lab import budget

logger = logging.getLogger(__name__)

COST_LABELS = ("f_full", "f_product", "g", "T_evolution")
VERDICTS = ("consistent_with_poly", "inconsistent_with_poly", "inconclusive")
REPORT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class MorphismCost:
    """One cost datum: an operation count for f and g, a threshold time for the evolution"""

    label: str
    num_qubits: int
    operation_count: Optional[int] = None
    threshold_time: Optional[float] = None
    capped: bool = False

    def __post_init__(self):
        if self.label not in COST_LABELS:
            raise LedgerDataError(f"unknown cost label {self.label!r}")
        timed = self.label == "T_evolution"
        if timed != (self.threshold_time is not None) or timed == (self.operation_count is not None):
            raise LedgerDataError(
                f"{self.label} cost must carry exactly "
                f"{'threshold_time' if timed else 'operation_count'}"
            )
        if self.capped and not timed:
            raise LedgerDataError(f"only evolution costs can be capped, got {self.label}")

    @property
    def value(self) -> Union[int, float]:
        return self.threshold_time if self.label == "T_evolution" else self.operation_count

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "N": self.num_qubits,
            "operation_count": self.operation_count,
            "threshold_time": self.threshold_time,
            "capped": self.capped,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MorphismCost":
        return cls(
            label=data["label"],
            num_qubits=int(data["N"]),
            operation_count=None if data["operation_count"] is None else int(data["operation_count"]),
            threshold_time=None if data["threshold_time"] is None else float(data["threshold_time"]),
            capped=bool(data["capped"]),
        )


@dataclass(frozen=True)
class TimeScalingFit:
    """Exponential (log T vs N) and power-law (log T vs log N) fits of median threshold times"""

    samples: Tuple[Tuple[int, float], ...]
    exponential_rate: float
    exponential_residual: float
    power_exponent: float
    power_residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "samples": [[n, median] for n, median in self.samples],
            "exponential_rate": self.exponential_rate,
            "exponential_residual": self.exponential_residual,
            "power_exponent": self.power_exponent,
            "power_residual": self.power_residual,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TimeScalingFit":
        return cls(
            samples=tuple((int(n), float(median)) for n, median in data["samples"]),
            exponential_rate=float(data["exponential_rate"]),
            exponential_residual=float(data["exponential_residual"]),
            power_exponent=float(data["power_exponent"]),
            power_residual=float(data["power_residual"]),
        )


def decide_verdict(fit: TimeScalingFit, tie_rtol: float = None) -> str:
    """
    Compare residuals: within tie_rtol of each other is inconclusive,
    otherwise the model with the lower residual wins
    """
    tie_rtol = LEDGER_CONFIG["tie_rtol"] if tie_rtol is None else tie_rtol
    exponential, power = fit.exponential_residual, fit.power_residual
    if abs(exponential - power) <= tie_rtol * max(exponential, power):
        return "inconclusive"
    return "inconsistent_with_poly" if exponential < power else "consistent_with_poly"


@dataclass(frozen=True)
class LedgerReport:
    """
    Cost records, scaling fits, the verdict and everything needed to reproduce them

    criterion holds the per-N median of the adiabatic criterion T* x (minimum gap)^2.
    """

    costs: Tuple[MorphismCost, ...]
    gap_fit: Optional[GapScalingFit]
    time_fit: TimeScalingFit
    verdict: str
    provenance: Dict[str, Any] = field(default_factory=dict)
    criterion: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise LedgerDataError(f"unknown verdict {self.verdict!r}")

    @property
    def cap_events(self) -> List[MorphismCost]:
        return [cost for cost in self.costs if cost.capped]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "costs": [cost.to_dict() for cost in self.costs],
            "gap_fit": None if self.gap_fit is None else self.gap_fit.to_dict(),
            "time_fit": self.time_fit.to_dict(),
            "verdict": self.verdict,
            "cap_events": [cost.to_dict() for cost in self.cap_events],
            "provenance": self.provenance,
            "criterion_ratio": [[n, ratio] for n, ratio in self.criterion],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LedgerReport":
        try:
            if str(data.get("schema_version", LEDGER_CONFIG["schema_version"])) != LEDGER_CONFIG["schema_version"]:
                raise ReportFormatError(f"unsupported schema_version {data['schema_version']!r}")
            return cls(
                costs=tuple(MorphismCost.from_dict(c) for c in data["costs"]),
                gap_fit=None if data["gap_fit"] is None else GapScalingFit.from_dict(data["gap_fit"]),
                time_fit=TimeScalingFit.from_dict(data["time_fit"]),
                verdict=data["verdict"],
                provenance=dict(data.get("provenance", {})),
                criterion=tuple((int(n), float(r)) for n, r in data.get("criterion_ratio", [])),
            )
        except (KeyError, TypeError, ValueError, LedgerDataError) as e:
            raise ReportFormatError(f"malformed ledger report: {e}")


@dataclass(frozen=True)
class IdentityComparison:
    """
    Two ways of doing nothing to an evolved state, side by side

    measure: computational-basis measurement, classical verification and
    re-preparation of the measured product state (cost T_g + T_f product).
    reverse: the evolution followed by its time reverse (cost 2 x steps).
    """

    num_qubits: int
    assignment: str
    verified: bool
    measure_fidelity: float
    measure_cost: int
    reverse_fidelity: float
    reverse_cost: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.num_qubits,
            "assignment": self.assignment,
            "verified": self.verified,
            "measure_fidelity": self.measure_fidelity,
            "measure_cost": self.measure_cost,
            "reverse_fidelity": self.reverse_fidelity,
            "reverse_cost": self.reverse_cost,
        }


def _threshold_task(settings: Tuple[Dict[str, Any], float, Optional[float]],
                    instance: PartitionInstance) -> Tuple[float, bool]:
    config, target, cap = settings
    engine = AdiabaticEngine(**config)
    try:
        result = engine.find_threshold_time(instance, target, cap=cap)
        return result.time, False
    except ScanCapExceeded as e:
        logger.warning(f"Threshold beyond cap {e.cap:g} for weights {instance.weights}")
        return e.cap, True


class MorphismLedger:
    """Collects T_f, T_g and T_evolution across N and assembles the report"""

    def __init__(self, jobs: int = 1, engine: AdiabaticEngine = None,
                 oracle: RealityOracle = None, analyzer: SpectralAnalyzer = None, **overrides):
        self.config = {**LEDGER_CONFIG, **overrides}
        self.jobs = jobs
        self.engine = engine or AdiabaticEngine()
        self.oracle = oracle or RealityOracle()
        self.analyzer = analyzer or SpectralAnalyzer(jobs=1)

    def measure_f(self, num_qubits: int, mode: str) -> MorphismCost:
        """Tomography budget as a cost record"""
        return MorphismCost(f"f_{mode}", int(num_qubits), operation_count=budget(mode, num_qubits).operation_count)

    def measure_g(self, num_qubits: int) -> MorphismCost:
        """Verification count N + 1 as a cost record"""
        if num_qubits < 2:
            raise LedgerDataError(f"verification needs N >= 2, got {num_qubits}")
        return MorphismCost("g", int(num_qubits), operation_count=verification_cost(num_qubits))

    def perfect_instances(self, num_qubits: int, count: int, seed: int,
                          max_weight: Optional[int] = None) -> List[PartitionInstance]:
        """
        Seeded instances that admit a perfect partition, by rejection sampling

        Raises:
            RejectionSamplingExhausted: if one instance needs more than the configured tries
        """
        max_weight = self.config["max_weight"] if max_weight is None else max_weight
        tries = self.config["rejection_tries"]
        instances = []
        for index in range(count):
            for attempt in range(tries):
                child = int(np.random.SeedSequence([seed, num_qubits, index, attempt]).generate_state(1)[0])
                instance = generate_instance(self.config["distribution"], num_qubits, child, max_weight)
                if self.oracle.brute_force(instance).is_perfect:
                    instances.append(instance)
                    break
            else:
                raise RejectionSamplingExhausted(
                    f"no perfect partition in {tries} draws at N={num_qubits} "
                    f"({self.config['distribution']}, max_weight={max_weight})"
                )
        return instances

    def evolution_costs(self, instances: Sequence[PartitionInstance], target: float,
                        cap: Optional[float] = None) -> List[MorphismCost]:
        """Threshold time of each instance; scans passing the cap are kept with capped=True"""
        task_settings = (self.engine.config, target, cap)
        outcomes = parallel_map(partial(_threshold_task, task_settings), list(instances), self.jobs)
        return [
            MorphismCost("T_evolution", instance.num_qubits, threshold_time=float(time), capped=capped)
            for instance, (time, capped) in zip(instances, outcomes)
        ]

    def measure_evolution(self, num_qubits: int, instances: int, target: float, seed: int,
                          max_weight: Optional[int] = None, cap: Optional[float] = None) -> List[MorphismCost]:
        """
        Threshold times over a seeded perfect-partition ensemble

        Raises:
            LedgerDataError: fewer instances than the configured minimum
            RejectionSamplingExhausted: if perfect instances are too rare
        """
        if instances < self.config["min_instances"]:
            raise LedgerDataError(f"need at least {self.config['min_instances']} instances, got {instances}")
        ensemble = self.perfect_instances(num_qubits, instances, seed, max_weight)
        return self.evolution_costs(ensemble, target, cap)

    def assemble(self, costs: Sequence[MorphismCost], gap_fit: Optional[GapScalingFit],
                 provenance: Dict[str, Any] = None,
                 criterion: Sequence[Tuple[int, float]] = ()) -> LedgerReport:
        """
        Fit median threshold times and decide the verdict

        Capped times enter the medians at the cap value, a lower bound.

        Raises:
            LedgerDataError: fewer distinct N among evolution costs than configured
        """
        costs = tuple(costs)
        evolution = [cost for cost in costs if cost.label == "T_evolution"]
        frame = pd.DataFrame([cost.to_dict() for cost in evolution], columns=["N", "threshold_time"])
        medians = frame.groupby("N")["threshold_time"].median().sort_index()
        if len(medians) < self.config["min_distinct_n"]:
            raise LedgerDataError(
                f"insufficient data: evolution costs for {len(medians)} distinct N, "
                f"need {self.config['min_distinct_n']}"
            )
        if (medians <= 0).any():
            raise LedgerDataError("threshold times must be positive")

        sizes = medians.index.to_numpy(dtype=float)
        log_medians = np.log(medians.to_numpy(dtype=float))
        rate, _, exponential_residual = log_linear_fit(sizes, log_medians)
        exponent, _, power_residual = log_linear_fit(np.log(sizes), log_medians)
        time_fit = TimeScalingFit(
            samples=tuple((int(n), float(m)) for n, m in medians.items()),
            exponential_rate=rate,
            exponential_residual=exponential_residual,
            power_exponent=exponent,
            power_residual=power_residual,
        )
        verdict = decide_verdict(time_fit, self.config["tie_rtol"])
        report = LedgerReport(
            costs, gap_fit, time_fit, verdict, dict(provenance or {}), tuple((int(n), float(r)) for n, r in criterion)
        )
        logger.info(
            f"Ledger verdict {verdict}: exponential residual {exponential_residual:.3g}, "
            f"power residual {power_residual:.3g}, {len(report.cap_events)} cap events"
        )
        return report

    def emit(self, report: LedgerReport, fmt: str, path: Union[str, Path],
             run_config: Dict[str, Any] = None) -> Path:
        """
        Write the report atomically as JSON (full structure) or CSV (flattened costs)

        Raises:
            ReportFormatError: for an unknown format; nothing is written
        """
        if fmt == "json":
            text = dumps_canonical(with_metadata(report.to_dict(), run_config))
        elif fmt == "csv":
            rows = [
                {
                    "label": cost.label,
                    "N": cost.num_qubits,
                    "value": cost.value,
                    "capped": str(cost.capped).lower(),
                    "schema_version": self.config["schema_version"],
                }
                for cost in report.costs
            ]
            columns = ["label", "N", "value", "capped", "schema_version"]
            text = pd.DataFrame(rows, columns=columns, dtype=object).to_csv(index=False, lineterminator="\n")
        else:
            raise ReportFormatError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
        written = atomic_write_text(path, text)
        logger.info(f"Ledger report written to {written}")
        return written

    def identity_comparison(self, instance: PartitionInstance, schedule: ScheduleSpec,
                            seed: int) -> IdentityComparison:
        """Measure-verify-reprepare against evolve-then-reverse on one evolved state"""
        forward = self.engine.propagate(instance, schedule, seed=seed, record_trace=False)
        num_qubits = instance.num_qubits

        assignment = self.oracle.measure_basis(forward.final_state, seed)
        verified = self.oracle.verify_zero_ground(assignment, instance)
        reprepared = basis_state(num_qubits, assignment.to_index())
        measure_cost = self.oracle.last_verification_cost + budget("product", num_qubits).operation_count

        returned = self.engine.reverse_propagate(instance, schedule, forward.final_state)
        return IdentityComparison(
            num_qubits=num_qubits,
            assignment=str(assignment),
            verified=verified,
            measure_fidelity=fidelity(reprepared, forward.final_state),
            measure_cost=measure_cost,
            reverse_fidelity=fidelity(returned, initial_state(num_qubits)),
            reverse_cost=2 * schedule.num_steps,
        )

    def run_pipeline(self, n_values: Sequence[int], instances: int, target: float, seed: int,
                     max_weight: Optional[int] = None, sector: str = None, grid_size: int = None,
                     refine: bool = None, cap: Optional[float] = None) -> LedgerReport:
        """
        Full experiment: f, g and evolution costs plus minimum gaps per N, then assembly

        Raises:
            LedgerDataError: too few distinct N or instances per N, checked before any work
        """
        if len(set(n_values)) < self.config["min_distinct_n"]:
            raise LedgerDataError(
                f"insufficient data: {len(set(n_values))} distinct N requested, "
                f"need {self.config['min_distinct_n']}"
            )
        if instances < self.config["min_instances"]:
            raise LedgerDataError(f"need at least {self.config['min_instances']} instances, got {instances}")
        max_weight = self.config["max_weight"] if max_weight is None else max_weight
        sector = sector or SPECTRAL_CONFIG["default_sector"]
        costs: List[MorphismCost] = []
        gaps: List[Tuple[int, List[float]]] = []
        ratios: Dict[int, List[float]] = {}

        for num_qubits in n_values:
            ensemble = self.perfect_instances(num_qubits, instances, seed, max_weight)
            costs.append(self.measure_f(num_qubits, "full"))
            costs.append(self.measure_f(num_qubits, "product"))
            costs.append(self.measure_g(num_qubits))
            evolution = self.evolution_costs(ensemble, target, cap)
            costs.extend(evolution)
            profiles = [self.analyzer.gap_profile(i, grid_size, sector, refine) for i in ensemble]
            gaps.append((num_qubits, [p.min_gap for p in profiles]))
            ratios.setdefault(num_qubits, []).extend(
                criterion_ratio(cost.threshold_time, profile.min_gap)
                for cost, profile in zip(evolution, profiles)
                if profile.min_gap > 0
            )
            logger.info(f"Ledger N={num_qubits}: {instances} instances measured")

        try:
            gap_fit = self.analyzer.fit_gap_scaling(gaps)
        except DegenerateGap as e:
            logger.warning(f"Gap fit skipped: {e.message}")
            gap_fit = None

        provenance = {
            "seed": seed,
            "n_values": list(n_values),
            "instances": instances,
            "target": target,
            "distribution": self.config["distribution"],
            "max_weight": max_weight,
            "sector": sector,
            "grid_size": grid_size if grid_size is not None else self.analyzer.config["grid_size"],
            "refine": refine if refine is not None else self.analyzer.config["refine"],
            "scan_floor": self.engine.config["scan_floor"],
            "scan_cap": cap if cap is not None else self.engine.config["scan_cap"],
            "bisection_rtol": self.engine.config["bisection_rtol"],
            "target_step_angle": self.engine.config["target_step_angle"],
            "integrator": "midpoint piecewise-constant exponential",
            "protocol": "residual comparison of exponential and power-law fits to per-N medians at tested N",
        }
        criterion = [(n, float(np.median(values))) for n, values in sorted(ratios.items()) if values]
        return self.assemble(costs, gap_fit, provenance, criterion)


def load_report(path: Union[str, Path]) -> LedgerReport:
    """Read a JSON ledger report written by emit"""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise ReportFormatError(f"cannot read report {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ReportFormatError(f"report {path} is not valid JSON: {e.msg}")
    if not isinstance(data, dict):
        raise ReportFormatError(f"report {path} must be a JSON object")
    return LedgerReport.from_dict(data)
