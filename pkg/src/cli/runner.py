"""
Command dispatch: each workflow reads its inputs, calls the owning module,
writes its output atomically and returns a one-line summary
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.cli.parser import RunConfig, parse_args
from src.config.logging_config import configure_logging
from src.config.settings import EVOLUTION_CONFIG, LEDGER_CONFIG
from src.core.adiabatic_engine import AdiabaticEngine
from src.core.exceptions import LabError, StateFileError
from src.core.hamiltonian_builder import PartitionInstance, ScheduleSpec
from src.core.instance_io import generate_instance, load_instance
from src.core.morphism_ledger import MorphismLedger
from src.core.qubit_algebra import QuantumState, fidelity, product_state
from src.core.reality_oracle import RealityOracle
from src.core.report_io import atomic_write_text, dumps_canonical, with_metadata
from src.core.spectral_analyzer import SpectralAnalyzer
from src.core.tomography_lab import (
    TomographyLab,
    bloch_vectors,
    budget,
    density_fidelity,
    min_eigenvalue,
)

logger = logging.getLogger(__name__)

_HALF = 1.0 / math.sqrt(2.0)

PRODUCT_FACTORS = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (_HALF, _HALF),
    "-": (_HALF, -_HALF),
    "+i": (_HALF, 1j * _HALF),
    "-i": (_HALF, -1j * _HALF),
}


def resolve_instance(config: RunConfig) -> PartitionInstance:
    if config.instance_path is not None:
        return load_instance(config.instance_path)
    return generate_instance(config.gen, config.n, config.seed, config.max_weight)


def _write_json(config: RunConfig, payload: Dict[str, Any], path: Optional[Path] = None) -> Path:
    document = with_metadata(payload, config.serialized())
    return atomic_write_text(path or Path(config.out), dumps_canonical(document))


def _sidecar(config: RunConfig) -> Path:
    out = Path(config.out)
    return out.with_name(f"{out.stem}.summary.json")


def _emit(config: RunConfig, payload: Dict[str, Any], frame: pd.DataFrame) -> None:
    """JSON writes the whole payload; CSV writes the table plus a JSON sidecar"""
    if config.format == "csv":
        atomic_write_text(config.out, frame.to_csv(index=False, lineterminator="\n"))
        _write_json(config, payload, _sidecar(config))
    else:
        _write_json(config, payload)


def run_gap_scan(config: RunConfig) -> str:
    """
    Gap profile of one instance

    Args:
        config: Validated gap-scan configuration

    Returns:
        One-line summary with the minimum gap, its location and the sector
    """
    instance = resolve_instance(config)
    analyzer = SpectralAnalyzer(jobs=config.jobs)
    profile = analyzer.gap_profile(instance, config.grid, config.sector, config.refine)
    frame = profile.to_frame()
    payload = profile.summary()
    if config.format == "json":
        payload["profile"] = frame.to_dict(orient="list")
    _emit(config, payload, frame)
    return f"min_gap={profile.min_gap:.6g} argmin_s={profile.argmin_s:.4f} sector={profile.sector}"


def run_evolve(config: RunConfig) -> str:
    """
    Propagate one instance, optionally with the identity comparison

    Args:
        config: Validated evolve configuration; --steps overrides the default step control

    Returns:
        One-line summary with success probability, norm drift and step count

    Raises:
        StepTooCoarse: if the requested steps are too few for the instance
    """
    instance = resolve_instance(config)
    engine = AdiabaticEngine()
    if config.steps is None:
        schedule = engine.default_schedule(instance, config.time)
    else:
        schedule = ScheduleSpec(config.time, config.steps)
    result = engine.propagate(instance, schedule, seed=config.seed)
    payload = result.to_dict()
    payload["instance"] = instance.to_dict()
    if config.identity:
        ledger = MorphismLedger(engine=engine)
        payload["identity"] = ledger.identity_comparison(instance, schedule, config.seed).to_dict()
    frame = pd.DataFrame({
        "s": [s for s, _ in result.ground_overlap_trace],
        "ground_overlap": [overlap for _, overlap in result.ground_overlap_trace],
        "flip_expectation": [value for _, value in result.flip_trace],
    })
    _emit(config, payload, frame)
    return (
        f"success_probability={result.success_probability:.6f} "
        f"norm_drift={result.norm_drift:.2e} steps={result.steps}"
    )


def _load_state(path: str) -> QuantumState:
    try:
        data = json.loads(Path(path).read_text())
        stored = data["final_state"]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise StateFileError(f"{path} has no usable final_state: {e}")
    state = QuantumState.from_dict(stored, norm_tolerance=EVOLUTION_CONFIG["valid_norm_drift"])
    amplitudes = np.asarray(state.amplitudes)
    return QuantumState(state.num_qubits, amplitudes / np.linalg.norm(amplitudes))


def _product_state(factors: str) -> QuantumState:
    return product_state([PRODUCT_FACTORS[token] for token in factors.split(",")])


def run_tomo(config: RunConfig) -> str:
    """
    Simulated tomography of an evolved state or a product-state shorthand

    Args:
        config: Validated tomo configuration

    Returns:
        One-line summary with mode, operation count and reconstruction fidelity

    Raises:
        StateFileError: if --state has no usable final_state
    """
    if config.state_path is not None:
        state = _load_state(config.state_path)
    else:
        state = _product_state(config.product)
    lab = TomographyLab(jobs=config.jobs)
    count = budget(config.mode, state.num_qubits).operation_count
    payload: Dict[str, Any] = {"mode": config.mode, "operation_count": count, "shots": config.shots}

    if config.mode == "product":
        triples = lab.measure_product_settings(state, config.shots, config.seed)
        records = [record for triple in triples for record in triple]
        reconstructed = lab.reconstruct_from_bloch(bloch_vectors(triples))
        score = fidelity(reconstructed, state)
        payload["reconstructed_state"] = reconstructed.to_dict()
    else:
        records = lab.measure_all_paulis(state, config.shots, config.seed)
        rho = lab.full_state_reconstruct({r.observable: r.estimate for r in records}, state.num_qubits)
        score = density_fidelity(rho, state)
        payload["min_eigenvalue"] = min_eigenvalue(rho)

    payload["records"] = [record.to_dict() for record in records]
    payload["fidelity"] = score
    _emit(config, payload, pd.DataFrame([record.to_dict() for record in records]))
    return f"mode={config.mode} operation_count={count} fidelity={score:.6f}"


def run_partition(config: RunConfig) -> str:
    """Exhaustive partition optimum; assignments are capped in the output"""
    instance = resolve_instance(config)
    solution = RealityOracle().brute_force(instance)
    payload = solution.to_dict(LEDGER_CONFIG["report_assignment_cap"])
    payload["instance"] = instance.to_dict()
    frame = pd.DataFrame({"assignment": [
        "".join("+" if y == 1 else "-" for y in values) for values in payload["assignments"]
    ]})
    _emit(config, payload, frame)
    return f"min_value={solution.min_value} perfect={str(solution.is_perfect).lower()}"


def run_ledger(config: RunConfig) -> str:
    """
    Full ledger pipeline over the configured N range

    Args:
        config: Validated ledger configuration

    Returns:
        One-line summary with the verdict and the number of capped scans
    """
    ledger = MorphismLedger(jobs=config.jobs)
    report = ledger.run_pipeline(
        config.n_values(),
        config.instances,
        config.target,
        config.seed,
        max_weight=config.max_weight,
        sector=config.sector,
        grid_size=config.grid,
        refine=config.refine,
        cap=config.time_cap,
    )
    ledger.emit(report, config.format, config.out, config.serialized())
    if config.format == "csv":
        summary = {"verdict": report.verdict, "cap_events": len(report.cap_events)}
        _write_json(config, summary, _sidecar(config))
    return f"verdict={report.verdict} cap_events={len(report.cap_events)}"


COMMANDS: Dict[str, Callable[[RunConfig], str]] = {
    "gap-scan": run_gap_scan,
    "evolve": run_evolve,
    "tomo": run_tomo,
    "partition": run_partition,
    "ledger": run_ledger,
}


def run(config: RunConfig) -> int:
    """
    Dispatch a validated configuration

    Returns:
        0 on success whatever the scientific outcome, 1 on any error
    """
    try:
        summary = COMMANDS[config.command](config)
    except LabError as e:
        logger.error(f"{config.command} failed: {type(e).__name__}: {e.message}")
        print(f"{e.module}: {type(e).__name__}: {e.message}", file=sys.stderr)
        return 1
    except OSError as e:
        logger.error(f"{config.command} failed writing output: {e}")
        print(f"cli: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    print(summary)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    config = parse_args(argv)
    configure_logging(config.log_level)
    return run(config)
