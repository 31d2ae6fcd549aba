"""
Configuration settings for the adiabatic morphism-cost laboratory
Contains numerical tolerances, solver settings, experiment defaults and logging layout
"""

import os
from typing import Dict, Any

from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    return float(value) if value not in (None, "") else default


# Qubit algebra
QUBIT_CONFIG: Dict[str, Any] = {
    "max_qubits": _env_int("QLAB_MAX_QUBITS", 24),  # 2^24 complex doubles = 256 MiB
    "norm_atol": 1e-12,
    "factor_atol": 1e-10,
    "hermitian_imag_atol": 1e-10,
}

# Partition instances
INSTANCE_CONFIG: Dict[str, Any] = {
    "min_qubits": 2,
    "distributions": ("uniform-int", "uniform-real"),
    "real_zero_rtol": 1e-9,
}

# Spectral analysis
SPECTRAL_CONFIG: Dict[str, Any] = {
    "default_sector": "flip_symmetric",
    "grid_size": 64,
    "refine": True,
    "dense_max_dimension": 1024,  # 2^10
    "subset_max_dimension": 4096,  # partial dense solve below this, shift-invert above
    "shift_margin": 1.0,
    "eigsh_tol": 1e-12,
    "eigsh_maxiter": 100000,
    "lanczos_seed": 20240611,
    "degeneracy_atol": 1e-9,
    "fit_min_distinct_n": 4,
    "fit_min_instances": 5,
}

# Adiabatic evolution
EVOLUTION_CONFIG: Dict[str, Any] = {
    "max_step_angle": 0.5,
    "target_step_angle": 0.1,
    "checkpoints": 16,
    "dense_max_qubits": 8,
    "eig_batch": 2048,
    "compose_max_dimension": 32,  # sector dimension up to which step unitaries are multiplied out
    "valid_norm_drift": 1e-6,
    "scan_floor": 1.0,
    "scan_cap": _env_float("QLAB_SCAN_CAP", 1e6),
    "bisection_rtol": 0.05,
}

# Tomography
TOMOGRAPHY_CONFIG: Dict[str, Any] = {
    "modes": ("full", "product"),
    "bloch_clip_tolerance": 0.05,
    "default_shots": 10000,
}

# Morphism ledger
LEDGER_CONFIG: Dict[str, Any] = {
    "schema_version": "1",
    "instances": 10,
    "target": 0.99,
    "rejection_tries": 10000,
    "tie_rtol": 0.10,
    "min_distinct_n": 4,
    "min_instances": 5,
    "report_assignment_cap": 64,
    "distribution": "uniform-int",
    "max_weight": 10,  # integer weights drawn from [1, max_weight]
}

# Command line
CLI_CONFIG: Dict[str, Any] = {
    "jobs": _env_int("QLAB_JOBS", os.cpu_count() or 1),
    "default_format": {
        "gap-scan": "csv",
        "evolve": "json",
        "tomo": "json",
        "partition": "json",
        "ledger": "json",
    },
}

# File Paths
PATHS = {
    "outputs": "outputs/",
}

# Logging Configuration
LOGGING_CONFIG = {
    "level": os.getenv("QLAB_LOG_LEVEL", "INFO"),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "file": os.getenv("QLAB_LOG_FILE") or None,  # e.g. logs/lab.log
    "max_bytes": 10485760,  # 10MB
    "backup_count": 5,
}
