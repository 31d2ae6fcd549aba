"""
Command-line parsing into a validated, serializable RunConfig
"""

import argparse
from pathlib import Path
from typing import List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src import __version__
from src.config.settings import (
    CLI_CONFIG,
    EVOLUTION_CONFIG,
    INSTANCE_CONFIG,
    LEDGER_CONFIG,
    LOGGING_CONFIG,
    PATHS,
    SPECTRAL_CONFIG,
    TOMOGRAPHY_CONFIG,
)
from src.core.spectral_analyzer import SECTOR_ALIASES, normalize_sector

PRODUCT_TOKENS = ("0", "1", "+", "-", "+i", "-i")

# RunConfig fields whose flag differs from the field name
_FLAG_NAMES = {"instance_path": "instance", "state_path": "state", "refine": "no-refine"}

Command = Literal["gap-scan", "evolve", "tomo", "partition", "ledger"]


class RunConfig(BaseModel):
    """Everything a run depends on; embedded in every output"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    instance_path: Optional[str] = None
    gen: Optional[Literal["uniform-int", "uniform-real"]] = None
    n: Optional[int] = Field(default=None, ge=INSTANCE_CONFIG["min_qubits"])
    max_weight: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    out: str
    format: Literal["csv", "json"]
    jobs: int = Field(default=1, ge=1)
    log_level: str = "INFO"

    grid: int = Field(default=SPECTRAL_CONFIG["grid_size"], ge=3)
    sector: str = SPECTRAL_CONFIG["default_sector"]
    refine: bool = SPECTRAL_CONFIG["refine"]

    time: Optional[float] = Field(default=None, ge=0)
    steps: Optional[int] = Field(default=None, ge=1)
    identity: bool = False

    mode: Literal["full", "product"] = "product"
    shots: int = Field(default=TOMOGRAPHY_CONFIG["default_shots"], ge=1)
    state_path: Optional[str] = None
    product: Optional[str] = None

    n_min: int = Field(default=4, ge=INSTANCE_CONFIG["min_qubits"])
    n_max: int = Field(default=10, ge=INSTANCE_CONFIG["min_qubits"])
    n_step: int = Field(default=2, ge=1)
    instances: int = Field(default=LEDGER_CONFIG["instances"], ge=1)
    target: float = Field(default=LEDGER_CONFIG["target"], gt=0, lt=1)
    time_cap: Optional[float] = Field(default=None, gt=0)

    @field_validator("sector")
    @classmethod
    def _canonical_sector(cls, value: str) -> str:
        return normalize_sector(value)

    @field_validator("product")
    @classmethod
    def _product_tokens(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        tokens = [token.strip() for token in value.split(",")]
        bad = [token for token in tokens if token not in PRODUCT_TOKENS]
        if bad:
            raise ValueError(f"unknown single-qubit states {bad}; use {', '.join(PRODUCT_TOKENS)}")
        return ",".join(tokens)

    @model_validator(mode="after")
    def _sources(self) -> "RunConfig":
        if self.command in ("gap-scan", "evolve", "partition"):
            if (self.instance_path is None) == (self.gen is None):
                raise ValueError("--instance: give either --instance PATH or --gen with --n")
            if self.gen is not None and self.n is None:
                raise ValueError("--n: required with --gen")
            if self.instance_path is not None and not Path(self.instance_path).is_file():
                raise ValueError(f"--instance: cannot read {self.instance_path}")
        if self.command == "evolve" and self.time is None:
            raise ValueError("--time: required for evolve")
        if self.command == "tomo":
            if (self.state_path is None) == (self.product is None):
                raise ValueError("--state: give either --state PATH or --product LIST")
            if self.state_path is not None and not Path(self.state_path).is_file():
                raise ValueError(f"--state: cannot read {self.state_path}")
        if self.command == "ledger" and self.n_min > self.n_max:
            raise ValueError("--n-min: must not exceed --n-max")
        return self

    def n_values(self) -> List[int]:
        return list(range(self.n_min, self.n_max + 1, self.n_step))

    def serialized(self) -> dict:
        return self.model_dump(mode="json")


def _add_common(parser: argparse.ArgumentParser, command: str) -> None:
    default_format = CLI_CONFIG["default_format"][command]
    parser.add_argument("--seed", type=int, default=0, help="generator seed")
    parser.add_argument("--out", default=None,
                        help=f"output path (default {PATHS['outputs']}{command}.{default_format})")
    parser.add_argument("--format", choices=("csv", "json"), default=default_format, help="output format")
    parser.add_argument("--jobs", type=int, default=CLI_CONFIG["jobs"], help="worker processes")
    parser.add_argument("--log-level", dest="log_level", default=LOGGING_CONFIG["level"],
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="logging level")


def _add_instance(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", dest="instance_path", default=None,
                        help="instance file (JSON or one weight per line)")
    parser.add_argument("--gen", choices=INSTANCE_CONFIG["distributions"], default=None,
                        help="generate a seeded instance instead of reading one")
    parser.add_argument("--n", type=int, default=None, help="number of weights for --gen")
    parser.add_argument("--max-weight", dest="max_weight", type=int, default=None,
                        help="largest uniform-int weight (default 2^N)")


def _add_spectral(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sector", choices=sorted(SECTOR_ALIASES), default=SPECTRAL_CONFIG["default_sector"],
                        help="symmetry sector (sym = flip_symmetric)")
    parser.add_argument("--grid", type=int, default=SPECTRAL_CONFIG["grid_size"], help="uniform s-grid points")
    parser.add_argument("--no-refine", dest="refine", action="store_false",
                        help="skip the local refinement around the coarse minimum")


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subcommand per workflow"""
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="qlab",
        description="Adiabatic transverse-field to number-partitioning laboratory",
        formatter_class=formatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    gap_scan = commands.add_parser("gap-scan", help="two lowest levels of H(s) over s",
                                   formatter_class=formatter)
    _add_instance(gap_scan)
    _add_spectral(gap_scan)
    _add_common(gap_scan, "gap-scan")

    evolve = commands.add_parser("evolve", help="evolve the uniform superposition to s = 1",
                                 formatter_class=formatter)
    _add_instance(evolve)
    evolve.add_argument("--time", type=float, default=None, help="total evolution time T (0 = sudden quench)")
    evolve.add_argument("--steps", type=int, default=None,
                        help=f"integrator steps (default: ||H|| bound * dt = {EVOLUTION_CONFIG['target_step_angle']})")
    evolve.add_argument("--identity", action="store_true",
                        help="also compare measure-and-reprepare against evolve-and-reverse")
    _add_common(evolve, "evolve")

    tomo = commands.add_parser("tomo", help="simulated tomography of a state",
                               formatter_class=formatter)
    tomo.add_argument("--state", dest="state_path", default=None, help="evolve output file to read the state from")
    tomo.add_argument("--product", default=None,
                      help=f"product state as a comma list over {{{','.join(PRODUCT_TOKENS)}}}")
    tomo.add_argument("--mode", choices=TOMOGRAPHY_CONFIG["modes"], default="product", help="tomography protocol")
    tomo.add_argument("--shots", type=int, default=TOMOGRAPHY_CONFIG["default_shots"], help="shots per setting")
    _add_common(tomo, "tomo")

    partition = commands.add_parser("partition", help="exact optimum by enumeration",
                                    formatter_class=formatter)
    _add_instance(partition)
    _add_common(partition, "partition")

    ledger = commands.add_parser("ledger", help="cost ledger and scaling verdict across N",
                                 formatter_class=formatter)
    ledger.add_argument("--n-min", dest="n_min", type=int, default=4, help="smallest N")
    ledger.add_argument("--n-max", dest="n_max", type=int, default=10, help="largest N")
    ledger.add_argument("--n-step", dest="n_step", type=int, default=2, help="N increment")
    ledger.add_argument("--instances", type=int, default=LEDGER_CONFIG["instances"], help="instances per N")
    ledger.add_argument("--target", type=float, default=LEDGER_CONFIG["target"], help="target success probability")
    ledger.add_argument("--max-weight", dest="max_weight", type=int, default=LEDGER_CONFIG["max_weight"],
                        help="largest uniform-int weight in the ensemble")
    ledger.add_argument("--time-cap", dest="time_cap", type=float, default=EVOLUTION_CONFIG["scan_cap"],
                        help="threshold scan cap")
    _add_spectral(ledger)
    _add_common(ledger, "ledger")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Parse and validate a command line

    Usage errors (unknown flags, bad values, unreadable inputs) exit with status 2.
    """
    parser = build_parser()
    namespace = parser.parse_args(argv)
    values = {key: value for key, value in vars(namespace).items() if value is not None}
    if "out" not in values:
        extension = values["format"]
        values["out"] = str(Path(PATHS["outputs"]) / f"{namespace.command}.{extension}")
    try:
        return RunConfig(**values)
    except ValidationError as e:
        messages = []
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"])
            name = _FLAG_NAMES.get(location, location.replace("_", "-"))
            flag = f"--{name}: " if location else ""
            messages.append(f"{flag}{error['msg']}")
        parser.error("; ".join(messages))
