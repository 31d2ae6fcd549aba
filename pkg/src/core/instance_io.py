"""
Partition instance files and seeded instance generation

Two file formats are accepted: a JSON object {"weights": [...]} and plain
text with one weight per line (blank lines and '#' comments ignored).
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from src.config.settings import INSTANCE_CONFIG
from src.core.exceptions import InstanceFormatError, InvalidInstance
from src.core.hamiltonian_builder import PartitionInstance
from src.core.report_io import atomic_write_text

logger = logging.getLogger(__name__)


def generate_instance(distribution: str, num_qubits: int, seed: int,
                      max_weight: Optional[int] = None) -> PartitionInstance:
    """
    Draw a seeded random instance

    Args:
        distribution: "uniform-int" (integers in [1, max_weight], default 2^N)
            or "uniform-real" (reals in (0, 1])
        num_qubits: Number of weights N
        seed: Generator seed
        max_weight: Upper bound for integer weights

    Returns:
        PartitionInstance
    """
    rng = np.random.default_rng(seed)
    if distribution == "uniform-int":
        upper = int(max_weight) if max_weight is not None else 2 ** int(num_qubits)
        if upper < 1:
            raise InvalidInstance(f"max_weight must be >= 1, got {upper}")
        weights = [int(w) for w in rng.integers(1, upper, size=num_qubits, endpoint=True)]
    elif distribution == "uniform-real":
        weights = [float(w) for w in 1.0 - rng.random(num_qubits)]
    else:
        raise InvalidInstance(
            f"unknown distribution {distribution!r}; expected one of {INSTANCE_CONFIG['distributions']}"
        )
    return PartitionInstance(tuple(weights))


def _parse_number(token: str) -> Union[int, float]:
    try:
        return int(token)
    except ValueError:
        return float(token)


def _check_weight(value, line: int) -> Union[int, float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"weight {value!r} is not a number", line)
    if not np.isfinite(value) or value <= 0:
        raise InstanceFormatError(f"weight {value!r} must be positive", line)
    return value


def _json_weight_lines(text: str, count: int) -> List[int]:
    """Line number of every element of the "weights" array"""
    decoder = json.JSONDecoder()
    position = text.index("[", text.index('"weights"')) + 1
    lines = []
    for _ in range(count):
        while text[position] in " \t\r\n,":
            position += 1
        _, end = decoder.raw_decode(text, position)
        lines.append(text.count("\n", 0, position) + 1)
        position = end
    return lines


def parse_instance_text(text: str) -> PartitionInstance:
    """Parse instance file contents in either supported format"""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InstanceFormatError(f"invalid JSON: {e.msg}", e.lineno)
        weights = data.get("weights") if isinstance(data, dict) else None
        if not isinstance(weights, list):
            raise InstanceFormatError('JSON instance must be an object with a "weights" list')
        lines = _json_weight_lines(text, len(weights))
        checked = [_check_weight(value, line) for value, line in zip(weights, lines)]
    else:
        checked = []
        for line_number, raw in enumerate(text.splitlines(), start=1):
            token = raw.split("#", 1)[0].strip()
            if not token:
                continue
            try:
                value = _parse_number(token)
            except ValueError:
                raise InstanceFormatError(f"cannot parse {token!r} as a number", line_number)
            checked.append(_check_weight(value, line_number))
    try:
        return PartitionInstance(tuple(checked))
    except InvalidInstance as e:
        raise InstanceFormatError(e.message)


def load_instance(path: Union[str, Path]) -> PartitionInstance:
    """Read an instance file (JSON or one weight per line)"""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InstanceFormatError(f"cannot read instance file {path}: {e.strerror}")
    instance = parse_instance_text(text)
    logger.info(f"Loaded instance with N={instance.num_qubits} from {path}")
    return instance


def save_instance(instance: PartitionInstance, path: Union[str, Path]) -> Path:
    """Write an instance as JSON"""
    return atomic_write_text(path, json.dumps(instance.to_dict()) + "\n")
