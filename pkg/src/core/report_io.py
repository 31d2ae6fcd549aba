"""
Atomic output writing and canonical JSON encoding shared by the ledger and the CLI
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from src import __version__
from src.config.settings import LEDGER_CONFIG

logger = logging.getLogger(__name__)


def _default(value: Any):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"cannot encode {type(value).__name__} as JSON")


def dumps_canonical(payload: Dict[str, Any]) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)"""
    return json.dumps(payload, sort_keys=True, indent=2, default=_default) + "\n"


def with_metadata(payload: Dict[str, Any], run_config: Dict[str, Any] = None) -> Dict[str, Any]:
    """Embed schema version, tool version and the producing run configuration"""
    document = dict(payload)
    document["schema_version"] = LEDGER_CONFIG["schema_version"]
    document["tool_version"] = __version__
    if run_config is not None:
        document["run_config"] = run_config
    return document


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """
    Write text through a temporary file in the target directory, then rename

    A failed write leaves no partial file behind.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(handle, "w", newline="") as f:
            f.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    logger.debug(f"Wrote {len(text)} characters to {path}")
    return path
