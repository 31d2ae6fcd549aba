"""
Unit tests for output writing and the worker pool
"""

import json

import numpy as np
import pytest

from src import __version__
from src.core.parallel import parallel_map
from src.core.report_io import atomic_write_text, dumps_canonical, with_metadata


class TestReportIO:
    """Test cases for canonical JSON and atomic writes"""

    def test_canonical_sorted_and_numpy_safe(self):
        text = dumps_canonical({"b": np.int64(2), "a": np.float64(0.5), "c": np.arange(2), "d": frozenset({3, 1})})
        assert text.endswith("\n")
        assert list(json.loads(text)) == ["a", "b", "c", "d"]
        assert json.loads(text)["d"] == [1, 3]

    def test_unencodable_value(self):
        with pytest.raises(TypeError):
            dumps_canonical({"x": object()})

    def test_metadata(self):
        document = with_metadata({"value": 1}, {"command": "partition"})
        assert document["schema_version"] == "1"
        assert document["tool_version"] == __version__
        assert document["run_config"] == {"command": "partition"}
        assert "run_config" not in with_metadata({})

    def test_atomic_write(self, tmp_path):
        target = tmp_path / "nested" / "out.json"
        atomic_write_text(target, "first\n")
        atomic_write_text(target, "second\n")
        assert target.read_text() == "second\n"
        assert [p.name for p in target.parent.iterdir()] == ["out.json"]


class TestParallelMap:
    """Test cases for parallel_map"""

    def test_serial(self):
        assert parallel_map(abs, [-3, 2, -1]) == [3, 2, 1]

    def test_pool_preserves_order(self):
        assert parallel_map(abs, list(range(-10, 0)), jobs=2) == list(range(10, 0, -1))

    def test_empty(self):
        assert parallel_map(abs, [], jobs=4) == []


if __name__ == "__main__":
    pytest.main([__file__])
