import csv
import io
import json
import os
import tempfile
from unittest.mock import patch

import numpy as np
import pytest

from ewalk.config import settings
from ewalk.dynamics import CSV_COLUMNS
from ewalk.formatter import ResultFormatter

pytestmark = [pytest.mark.unit, pytest.mark.formatter]


def test_result_formatter_initialization():
    """Test that the result formatter initializes correctly."""
    # Test with the output folder from the environment
    with patch.dict(os.environ, {"EWALK_OUTPUT_DIR": "./results"}):
        settings.reload()
        with patch("os.makedirs") as mock_makedirs:
            formatter = ResultFormatter()
            assert formatter.output_folder == "./results"
            mock_makedirs.assert_called_once_with("./results", exist_ok=True)
    settings.reload()

    # Test with an explicit output folder
    with tempfile.TemporaryDirectory() as temp_dir:
        with patch("os.makedirs") as mock_makedirs:
            formatter = ResultFormatter(temp_dir)
            assert formatter.output_folder == temp_dir
            mock_makedirs.assert_called_once_with(temp_dir, exist_ok=True)


def test_format_json_is_sorted_and_plain():
    """Test JSON output with numpy and complex values."""
    with tempfile.TemporaryDirectory() as temp_dir:
        formatter = ResultFormatter(temp_dir)
        text = formatter.format_json({"b": np.float64(0.5), "a": np.arange(3), "z": 1j})

    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"') < text.index('"z"')
    data = json.loads(text)
    assert data == {"a": [0, 1, 2], "b": 0.5, "z": {"re": 0.0, "im": 1.0}}


def test_format_csv_keeps_full_precision():
    """Test CSV cells: 17 significant digits and empty missing values."""
    rows = [
        {"label": "W[1/5]", "t": 0, "mean": 0.0, "sigma": 1 / 3, "revival_error": None},
        {"label": "W[1/5]", "t": 1, "mean": 0.1, "sigma": 2 / 3, "revival_error": 0.25},
    ]
    with tempfile.TemporaryDirectory() as temp_dir:
        text = ResultFormatter(temp_dir).format_csv(rows, CSV_COLUMNS)

    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == list(CSV_COLUMNS)
    assert parsed[1] == ["W[1/5]", "0", "0", "0.33333333333333331", ""]
    assert float(parsed[2][3]) == 2 / 3
    assert parsed[2][4] == "0.25"


def test_render_rejects_unknown_format():
    """Test format validation."""
    with tempfile.TemporaryDirectory() as temp_dir:
        formatter = ResultFormatter(temp_dir)
        with pytest.raises(ValueError):
            formatter.render({}, "xml")
        assert formatter.render({"x": 1}, "csv") == "x\n1\n"


def test_write_to_file_and_stdout(capsys):
    """Test relative paths, absolute paths and stdout."""
    with tempfile.TemporaryDirectory() as temp_dir:
        formatter = ResultFormatter(temp_dir)

        path = formatter.write("hello\n", "nested/out.txt")
        assert path == os.path.join(temp_dir, "nested/out.txt")
        with open(path, encoding="utf-8") as handle:
            assert handle.read() == "hello\n"

        absolute = os.path.join(temp_dir, "abs.txt")
        assert formatter.write("x", absolute) == absolute

        assert formatter.write("to stdout\n", "-") is None
        assert formatter.write("again\n") is None

    assert capsys.readouterr().out == "to stdout\nagain\n"
