import csv
import io
import json
import os
import sys
from typing import Iterable, Optional, Sequence

import numpy as np

from ewalk.config import settings


def _plain(value):
    """json default hook for numpy scalars, arrays and complex numbers."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class ResultFormatter:
    """
    Writes command results as JSON documents or CSV tables.
    """

    def __init__(self, output_folder: Optional[str] = None):
        """Initialize the formatter; relative output paths resolve against output_folder."""
        self.output_folder = output_folder or settings.output_folder
        os.makedirs(self.output_folder, exist_ok=True)

    def format_json(self, payload) -> str:
        """
        Serialize a result with sorted keys.

        Args:
            payload: Dict or list of plain values

        Returns:
            The JSON text with a trailing newline
        """
        return json.dumps(payload, sort_keys=True, indent=2, default=_plain) + "\n"

    def format_csv(self, rows: Iterable[dict], columns: Optional[Sequence[str]] = None) -> str:
        """
        Serialize rows with full double precision (17 significant digits).

        Args:
            rows: Dicts sharing the same keys
            columns: Column order, the keys of the first row by default

        Returns:
            The CSV text; empty cells for missing values
        """
        rows = list(rows)
        if columns is None:
            columns = list(rows[0].keys()) if rows else []
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
        return buffer.getvalue()

    def render(self, payload, fmt: str, columns: Optional[Sequence[str]] = None) -> str:
        if fmt == "json":
            return self.format_json(payload)
        if fmt == "csv":
            rows = payload if isinstance(payload, list) else [payload]
            return self.format_csv(rows, columns)
        raise ValueError(f"Unsupported output format: {fmt}. Use 'json' or 'csv'.")

    def write(self, text: str, output: Optional[str] = None) -> Optional[str]:
        """
        Write text to a file, or to stdout when output is empty or '-'.

        Returns:
            The path written, None for stdout
        """
        if not output or output == "-":
            sys.stdout.write(text)
            return None
        path = output if os.path.isabs(output) else os.path.join(self.output_folder, output)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        return path
