"""CSV emission: '#' header block, comma-separated body, '#' footer."""

from __future__ import annotations

import math
import sys
from typing import Mapping, Optional, Sequence

import numpy as np

from platelab import __version__


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.16e}"
    return str(value)


class CsvReport:
    def __init__(self, command: str, config: Mapping, seed: int, columns: Sequence[str]):
        self.command = command
        self.config = dict(config)
        self.seed = seed
        self.columns = list(columns)
        self.rows: list = []
        self.footer: list = []

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(values)

    def note(self, key: str, value) -> None:
        self.footer.append((key, value))

    def header_lines(self) -> list:
        lines = [f"# platelab {__version__}", f"# command: {self.command}", f"# seed: {self.seed}"]
        for key in sorted(self.config):
            lines.append(f"# config {key}={fmt(self.config[key])}")
        return lines

    def body_lines(self) -> list:
        lines = [",".join(self.columns)]
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        return lines

    def footer_lines(self) -> list:
        return [f"# {key}: {fmt(value)}" for key, value in self.footer]

    def render(self) -> str:
        return "\n".join(self.header_lines() + self.body_lines() + self.footer_lines()) + "\n"

    def write(self, path: Optional[str], stream=None) -> None:
        text = self.render()
        if path in (None, "-"):
            (stream or sys.stdout).write(text)
            return
        with open(path, "w", newline="") as fh:
            fh.write(text)


def read_body(text: str) -> list:
    """Non-comment lines of a CSV produced by CsvReport (header row first)."""
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def read_footer(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line and not line.startswith("# config"):
            key, _, value = line[2:].partition(": ")
            out[key] = value
    return out


__all__ = ["CsvReport", "fmt", "read_body", "read_footer"]

