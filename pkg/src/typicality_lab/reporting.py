"""Structured experiment reports: metrics, data tables, quality flags.

Reports are plain data. Serialization to JSON keeps every float at full
precision (Python floats round-trip exactly through repr), and pass/fail
is recomputable from the stored values, so a written report is a
self-contained record of a run.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import ConfigurationError


def _native(value):
    """Collapse numpy scalars to Python natives so JSON stays clean."""
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return value.item()
    return value


@dataclass
class MetricResult:
    """One checked quantity with its target and tolerance."""

    name: str
    value: float
    target: float | None = None
    tolerance: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    passed: bool | None = None
    note: str = ""

    def __post_init__(self):
        for f in ("value", "target", "tolerance", "ci_low", "ci_high", "passed"):
            setattr(self, f, _native(getattr(self, f)))


@dataclass
class DataTable:
    """A small columnar table destined for a CSV file."""

    name: str
    columns: list[str]
    rows: list[list]
    note: str = ""

    def __post_init__(self):
        self.rows = [[_native(v) for v in row] for row in self.rows]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ConfigurationError(f"table {self.name!r}: row width != column count")


@dataclass
class ExperimentReport:
    """Everything a run produced, minus the plots."""

    experiment: str
    config: dict
    metrics: list[MetricResult] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    tables: list[DataTable] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__

    def passed(self) -> bool:
        return all(m.passed for m in self.metrics if m.passed is not None)

    def metric(self, name: str) -> MetricResult:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(f"no metric named {name!r}")

    def table(self, name: str) -> DataTable:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(f"no table named {name!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            experiment=data["experiment"],
            config=data["config"],
            metrics=[MetricResult(**m) for m in data["metrics"]],
            flags=data["flags"],
            tables=[DataTable(**t) for t in data["tables"]],
            wall_time=data["wall_time"],
            version=data["version"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table_csv(table: DataTable, path: Path) -> None:
    """Write a table as CSV with a leading comment line naming its claim.

    Floats are written with repr so the file is byte-reproducible and
    parses back to the exact same values.
    """
    lines = []
    if table.note:
        lines.append(f"# {table.note}")
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_table_csv(path: Path) -> DataTable:
    """Parse a CSV written by :func:`write_table_csv`."""
    raw = path.read_text().strip().split("\n")
    note = ""
    if raw and raw[0].startswith("# "):
        note = raw[0][2:]
        raw = raw[1:]
    columns = raw[0].split(",")
    rows = []
    for line in raw[1:]:
        row = []
        for cell in line.split(","):
            if cell in ("true", "false"):
                row.append(cell == "true")
                continue
            try:
                row.append(int(cell))
            except ValueError:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
        rows.append(row)
    return DataTable(name=path.stem, columns=columns, rows=rows, note=note)
