"""Tabular and JSON writers with an embedded, replayable config header.

CSV files start with ``#``-prefixed metadata lines (command, seed, the
resolved config as one JSON line, extra metadata) followed by a header row
and data rows. Floats are written with ``repr`` (shortest round-trip).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigFileNotFound, ConfigParseError


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class Table:
    """Named columns plus the metadata needed to replay the run."""

    def __init__(self, command, config, columns, rows, extra=None):
        self.command = command
        self.config = config
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.extra = extra or {}

    def to_csv(self):
        lines = [
            f"# command: {self.command}",
            f"# seed: {self.config['seed']}",
            "# config: " + json.dumps(self.config, sort_keys=True, separators=(",", ":")),
        ]
        if self.extra:
            lines.append("# meta: " + json.dumps(_jsonable(self.extra), sort_keys=True,
                                                 separators=(",", ":")))
        lines.append(",".join(self.columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self):
        doc = {
            "command": self.command,
            "seed": self.config["seed"],
            "config": self.config,
            "meta": _jsonable(self.extra),
            "columns": self.columns,
            "rows": [[_jsonable(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    def render(self, fmt="csv"):
        return self.to_json() if fmt == "json" else self.to_csv()


def dataset_table(command, config, ds):
    """Flatten a scan Dataset in grid (C) order."""
    axis_names = [name for name, _ in ds.axes]
    grids = np.meshgrid(*[values for _, values in ds.axes], indexing="ij")
    names = list(ds.columns)
    flat_cols = [g.ravel() for g in grids] + [ds.columns[n].ravel() for n in names]
    rows = list(zip(*flat_cols))
    meta = {k: v for k, v in ds.metadata.items() if k != "config"}
    return Table(command, config, axis_names + names, rows, meta)


def format_for(path):
    return "json" if path is not None and str(path).endswith(".json") else "csv"


def write(table, path=None, fmt=None):
    fmt = fmt or format_for(path)
    text = table.render(fmt)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_header(path):
    """(command, config tree) embedded in a CSV or JSON output file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigFileNotFound(f"replay file not found: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            return doc["command"], doc["config"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigParseError(f"{path}: not a replayable output ({exc})") from exc
    command = config = None
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        if line.startswith("# command: "):
            command = line[len("# command: "):].strip()
        elif line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
    if command is None or config is None:
        raise ConfigParseError(f"{path}: missing command/config header")
    return command, config


def read_csv_columns(path):
    """Parse the data part of a CSV output into {column: np.ndarray}."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}
