"""Result tables and their byte-stable serializations.

CSV: one header row, RFC-4180 quoting, floats at 17 significant digits,
``\n`` line endings.  JSON: a single object with ``metadata`` and
``rows`` keys, sorted keys, two-space indent.  Equal tables serialize
to identical bytes, and ``parse_result_json`` inverts ``emit_results``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

COLUMNS = ("run", "kind", "metric", "value")


@dataclass
class ResultTable:
    rows: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = tuple(tuple(r) for r in self.rows)
        for r in self.rows:
            if len(r) != len(COLUMNS):
                raise DomainError(f"result row {r!r} is not rectangular")

    def value(self, run: str, metric: str):
        for r, _, m, v in self.rows:
            if r == run and m == metric:
                return v
        raise KeyError((run, metric))


def _cell(x) -> str:
    if isinstance(x, bool):
        raise DomainError("boolean cells are not part of the table format")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    text = str(x)
    if any(c in text for c in ",\"\n\r"):
        return '"' + text.replace('"', '""') + '"'
    return text


def _norm(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return str(x)


def render_csv(table: ResultTable) -> str:
    lines = [",".join(COLUMNS)]
    for row in table.rows:
        lines.append(",".join(_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def render_json(table: ResultTable) -> str:
    obj = {
        "metadata": {str(k): _norm(v) for k, v in table.metadata.items()},
        "rows": [[_norm(c) for c in row] for row in table.rows],
    }
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def parse_result_json(text: str) -> ResultTable:
    obj = json.loads(text)
    return ResultTable(rows=tuple(tuple(r) for r in obj["rows"]),
                       metadata=dict(obj["metadata"]))


def emit_results(table: ResultTable, fmt: str, path) -> None:
    """Write the table to ``path`` in the named format."""
    if fmt == "csv":
        text = render_csv(table)
    elif fmt == "json":
        text = render_json(table)
    else:
        raise DomainError(f"unknown emit format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise DomainError(f"cannot write results to {path}: {exc}") from exc
