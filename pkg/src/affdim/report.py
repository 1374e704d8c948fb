"""Report documents and their text, CSV and JSON renderings."""

from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import dataclass, field
from typing import Any

from . import __version__

TIMING_FIELDS = frozenset({"cpu_seconds", "wall_seconds"})
FORMATS = ("text", "csv", "json")
HEADERS = {"s_n": "approximation", "cpu_seconds": "CPU time", "rho_k_plus_1": "rho_k+1"}


@dataclass
class ReportDocument:
    command: str
    columns: tuple[str, ...] = ()
    rows: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    non_rigorous: bool = False
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        meta = {"version": __version__, "python": platform.python_version()}
        meta.update(self.metadata)
        return {
            "command": self.command,
            "non_rigorous": self.non_rigorous,
            "summary": self.summary,
            "columns": list(self.columns),
            "rows": self.rows,
            "notes": self.notes,
            "metadata": meta,
        }


def strip_timing(obj):
    """Copy of a rendered document with every timing field removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_FIELDS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def group_digits(value: str, stable: int = 0, group: int = 5) -> str:
    """'1.1156032577' -> '[1.11560 3]2577' with the first ``stable`` decimals bracketed.

    stable = 0 brackets only the integer part; negative values bracket nothing.
    """
    whole, _, frac = value.partition(".")
    parts = []
    for i in range(0, len(frac), group):
        parts.append(frac[i : i + group])
    text = whole + "." + " ".join(parts) if frac else whole
    if stable < 0:
        return text
    if stable == 0:
        return "[" + whole + "]" + text[len(whole):]
    # Position of the last stable decimal within the grouped string.
    pos = len(whole) + 1 + stable + (stable - 1) // group
    return "[" + text[:pos] + "]" + text[pos:]


def format_seconds(t: float | None) -> str:
    if t is None:
        return ""
    if t < 1:
        return f"{t:.2g}s"
    if t < 10:
        return f"{t:.1f}s"
    return f"{t:.0f}s"


def _text_cell(col: str, row: dict) -> str:
    value = row.get(col)
    if col == "s_n" and isinstance(value, str):
        return group_digits(value, row.get("stable_digits", -1))
    if col == "estimate" and isinstance(value, str):
        return group_digits(value, row.get("stable_digits", -1), group=len(value))
    if col in TIMING_FIELDS:
        return format_seconds(value)
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def render_text(doc: ReportDocument) -> str:
    out = []
    title = doc.command
    if doc.non_rigorous:
        title += "  (NON-RIGOROUS estimate)"
    out.append(title)
    for key, value in doc.summary.items():
        out.append(f"  {key}: {value}")
    if doc.columns and doc.rows:
        cells = [[_text_cell(c, r) for c in doc.columns] for r in doc.rows]
        heads = [HEADERS.get(c, c) for c in doc.columns]
        widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(heads)]
        out.append("")
        out.append("  ".join(h.ljust(w) for h, w in zip(heads, widths)).rstrip())
        out.append("  ".join("-" * w for w in widths))
        for row in cells:
            out.append("  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip())
    if doc.notes:
        out.append("")
        out.extend(f"note: {n}" for n in doc.notes)
    return "\n".join(out) + "\n"


def render_csv(doc: ReportDocument) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(doc.columns)
    for row in doc.rows:
        writer.writerow(["" if row.get(c) is None else row.get(c) for c in doc.columns])
    return buf.getvalue()


def render_json(doc: ReportDocument) -> str:
    return json.dumps(doc.to_dict(), indent=2, sort_keys=True) + "\n"


def render(doc: ReportDocument, fmt: str = "text") -> str:
    if fmt == "text":
        return render_text(doc)
    if fmt == "csv":
        return render_csv(doc)
    if fmt == "json":
        return render_json(doc)
    raise ValueError(f"format must be one of {FORMATS}")
