"""Report containers and CSV/JSON emission.

Floats are written with ``repr`` so equal values always produce equal
bytes, and complex values are split into ``_re``/``_im`` columns.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MOMENT_HEADER = ("j", "k", "empirical_re", "empirical_im", "target", "discrepancy", "M")
KERNEL_HEADER = ("q", "index", "H", "delta", "alpha_re", "alpha_im", "deficit", "gmean", "gate")
HISTOGRAM_HEADER = ("bin_left", "bin_right", "count")


@dataclass(frozen=True)
class MomentRow:
    j: int
    k: int
    empirical: complex
    target: float
    discrepancy: float
    M: int

    def cells(self) -> tuple:
        e = complex(self.empirical)
        return (self.j, self.k, e.real, e.imag, float(self.target), float(self.discrepancy), self.M)


@dataclass
class MomentReport:
    """Everything one scenario run produces.

    ``tables`` holds scenario-specific rows as ``name -> (header, rows)``;
    ``summary`` is a flat key/value record (KS distance, verdicts, flags).
    """

    scenario: str
    moments: list[MomentRow] = field(default_factory=list)
    kernel_rows: list = field(default_factory=list)
    ks: float | None = None
    gates: list[str] = field(default_factory=list)
    tables: dict[str, tuple[tuple, list[tuple]]] = field(default_factory=dict)
    histograms: dict[str, list[tuple[float, float, int]]] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    demonstrated: bool | None = None

    def add_moment(self, j, k, empirical, target, M) -> MomentRow:
        row = MomentRow(j, k, complex(empirical), float(target), abs(complex(empirical) - target), int(M))
        self.moments.append(row)
        return row


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if hasattr(value, "value") and isinstance(value.value, str):
        return value.value
    if value is None:
        return ""
    return str(value)


def _kernel_cells(row) -> tuple:
    a = complex(row.alpha)
    gate = "" if row.gate is None else row.gate.value
    return (row.q, row.index, row.H, row.delta, a.real, a.imag, row.deficit, row.gmean, gate)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _summary_rows(report: MomentReport) -> list[tuple]:
    rows = [("scenario", report.scenario)]
    if report.ks is not None:
        rows.append(("ks", report.ks))
    rows += [("gate", g) for g in report.gates]
    if report.demonstrated is not None:
        rows.append(("demonstrated", report.demonstrated))
    rows += sorted(report.summary.items())
    rows += [("note", n) for n in report.notes]
    return rows


def _json_value(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if hasattr(v, "value") and isinstance(v.value, str):
        return v.value
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if hasattr(v, "item"):
        return v.item()
    return v


def report_document(report: MomentReport) -> dict:
    """JSON-ready mirror of the report."""
    return _json_value(
        {
            "scenario": report.scenario,
            "demonstrated": report.demonstrated,
            "ks": report.ks,
            "gates": report.gates,
            "moments": [dict(zip(MOMENT_HEADER, r.cells())) for r in report.moments],
            "kernel_rows": [dict(zip(KERNEL_HEADER, _kernel_cells(r))) for r in report.kernel_rows],
            "tables": {n: [dict(zip(h, r)) for r in rows] for n, (h, rows) in report.tables.items()},
            "histograms": {n: [dict(zip(HISTOGRAM_HEADER, t)) for t in tri] for n, tri in report.histograms.items()},
            "summary": report.summary,
            "notes": report.notes,
        }
    )


def _write(path: Path, text: str) -> None:
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit(report: MomentReport, fmt: str, out_dir) -> list[Path]:
    """Write the report under ``out_dir`` and return the paths written.

    CSV mode writes ``<scenario>_moments.csv`` (always, header-only when
    empty), ``_summary.csv`` and one file per kernel/extra table. JSON mode
    writes one ``<scenario>.json``. Histograms go to ``_hist_<name>.csv``
    in both modes.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    stem = report.scenario
    written = []

    def put(name: str, text: str):
        path = out / name
        _write(path, text)
        written.append(path)

    if fmt == "csv":
        put(f"{stem}_moments.csv", _csv_text(MOMENT_HEADER, [r.cells() for r in report.moments]))
        put(f"{stem}_summary.csv", _csv_text(("key", "value"), _summary_rows(report)))
        if report.kernel_rows:
            put(f"{stem}_kernel.csv", _csv_text(KERNEL_HEADER, [_kernel_cells(r) for r in report.kernel_rows]))
        for name, (header, rows) in report.tables.items():
            put(f"{stem}_{name}.csv", _csv_text(header, rows))
    else:
        put(f"{stem}.json", json.dumps(report_document(report), indent=2, sort_keys=True) + "\n")
    for name, triples in report.histograms.items():
        put(f"{stem}_hist_{name}.csv", _csv_text(HISTOGRAM_HEADER, triples))
    return written
