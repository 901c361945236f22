"""Verification reports and their deterministic serialization.

JSON output uses sorted keys, a fixed float repr and no timestamps, so an
identical run produces byte-identical files.  The CSV table has one row per
(function, transform) pair.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from ..errors import MixMorreyError

SCHEMA_VERSION = "1.0"

PASS = "pass"
FAIL = "fail"
EXPECTED_FAIL = "expected-fail"
UNEXPECTED_PASS = "unexpected-pass"
INCONCLUSIVE = "inconclusive"

CSV_COLUMNS = ("function", "transform", "source", "target", "ratio")


def _clean(x: Any) -> Any:
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and callable(x.item):  # numpy scalars
        return _clean(x.item())
    return x


@dataclass
class VerificationReport:
    """Structured record of one inequality check."""

    theorem_id: str
    operator: dict
    exponents: dict
    phi: dict
    rows: list[dict] = field(default_factory=list)
    fitted_constant: float = math.nan
    spread: float = math.nan
    verdict: str = INCONCLUSIVE
    environment: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def ratios(self) -> list[float]:
        return [r["ratio"] for r in self.rows]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return _clean(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(report: VerificationReport, path: str | Path, fmt: str = "json") -> Path:
    """Write ``report`` as ``json`` or ``csv``; returns the path written."""
    if not report.rows and not report.extra:
        raise MixMorreyError("refusing to serialize an empty report")
    if fmt == "json":
        text = report.to_json()
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}; expected 'json' or 'csv'")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise MixMorreyError(f"cannot write report to {path}: {exc}") from exc
    return path
