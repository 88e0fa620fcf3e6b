"""Report records and their CSV / JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

COLUMNS = ("test", "params", "metric", "value", "tolerance", "pass", "seconds")


def format_params(params: dict) -> str:
    return ";".join(f"{k}={_fmt(v)}" for k, v in sorted(params.items()))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    if isinstance(v, complex):
        return repr(v)
    return str(v)


@dataclass
class ReportRecord:
    """One measured quantity.

    ``comparison`` is ``"<="`` for residual-type metrics (pass iff value <=
    tolerance) and ``">"`` for certified lower bounds.
    """

    test: str
    params: dict
    metric: str
    value: float
    tolerance: float
    seconds: float = 0.0
    comparison: str = "<="

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.comparison == ">":
            return self.value > self.tolerance
        return self.value <= self.tolerance

    def row(self, timing: bool = False) -> dict:
        return {
            "test": self.test,
            "params": format_params(self.params),
            "metric": self.metric,
            "value": _fmt(float(self.value)),
            "tolerance": _fmt(float(self.tolerance)),
            "pass": "true" if self.passed else "false",
            "seconds": _fmt(round(self.seconds, 3)) if timing else "0",
        }


def records_to_csv(records, timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.row(timing))
    return buf.getvalue()


def records_to_json(records, timing: bool = False) -> str:
    return json.dumps([r.row(timing) for r in records], indent=2) + "\n"


def write_records(records, out_dir: str, stem: str, timing: bool = False):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    json_path = os.path.join(out_dir, f"{stem}.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records, timing))
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(records_to_json(records, timing))
    return csv_path, json_path


def summary_table(records) -> str:
    width = max([len(r.test) + len(r.metric) + 1 for r in records] + [10])
    lines = []
    for r in records:
        name = f"{r.test}.{r.metric}"
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark}  {name:<{width}}  {r.value:.3e} {r.comparison} {r.tolerance:.1e}")
    return "\n".join(lines)
