"""Report files: the main CSV table, a JSON mirror, and `N,value` plot tables."""

from __future__ import annotations

import csv
import json
import re
from collections import defaultdict
from pathlib import Path

from ..inequality_suite.reports import CheckReport, jsonable
from ..weight_lab import ConstantEstimate
from .runner import ESTIMATE_ANCHORS, RunReport

CSV_COLUMNS = ("check", "anchor", "status", "worst_violation", "witness",
               "param_p", "param_delta", "param_lambda", "N", "L")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _compact(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def csv_row(item) -> list[str]:
    if isinstance(item, CheckReport):
        wit = dict(item.witness)
        if item.value is not None:
            wit["value"] = item.value
        if "weight" in item.params:
            wit["weight"] = item.params["weight"]
        if item.notes:
            wit["notes"] = item.notes
        pr = item.params
        return [item.name, item.anchor, item.status, _cell(item.worst_violation), _compact(wit),
                _cell(pr.get("p")), _cell(pr.get("delta")), _cell(pr.get("lambda")),
                _cell(pr.get("N")), _cell(pr.get("L"))]
    e: ConstantEstimate = item
    wit = {"value": e.value, "window": e.witness.as_list() if e.witness else None,
           "weight": e.params.get("weight"), "family": e.family}
    if e.witness_set is not None:
        wit["subset_size"] = len(e.witness_set.cells)
    return [e.name, ESTIMATE_ANCHORS.get(e.name, ""), "pass", "", _compact(wit),
            _cell(e.params.get("p")), _cell(e.params.get("delta")), "", _cell(e.N), _cell(e.L)]


def write_csv_report(report: RunReport, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for it in report.items:
            wr.writerow(csv_row(it))


def write_json_report(report: RunReport, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json_report(path) -> RunReport:
    with open(path) as fh:
        return RunReport.from_dict(json.load(fh))


def _slug(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", s).strip("_")


def plot_series(report: RunReport) -> dict[str, list[tuple[int, float]]]:
    """Refinement series keyed by a file stem.

    Estimates are grouped by (name, weight, delta) across N; stability
    checks carry their own N ladder in the witness.
    """
    series: dict[str, list[tuple[int, float]]] = defaultdict(list)
    for it in report.items:
        if isinstance(it, ConstantEstimate):
            key = [it.name, str(it.params.get("weight", ""))]
            if "delta" in it.params:
                key.append(f"delta{it.params['delta']}")
            series[_slug("_".join(key))].append((it.N, it.value))
        elif "N" in it.witness and "values" in it.witness:
            series[_slug(it.name)] = list(zip(it.witness["N"], it.witness["values"]))
    return {k: v for k, v in series.items() if len(v) > 1}


def emit_report(report: RunReport, out_dir, fmt: str = "csv") -> list[Path]:
    """Write report files into ``out_dir``; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        p = out / "report.csv"
        write_csv_report(report, p)
        paths.append(p)
        for stem, rows in plot_series(report).items():
            p = out / f"plot_{stem}.csv"
            with open(p, "w", newline="") as fh:
                wr = csv.writer(fh, lineterminator="\n")
                wr.writerow(("N", "value"))
                for N, v in rows:
                    wr.writerow((N, _cell(float(v))))
            paths.append(p)
    elif fmt == "json":
        p = out / "report.json"
        write_json_report(report, p)
        paths.append(p)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return paths
