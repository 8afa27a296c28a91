"""
Report emission: CSV cell table, JSON envelope and a plain-text summary.

The JSON envelope has three top-level keys::

    body         everything derived from (config, seed): config, config_hash,
                 tool_version, catalog_versions, verdict, cells
    body_sha256  sha256 of the canonical JSON text of ``body``
    run_info     timestamp and worker count (not hashed)

Canonical JSON uses sorted keys, ``(",", ":")`` separators and Python's
shortest round-trip float repr, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import os
from dataclasses import asdict

from .. import __version__
from ..deformations import CATALOG_LABELS
from ..fock_nonlinear import F_CATALOG
from ..hilbert_finite import TEST_SYSTEMS
from ..phase_flow import SYSTEM_CATALOG
from .runner import ReportRecord, RunResult

SCHEMA = "hamlab.report/1"

CSV_COLUMNS = (
    "experiment_id", "beta", "method", "label", "value", "error_bound", "reference",
    "passed", "contract", "error", "config_hash", "seed", "tool_version",
)


def _catalog_digest(labels) -> str:
    return hashlib.sha256("\n".join(labels).encode()).hexdigest()[:12]


CATALOG_VERSIONS = {
    "systems": _catalog_digest(sorted(SYSTEM_CATALOG)),
    "deformations": _catalog_digest(CATALOG_LABELS),
    "f": _catalog_digest(list(F_CATALOG)),
    "quantum_systems": _catalog_digest(TEST_SYSTEMS),
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_body(result: RunResult) -> dict:
    cfg = result.config
    return {
        "schema": SCHEMA,
        "experiment_id": cfg.experiment_id,
        "kind": cfg.kind,
        "config": cfg.canonical(),
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "tool_version": __version__,
        "catalog_versions": CATALOG_VERSIONS,
        "verdict": result.verdict,
        "contract_failed": result.contract_failed,
        "cells": [asdict(r) for r in result.records],
    }


def csv_text(result: RunResult) -> str:
    cfg = result.config
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in result.records:
        row = asdict(r)
        row.update(config_hash=cfg.config_hash, seed=cfg.seed, tool_version=__version__)
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _cell_line(r: ReportRecord) -> str:
    beta = "-" if r.beta is None else f"{r.beta:g}"
    if r.error:
        status = "ERROR"
    else:
        status = {True: "ok", False: "FAIL", None: "recorded"}[r.passed]
    value = "-" if r.value is None else f"{r.value:.12g}"
    bound = "-" if r.error_bound is None else f"{r.error_bound:.2e}"
    ref = "" if r.reference is None else f"  ref {r.reference:.12g}"
    tag = "contract" if r.contract else "info"
    line = f"  [{status:8s}] beta={beta:6s} {r.method:28s} {r.label:22s} {value} +/- {bound}{ref} ({tag})"
    return line + (f"\n      {r.error}" if r.error else "")


def summary_text(result: RunResult) -> str:
    cfg = result.config
    lines = [
        f"experiment {cfg.experiment_id} ({cfg.kind})",
        f"config_hash {cfg.config_hash}",
        f"verdict: {result.verdict}",
        f"contract cells failing: {sum(r.failed_contract for r in result.records)}",
        "",
    ]
    lines += [_cell_line(r) for r in result.records]
    return "\n".join(lines) + "\n"


def envelope(result: RunResult, workers: int, timestamp: str | None = None) -> dict:
    body = report_body(result)
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {
        "body": body,
        "body_sha256": hashlib.sha256(canonical_json(body).encode()).hexdigest(),
        "run_info": {"timestamp": timestamp, "workers": workers},
    }


def write_report(result: RunResult, out_dir: str, workers: int = 1) -> dict:
    """Write report.csv, report.json and summary.txt; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, "report.csv"),
        "json": os.path.join(out_dir, "report.json"),
        "summary": os.path.join(out_dir, "summary.txt"),
    }
    with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(result))
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(envelope(result, workers), fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        fh.write(summary_text(result))
    return paths


__all__ = [
    "CATALOG_VERSIONS",
    "CSV_COLUMNS",
    "SCHEMA",
    "canonical_json",
    "csv_text",
    "envelope",
    "report_body",
    "summary_text",
    "write_report",
]
