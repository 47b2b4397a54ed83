"""Strict loaders for the experiment harness file formats.

The only coupling to the experiment code is the on-disk schema:
steps.csv has header (t, cumulative_exploration_steps) with integer rows,
summary.json is a flat object with the documented keys.  Anything that does
not match raises SchemaError; nothing is rendered from bad input.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

STEPS_HEADER = ["t", "cumulative_exploration_steps"]
SUMMARY_KEYS = {"exploration_steps", "total_steps", "rounds", "F",
                "change_times", "bound_report"}


class SchemaError(ValueError):
    pass


def load_steps_csv(path) -> tuple:
    """(t, cumulative exploration steps) arrays from one replica CSV."""
    ts, cum = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != STEPS_HEADER:
            raise SchemaError(f"{path}: header {header!r}, "
                              f"expected {STEPS_HEADER}")
        for i, row in enumerate(reader):
            if len(row) != 2:
                raise SchemaError(f"{path}: row {i + 2} has {len(row)} fields")
            try:
                t, c = int(row[0]), int(row[1])
            except ValueError as exc:
                raise SchemaError(f"{path}: row {i + 2}: {exc}") from exc
            ts.append(t)
            cum.append(c)
    if not ts:
        raise SchemaError(f"{path}: no data rows")
    t = np.asarray(ts)
    c = np.asarray(cum)
    if np.any(np.diff(t) <= 0) or np.any(np.diff(c) < 0):
        raise SchemaError(f"{path}: t must increase and the count must be "
                          "non-decreasing")
    return t, c


def load_summary(path) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    missing = SUMMARY_KEYS - doc.keys()
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")
    report = doc["bound_report"]
    if not isinstance(report, dict) or "total_bound" not in report:
        raise SchemaError(f"{path}: bound_report lacks total_bound")
    return doc


def find_replicas(runs_dir) -> list:
    """Replica directories under runs_dir, sorted by seed id."""
    root = Path(runs_dir)
    if not root.is_dir():
        raise SchemaError(f"{runs_dir}: not a directory")
    out = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and (child / "steps.csv").exists():
            out.append(child)
    if not out:
        raise SchemaError(f"{runs_dir}: no replica directories with steps.csv")
    return out
