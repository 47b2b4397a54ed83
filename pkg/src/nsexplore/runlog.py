"""Run-log persistence: JSONL for events + steps, CSV for the time series.

The JSONL file carries one meta line, the hypothesis versions, and then the
step/event rows merged in time order.  Steps are compact arrays:
["s", t, round, phase, unit, state, action, hyp_version].  The CSV is the
plot-friendly series (t, cumulative exploration steps).
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .meta import RunResult
from .policies import Hypothesis


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_runlog(path, result: RunResult, meta: dict = None) -> None:
    with open(path, "w") as fh:
        fh.write(_dump({"row": "meta", **(meta or {})}) + "\n")
        for i, hyp in enumerate(result.versions):
            fh.write(_dump({"row": "version", "id": i,
                            "policies": hyp.to_json()}) + "\n")
        events = list(result.events)
        ei = 0
        for rec in result.steps:
            while ei < len(events) and events[ei]["t"] <= rec[0]:
                fh.write(_dump({"row": "event", **events[ei]}) + "\n")
                ei += 1
            fh.write(_dump(["s", *rec]) + "\n")
        for ev in events[ei:]:
            fh.write(_dump({"row": "event", **ev}) + "\n")
        fh.write(_dump({"row": "end", "rounds": result.rounds,
                        "final_t": result.final_t,
                        "halted": result.halted}) + "\n")


def read_runlog(path):
    """Round-trips write_runlog output back into (RunResult, meta dict)."""
    steps, events, versions = [], [], []
    meta, tail = {}, {}
    with open(path) as fh:
        for line in fh:
            row = json.loads(line)
            if isinstance(row, list):
                steps.append(tuple(row[1:]))
            elif row["row"] == "event":
                events.append({k: v for k, v in row.items() if k != "row"})
            elif row["row"] == "version":
                versions.append(Hypothesis.from_json(row["policies"]))
            elif row["row"] == "meta":
                meta = {k: v for k, v in row.items() if k != "row"}
            elif row["row"] == "end":
                tail = row
    result = RunResult(steps=steps, events=events, versions=versions,
                       rounds=tail.get("rounds", 0),
                       final_t=tail.get("final_t", 0),
                       halted=tail.get("halted", ""))
    return result, meta


def write_steps_csv(path, result: RunResult, flags: np.ndarray) -> None:
    cum = np.cumsum(flags.astype(int))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "cumulative_exploration_steps"])
        for rec, c in zip(result.steps, cum):
            writer.writerow([rec[0], int(c)])


def read_steps_csv(path):
    ts, cum = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "cumulative_exploration_steps"]:
            raise ValueError(f"unexpected CSV header {header!r}")
        for row in reader:
            ts.append(int(row[0]))
            cum.append(int(row[1]))
    return np.asarray(ts), np.asarray(cum)


def write_summary(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
