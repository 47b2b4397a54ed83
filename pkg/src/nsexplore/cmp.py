"""Stationary kernels, piecewise-stationary schedules, and a seeded simulator.

Action 0 is the designated RESET action: it moves to the start state (state 0)
with probability 1 from everywhere.  A schedule is an ordered list of
(start_time, kernel) segments; the first segment starts at t=1 and the last
one extends forever.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

RESET = 0
START_STATE = 0
ROW_TOL = 1e-12


@dataclass(frozen=True)
class Kernel:
    """Transition table probs[s, a, s'] for one stationary CMP."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 3 or p.shape[0] != p.shape[2]:
            raise ConfigError(f"kernel table must be (S, A, S), got {p.shape}")
        if p.shape[1] < 2:
            raise ConfigError("need at least RESET plus one other action")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ConfigError("transition probabilities must lie in [0, 1]")
        sums = p.sum(axis=2)
        if np.max(np.abs(sums - 1.0)) > ROW_TOL:
            bad = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
            raise ConfigError(f"row {bad} sums to {sums[bad]!r}, not 1")
        reset = p[:, RESET, :]
        expected = np.zeros_like(reset)
        expected[:, START_STATE] = 1.0
        if not np.array_equal(reset, expected):
            raise ConfigError("RESET rows must be exact point masses on the start state")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def state_count(self) -> int:
        return self.probs.shape[0]

    @property
    def action_count(self) -> int:
        return self.probs.shape[1]

    def row(self, s: int, a: int) -> np.ndarray:
        return self.probs[s, a]

    def same_as(self, other: "Kernel") -> bool:
        return self.probs.shape == other.probs.shape and np.array_equal(
            self.probs, other.probs
        )


def kernel_from_partial(rows: np.ndarray) -> Kernel:
    """Build a kernel from a table whose RESET rows may be missing.

    `rows` is (S, A, S) or (S, A-1, S); in the latter case a RESET row is
    prepended at action index 0.  Rows off by more than ROW_TOL are
    renormalized with a warning.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 3:
        raise ConfigError("expected a 3-d probability table")
    S = rows.shape[0]
    reset = np.zeros((S, 1, S))
    reset[:, 0, START_STATE] = 1.0
    sums = rows.sum(axis=2)
    if np.max(np.abs(sums - 1.0)) > ROW_TOL:
        warnings.warn("renormalizing transition rows that do not sum to 1")
        rows = rows / sums[:, :, None]
    return Kernel(np.concatenate([reset, rows], axis=1))


@dataclass(frozen=True)
class ChangeSchedule:
    """Piecewise-stationary sequence of kernels; F = number of segments."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((int(t), k) for t, k in self.segments)
        if not segs:
            raise ConfigError("schedule needs at least one segment")
        if segs[0][0] != 1:
            raise ConfigError("first segment must start at t=1")
        shape = segs[0][1].probs.shape
        for (t0, k0), (t1, k1) in zip(segs, segs[1:]):
            if t1 <= t0:
                raise ConfigError("segment start times must be strictly increasing")
            if k1.probs.shape != shape:
                raise ConfigError("all segments must share the same state/action space")
            if k0.same_as(k1):
                raise ConfigError("consecutive segments must differ; merge them instead")
        object.__setattr__(self, "segments", segs)

    @property
    def state_count(self) -> int:
        return self.segments[0][1].state_count

    @property
    def action_count(self) -> int:
        return self.segments[0][1].action_count

    def segment_index(self, t: int) -> int:
        if t < 1:
            raise ConfigError("time starts at t=1")
        idx = 0
        for i, (start, _k) in enumerate(self.segments):
            if start <= t:
                idx = i
            else:
                break
        return idx

    def kernel_at(self, t: int) -> Kernel:
        return self.segments[self.segment_index(t)][1]

    def count_changes(self) -> int:
        return len(self.segments)

    def change_times(self) -> list:
        return [t for t, _k in self.segments]


def stationary_schedule(kernel: Kernel) -> ChangeSchedule:
    return ChangeSchedule(((1, kernel),))


def build_schedule(pairs, merge_identical: bool = False) -> ChangeSchedule:
    """Assemble a schedule; identical consecutive kernels are rejected or merged."""
    pairs = sorted(((int(t), k) for t, k in pairs), key=lambda x: x[0])
    out = []
    for t, k in pairs:
        if out and out[-1][1].same_as(k):
            if merge_identical:
                continue
            raise ConfigError(f"segment at t={t} is identical to its predecessor")
        out.append((t, k))
    return ChangeSchedule(tuple(out))


# time-indexed lookup and F, exposed as plain functions as well


def kernel_at(schedule: ChangeSchedule, t: int) -> Kernel:
    return schedule.kernel_at(t)


def count_changes(schedule: ChangeSchedule) -> int:
    return schedule.count_changes()


class Simulator:
    """Samples one transition at a time from a schedule.

    Randomness is split into independent named substreams via `set_context`,
    so the draws consumed by one consumer (a stream, a check-run) never shift
    the draws seen by another.
    """

    def __init__(self, schedule: ChangeSchedule, seed: int, context=(0,)):
        self.schedule = schedule
        self.seed = int(seed)
        self.t = 1
        self.state = START_STATE
        self._ctx = tuple(int(x) for x in context)
        self._gens = {}
        self._cumsums = {}

    def set_context(self, context) -> None:
        self._ctx = tuple(int(x) for x in context)

    def _rng(self) -> np.random.Generator:
        g = self._gens.get(self._ctx)
        if g is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self._ctx)
            g = np.random.default_rng(ss)
            self._gens[self._ctx] = g
        return g

    def _cumsum(self, kernel: Kernel) -> np.ndarray:
        cs = self._cumsums.get(id(kernel))
        if cs is None:
            cs = np.cumsum(kernel.probs, axis=2)
            self._cumsums[id(kernel)] = cs
        return cs

    def step(self, a: int) -> int:
        kernel = self.schedule.kernel_at(self.t)
        if not 0 <= a < kernel.action_count:
            raise ConfigError(f"action {a} out of range for A={kernel.action_count}")
        cs = self._cumsum(kernel)[self.state, a]
        u = self._rng().random()
        nxt = int(np.searchsorted(cs, u, side="right"))
        nxt = min(nxt, kernel.state_count - 1)
        self.t += 1
        self.state = nxt
        return nxt


# ---------------------------------------------------------------------------
# JSON schedule files: {"states": S, "actions": A,
#                       "segments": [{"start_time": t, "probs": [[[...]]]}]}
# RESET rows may be omitted (probs with A-1 action rows per state).


def save_schedule(schedule: ChangeSchedule, path) -> None:
    doc = {
        "states": schedule.state_count,
        "actions": schedule.action_count,
        "segments": [
            {"start_time": t, "probs": k.probs.tolist()} for t, k in schedule.segments
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_schedule(path) -> ChangeSchedule:
    with open(path) as fh:
        doc = json.load(fh)
    S, A = int(doc["states"]), int(doc["actions"])
    segs = []
    for seg in doc["segments"]:
        rows = np.asarray(seg["probs"], dtype=float)
        if rows.shape == (S, A, S):
            sums = rows.sum(axis=2)
            if np.max(np.abs(sums - 1.0)) > ROW_TOL:
                warnings.warn("renormalizing transition rows that do not sum to 1")
                rows = rows / sums[:, :, None]
            kernel = Kernel(rows)
        elif rows.shape == (S, A - 1, S):
            kernel = kernel_from_partial(rows)
        else:
            raise ConfigError(f"segment table has shape {rows.shape}, expected "
                              f"{(S, A, S)} or {(S, A - 1, S)}")
        segs.append((int(seg["start_time"]), kernel))
    return ChangeSchedule(tuple(segs))


def load_kernel(path) -> Kernel:
    sched = load_schedule(path)
    if len(sched.segments) != 1:
        raise ConfigError("expected a single-segment kernel file")
    return sched.segments[0][1]
