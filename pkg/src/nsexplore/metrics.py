"""Exploration-step accounting and the headline step bound.

A step is an exploration step when the hypothesis declared at that step is
not valid for the kernel in force at that step: either it misses part of the
incrementally discoverable set at radius L, or some declared policy's true
navigation time exceeds (1+eps)L.  Validity is a pure function of
(segment, hypothesis version), so it is computed once per pair and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .cmp import ChangeSchedule
from .meta import RunResult


def account(result: RunResult, schedule: ChangeSchedule, L: float, eps: float,
            use_cache: bool = True) -> np.ndarray:
    """Boolean exploration flag per step record, in log order."""
    flags = np.zeros(len(result.steps), dtype=bool)
    cache = {}
    for i, rec in enumerate(result.steps):
        t, ver = rec[0], rec[6]
        seg = schedule.segment_index(t)
        key = (seg, ver)
        if use_cache and key in cache:
            valid = cache[key]
        else:
            valid = oracle.hypothesis_valid(schedule.segments[seg][1],
                                            result.versions[ver], L, eps)
            cache[key] = valid
        flags[i] = not valid
    return flags


@dataclass(frozen=True)
class BoundReport:
    building_bound: float
    checking_bound: float
    observed_exploration_steps: int = None

    @property
    def total_bound(self) -> float:
        return self.building_bound + self.checking_bound

    def to_json(self) -> dict:
        return {"building_bound": self.building_bound,
                "checking_bound": self.checking_bound,
                "total_bound": self.total_bound,
                "observed_exploration_steps": self.observed_exploration_steps}


def theorem_bound(F: int, segment_sizes, A: int, L: float, eps: float,
                  delta: float, C1: float, C2: float,
                  observed: int = None) -> BoundReport:
    """Headline high-probability bound on total exploration steps.

    segment_sizes holds, per segment, the number of incrementally
    discoverable states at radius (1+eps)L.
    """
    if len(segment_sizes) != F:
        raise ValueError("need one discoverable-set size per segment")
    terms = []
    for S_f in segment_sizes:
        log_term = math.log(4.0 * math.pi ** 2 * C2 * F ** 2 * S_f * A * L
                            / (3.0 * eps * delta))
        terms.append(C1 * S_f * A * L ** 3 / eps ** 3 * log_term ** 3)
    building = sum(terms) ** 2
    checking = F * max(
        2.0 * C1 * S_f * A * L ** 3 / eps ** 3
        * math.log(4.0 * math.pi ** 2 * C2 * F ** 2 * S_f * A * L
                   / (3.0 * eps * delta)) ** 6
        for S_f in segment_sizes)
    return BoundReport(building, checking, observed)


def segment_discoverable_sizes(schedule: ChangeSchedule, L: float,
                               eps: float) -> list:
    """|discoverable set at radius (1+eps)L| for each segment, via the oracle."""
    return [len(oracle.s_arrow_l(k, (1.0 + eps) * L))
            for _t, k in schedule.segments]


def bound_for_schedule(schedule: ChangeSchedule, L: float, eps: float,
                       delta: float, C1: float, C2: float,
                       observed: int = None) -> BoundReport:
    sizes = segment_discoverable_sizes(schedule, L, eps)
    return theorem_bound(schedule.count_changes(), sizes,
                         schedule.action_count, L, eps, delta, C1, C2,
                         observed)


def summarize(result: RunResult, schedule: ChangeSchedule, L: float,
              eps: float, delta: float, C1: float, C2: float,
              unsound: bool) -> dict:
    flags = account(result, schedule, L, eps)
    observed = int(flags.sum())
    report = bound_for_schedule(schedule, L, eps, delta, C1, C2, observed)
    return {
        "exploration_steps": observed,
        "total_steps": len(result.steps),
        "rounds": result.rounds,
        "F": schedule.count_changes(),
        "change_times": schedule.change_times(),
        "halted": result.halted,
        "unsound_constants": unsound,
        "bound_report": report.to_json(),
    }
