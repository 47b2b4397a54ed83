import math

import numpy as np
import pytest

from nsexplore import envs, metrics
from nsexplore.cmp import ChangeSchedule, Simulator, stationary_schedule
from nsexplore.meta import MetaConfig, RunResult, run_meta
from nsexplore.policies import Hypothesis, Policy

SCALED = dict(constants_scale=3e-4, window_scale=0.02,
              eval_scale=0.02, sample_scale=0.05)


def forward_policy(n):
    return Policy({s: 1 for s in range(n)})


def synthetic_result(versions, step_versions):
    steps = [(t + 1, 1, "B", 1, 0, 1, v) for t, v in enumerate(step_versions)]
    return RunResult(steps=steps, events=[], versions=versions, rounds=1,
                     final_t=len(steps) + 1, halted="horizon")


def test_account_flags_invalid_versions():
    k = envs.chain(2)
    sched = stationary_schedule(k)
    valid = Hypothesis({0: Policy({}), 1: forward_policy(2), 2: forward_policy(2)})
    res = synthetic_result([Hypothesis.empty(), valid], [0, 0, 1, 1, 1])
    flags = metrics.account(res, sched, 2, 1.0)
    assert flags.tolist() == [True, True, False, False, False]


def test_account_depends_on_segment():
    k = envs.chain(2)
    k2 = envs.break_edge(k, 2, 2.0)
    sched = ChangeSchedule(((1, k), (4, k2)))
    valid_for_k = Hypothesis({0: Policy({}), 1: forward_policy(2),
                              2: forward_policy(2)})
    res = synthetic_result([valid_for_k], [0, 0, 0, 0, 0, 0])
    flags = metrics.account(res, sched, 2, 1.0)
    # the same hypothesis turns invalid when the kernel changes at t=4:
    # state 2 is no longer reachable so its policy is too slow
    assert flags.tolist() == [False, False, False, True, True, True]


def test_account_cache_matches_uncached():
    k = envs.chain(2)
    cfg = MetaConfig(eps=1.0, L=2, action_count=2, max_steps=4000, **SCALED)
    res = run_meta(Simulator(stationary_schedule(k), seed=3), cfg)
    sched = stationary_schedule(k)
    fast = metrics.account(res, sched, 2, 1.0, use_cache=True)
    slow = metrics.account(res, sched, 2, 1.0, use_cache=False)
    assert np.array_equal(fast, slow)


def test_theorem_bound_golden():
    # F=1, S_1=3, A=2, L=2, eps=1, delta=0.1, default constants
    log_term = math.log(4 * math.pi ** 2 * 225 * 1 * 3 * 2 * 2 / (3 * 1 * 0.1))
    term = 48661 * 3 * 2 * 8 * log_term ** 3
    report = metrics.theorem_bound(1, [3], 2, 2.0, 1.0, 0.1, 48661, 225)
    assert report.building_bound == pytest.approx(term ** 2)
    assert report.checking_bound == pytest.approx(2 * 48661 * 3 * 2 * 8 * log_term ** 6)
    assert report.total_bound == report.building_bound + report.checking_bound


def test_theorem_bound_needs_size_per_segment():
    with pytest.raises(ValueError):
        metrics.theorem_bound(2, [3], 2, 2.0, 1.0, 0.1, 48661, 225)


def test_segment_sizes_via_oracle():
    k = envs.chain(2)
    k2 = envs.break_edge(k, 2, 2.0)
    sched = ChangeSchedule(((1, k), (50, k2)))
    # radius (1+eps)L = 4 covers the whole 3-state chain, then state 2 drops
    assert metrics.segment_discoverable_sizes(sched, 2.0, 1.0) == [3, 2]


def test_summarize_shape():
    k = envs.chain(2)
    cfg = MetaConfig(eps=1.0, L=2, action_count=2, max_steps=3000, **SCALED)
    sched = stationary_schedule(k)
    res = run_meta(Simulator(sched, seed=0), cfg)
    summary = metrics.summarize(res, sched, 2, 1.0, 0.1, 48661, 225, True)
    assert summary["total_steps"] == len(res.steps)
    assert summary["F"] == 1
    assert summary["unsound_constants"] is True
    assert summary["exploration_steps"] <= summary["total_steps"]
    assert summary["bound_report"]["observed_exploration_steps"] == \
        summary["exploration_steps"]
