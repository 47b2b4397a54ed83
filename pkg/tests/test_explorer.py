import math

import pytest

from nsexplore import envs, oracle
from nsexplore.cmp import RESET, START_STATE, Simulator, stationary_schedule
from nsexplore.errors import ConfigError, ContractError
from nsexplore.explorer import (EVENT_TERM, ExplorerConfig, ExplorerRun,
                                eval_episode_count, evaluation_accepts,
                                exploration_step_budget, sample_target)

FAST = dict(eval_scale=0.02, sample_scale=0.05)


def drive(kernel, cfg, seed=0, max_steps=500_000, context=(1, 1, 1)):
    env = Simulator(stationary_schedule(kernel), seed=seed)
    env.set_context(context)
    run = ExplorerRun(cfg)
    for _ in range(max_steps):
        a = run.next_action(env.state)
        s = env.state
        s2 = env.step(a)
        ev = run.observe(s, a, s2)
        if ev.kind == EVENT_TERM:
            return run, ev
    raise AssertionError("explorer did not terminate")


def test_config_validation():
    with pytest.raises(ConfigError):
        ExplorerConfig(delta=0.0, eps=1.0, L=2, action_count=2)
    with pytest.raises(ConfigError):
        ExplorerConfig(delta=0.1, eps=1.0, L=0.5, action_count=2)
    with pytest.raises(ConfigError):
        ExplorerConfig(delta=0.1, eps=1.0, L=2, action_count=1)


def test_episode_cap():
    cfg = ExplorerConfig(delta=0.1, eps=0.5, L=4, action_count=2)
    assert cfg.episode_cap == 12  # ceil((1 + 1/eps) L)


def test_budget_golden_value():
    # C1 K A L^3 / eps^3 * log(C2 K A L / (eps delta'))^3 at K=A=2, L=3, eps=1
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=3, action_count=2)
    expect = math.ceil(48661 * 2 * 2 * 27 * math.log(225 * 2 * 2 * 3 / 0.1) ** 3)
    assert exploration_step_budget(cfg, 2, 0.1) == expect


def test_eval_and_sample_counts_guard_degenerate_args():
    with pytest.raises(ConfigError):
        eval_episode_count(1, 1, 1.0, 10.0, 0.5)
    assert sample_target(1, 2, 1.0, 0.9) >= 4


def test_evaluation_accepts_needs_short_mean():
    # all successes, but the mean length betrays tau > (1+eps)L
    assert evaluation_accepts(10, 0, 10 * 2.0, eps=1.0, L=2)
    assert not evaluation_accepts(10, 0, 10 * 3.5, eps=1.0, L=2)
    # too many failures
    assert not evaluation_accepts(10, 5, 10 * 2.0, eps=1.0, L=2)


def test_contract_requires_matching_observation():
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=2, action_count=2)
    run = ExplorerRun(cfg)
    a = run.next_action(START_STATE)
    with pytest.raises(ContractError):
        run.observe(START_STATE, a + 1, 0)


def test_terminated_run_rejects_calls():
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=2, action_count=2, **FAST)
    run, _ev = drive(envs.chain(1), cfg)
    with pytest.raises(ContractError):
        run.next_action(0)


def test_finds_chain():
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=4, action_count=2, **FAST)
    k = envs.chain(3)
    _run, ev = drive(k, cfg)
    assert ev.hypothesis.K == frozenset({0, 1, 2, 3})
    assert oracle.hypothesis_valid(k, ev.hypothesis, 4, 1.0)


def test_ignores_states_beyond_reach():
    # L = 2 on a 4-link chain: states 0..2 are discoverable; state 3 sits in
    # the gray zone (tau* = 3 <= (1+eps)L) and may be picked up, but state 4
    # (tau* = 4 > (1+eps/2)L truncated-mean gate) never passes evaluation
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=2, action_count=2, **FAST)
    k = envs.chain(4)
    _run, ev = drive(k, cfg)
    assert frozenset({0, 1, 2}) <= ev.hypothesis.K
    assert 4 not in ev.hypothesis.K
    assert oracle.hypothesis_valid(k, ev.hypothesis, 2, 1.0)


def test_noisy_combolock_full_constants():
    k = envs.combolock(3, actions=3, noise=0.15, seed=9)
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=5, action_count=3)
    run, ev = drive(k, cfg)
    assert oracle.hypothesis_valid(k, ev.hypothesis, 5, 1.0)
    assert not run.failed
    assert run.steps_taken <= exploration_step_budget(cfg, len(ev.hypothesis.K), 0.1)


def test_interleaved_copies_match_solo():
    """A run fed the same transitions in two chunks behaves identically."""
    k = envs.chain(2)
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=3, action_count=2, **FAST)

    def run_with_interruptions(chunk):
        env = Simulator(stationary_schedule(k), seed=5)
        env.set_context((1, 1, 1))
        run = ExplorerRun(cfg)
        steps = []
        while True:
            for _ in range(chunk):
                a = run.next_action(env.state)
                s = env.state
                s2 = env.step(a)
                steps.append((s, a, s2))
                ev = run.observe(s, a, s2)
                if ev.kind == EVENT_TERM:
                    return steps, ev.hypothesis
            # simulate suspension: another consumer draws from its own context
            env.set_context((9, 9, len(steps)))
            env.step(RESET)
            env.set_context((1, 1, 1))
            env.step(RESET)  # realign after the decoy moved the state

    s1, h1 = run_with_interruptions(10 ** 9)
    s2, h2 = run_with_interruptions(7)
    assert h1.K == h2.K


def test_budget_exhaustion_marks_failed():
    cfg = ExplorerConfig(delta=0.1, eps=1.0, L=2, action_count=2, **FAST)
    run = ExplorerRun(cfg)
    run.steps_taken = exploration_step_budget(cfg, 1, cfg.delta)
    ev = run._decide()
    assert ev.kind == EVENT_TERM
    assert run.failed
