import numpy as np
import pytest

from nsexplore import envs, oracle
from nsexplore.cmp import START_STATE
from nsexplore.errors import ConfigError, PerturbationError


def test_chain_structure():
    k = envs.chain(3, actions=3, noise=0.1)
    assert k.state_count == 4 and k.action_count == 3
    assert k.probs[0, 1, 1] == pytest.approx(0.9)
    assert k.probs[0, 1, 0] == pytest.approx(0.1)
    assert k.probs[2, 2, 1] == 1.0  # extra action walks back


def test_combolock_is_seeded_and_solvable():
    a = envs.combolock(3, actions=3, seed=0)
    b = envs.combolock(3, actions=3, seed=0)
    assert a.same_as(b)
    assert oracle.s_arrow_l(a, 4) == frozenset(range(4))


def test_combolock_seed_changes_code():
    kernels = [envs.combolock(4, actions=3, seed=s) for s in range(6)]
    assert any(not kernels[0].same_as(k) for k in kernels[1:])


def test_grid_reaches_corner():
    k = envs.grid(3, 3, slip=0.0)
    assert oracle.min_nav_time(k, frozenset(range(9)), 8) == pytest.approx(4.0)


def test_random_tree_all_discoverable():
    k = envs.random_tree(5, actions=3, seed=2)
    assert oracle.s_arrow_l(k, 6) == frozenset(range(6))


def test_generate_env_dispatch_and_errors():
    k = envs.generate_env("chain", {"n": 2}, seed=0)
    assert k.state_count == 3
    with pytest.raises(ConfigError):
        envs.generate_env("volcano", {}, seed=0)


def test_break_edge_removes_state():
    k = envs.chain(2)
    out = envs.break_edge(k, 2, 2.0)
    assert 2 not in oracle.s_arrow_l(out, 2.0)
    with pytest.raises(PerturbationError):
        envs.break_edge(k, 0, 2.0)


def test_add_shortcut_grows_set():
    # use the spare walk-back action so the rest of the chain stays intact
    k = envs.chain(4, actions=3)
    before = oracle.s_arrow_l(k, 2.0)
    assert 4 not in before
    out = envs.add_shortcut(k, 4, 2.0, via=1, action=2)
    after = oracle.s_arrow_l(out, 2.0)
    assert 4 in after and before < after
    with pytest.raises(PerturbationError):
        envs.add_shortcut(k, 1, 2.0)  # already discoverable
    with pytest.raises(PerturbationError):
        # rerouting the only forward action would orphan state 2
        envs.add_shortcut(envs.chain(4), 4, 2.0, via=1, action=1)


def test_degrade_policy_slows_state():
    k = envs.chain(2)
    out = envs.degrade_policy(k, 2, 2.0, 1.0, keep=0.02)
    everything = frozenset(range(3))
    assert oracle.min_nav_time(out, everything, 2) > 4.0


def test_perturb_rejects_identity_and_unknown():
    k = envs.chain(2)
    with pytest.raises(ConfigError):
        envs.perturb(k, "rotate", {}, 2.0)
