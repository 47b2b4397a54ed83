"""Ground-truth navigation-time computations on a known kernel.

Used by metrics, environment validation, and tests only; the learner never
sees any of this.  Expected hitting times are exact: a graph pass isolates
the states from which the target is reached with probability 1, then a
linear solve (for a fixed policy) or policy iteration (for the optimum over
policies) produces the value.  Unreachable means +inf, never a sentinel.
"""

from __future__ import annotations

import math

import numpy as np

from .cmp import RESET, START_STATE, Kernel
from .policies import Hypothesis, Policy

INF = math.inf
_TOL = 1e-9


def _supports(kernel: Kernel):
    p = kernel.probs
    return [[frozenset(np.flatnonzero(p[s, a] > 0.0).tolist())
             for a in range(kernel.action_count)]
            for s in range(kernel.state_count)]


def _action_ids(kernel: Kernel, allowed, target):
    """Available actions per state: all on `allowed`, RESET elsewhere."""
    acts = []
    for s in range(kernel.state_count):
        if s == target:
            acts.append(())
        elif s in allowed:
            acts.append(tuple(range(kernel.action_count)))
        else:
            acts.append((RESET,))
    return acts


def _almost_sure_set(kernel: Kernel, acts, supports, target):
    """States from which some policy reaches `target` with probability 1.

    Iterated positive-probability attractor restricted to the surviving set.
    Also returns one witnessing (proper) action per state.
    """
    live = set(range(kernel.state_count))
    while True:
        attr = {target}
        witness = {}
        changed = True
        while changed:
            changed = False
            for s in sorted(live - attr):
                for a in acts[s]:
                    supp = supports[s][a]
                    if supp <= live and supp & attr:
                        attr.add(s)
                        witness[s] = a
                        changed = True
                        break
        if attr == live:
            return live, witness
        live = attr


def _policy_values(kernel: Kernel, action_of, target, live):
    """Expected hitting times of `target` for the fixed proper policy on `live`."""
    states = sorted(live - {target})
    if not states:
        return {target: 0.0}
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    A = np.eye(n)
    b = np.ones(n)
    for s in states:
        row = kernel.probs[s, action_of[s]]
        for s2 in np.flatnonzero(row > 0.0):
            s2 = int(s2)
            if s2 != target:
                A[idx[s], idx[s2]] -= row[s2]
    v = np.linalg.solve(A, b)
    out = {target: 0.0}
    for s in states:
        out[s] = float(v[idx[s]])
    return out


def _ssp(kernel: Kernel, allowed, target):
    """Min expected hitting time of `target` over policies on `allowed`.

    Policy iteration from the attractor's witness policy; exact at the fixed
    point.  Returns (value at s0, optimal Policy or None).
    """
    allowed = frozenset(allowed)
    supports = _supports(kernel)
    acts = _action_ids(kernel, allowed, target)
    live, witness = _almost_sure_set(kernel, acts, supports, target)
    if START_STATE not in live:
        return INF, None
    action_of = {s: witness[s] for s in live if s != target}
    while True:
        vals = _policy_values(kernel, action_of, target, live)
        improved = False
        for s in sorted(live - {target}):
            qs = []
            for a in acts[s]:
                if not (supports[s][a] <= live):
                    continue  # leaving `live` forfeits prob-1 reachability
                row = kernel.probs[s, a]
                q = 1.0 + float(sum(row[s2] * vals[int(s2)]
                                    for s2 in np.flatnonzero(row > 0.0)))
                qs.append((q, a))
            q_min, a_min = min(qs, key=lambda x: (x[0], x[1]))
            current_q = next(q for q, a in qs if a == action_of[s])
            if q_min < current_q - 1e-12:
                action_of[s] = a_min
                improved = True
        if not improved:
            pol = Policy({s: action_of[s] for s in sorted(action_of) if s in allowed})
            return vals.get(START_STATE, 0.0), pol


def nav_time(kernel: Kernel, pi: Policy, target: int) -> float:
    """Expected steps to first reach `target` from s0 under `pi` (Def. of tau)."""
    if target == START_STATE:
        return 0.0
    supports = _supports(kernel)
    action_of = {s: pi.action_for(s) for s in range(kernel.state_count)}
    # forward closure from s0 under the chain
    reach = {START_STATE}
    frontier = [START_STATE]
    while frontier:
        s = frontier.pop()
        if s == target:
            continue
        for s2 in supports[s][action_of[s]]:
            if s2 not in reach:
                reach.add(s2)
                frontier.append(s2)
    if target not in reach:
        return INF
    # hitting prob is 1 iff every reachable state can still reach the target
    can = {target}
    changed = True
    while changed:
        changed = False
        for s in reach - can:
            if supports[s][action_of[s]] & can:
                can.add(s)
                changed = True
    if not reach <= can:
        return INF
    vals = _policy_values(kernel, action_of, target, reach | {target})
    return vals[START_STATE]


def min_nav_time(kernel: Kernel, allowed, target: int) -> float:
    """Min over policies on `allowed` of the expected hitting time of `target`."""
    if target == START_STATE:
        return 0.0
    value, _pol = _ssp(kernel, allowed, target)
    return value


def optimal_policy(kernel: Kernel, allowed, target: int):
    """Argmin companion of min_nav_time; None when the target is unreachable."""
    _value, pol = _ssp(kernel, allowed, target)
    return pol


def s_l(kernel: Kernel, L: float):
    """States whose unrestricted min navigation time is at most L."""
    if L < 1:
        raise ValueError("L must be >= 1")
    everything = frozenset(range(kernel.state_count))
    return frozenset(
        s for s in range(kernel.state_count)
        if min_nav_time(kernel, everything, s) <= L + _TOL
    )


def s_arrow_l(kernel: Kernel, L: float):
    """Incrementally discoverable states: greedy closure from {s0}.

    Repeatedly adds any state whose min navigation time, over policies
    restricted to the current set, is at most L.  The fixpoint is
    order-independent (the operator is add-monotone).
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    known = {START_STATE}
    while True:
        added = False
        for s in range(kernel.state_count):
            if s in known:
                continue
            if min_nav_time(kernel, frozenset(known), s) <= L + _TOL:
                known.add(s)
                added = True
        if not added:
            return frozenset(known)


def hypothesis_valid(kernel: Kernel, hyp: Hypothesis, L: float, eps: float) -> bool:
    """True iff K covers the discoverable set and every policy is acceptable."""
    needed = s_arrow_l(kernel, L)
    if not needed <= hyp.K:
        return False
    bound = (1.0 + eps) * L + _TOL
    for s in hyp.states():
        if nav_time(kernel, hyp.policy(s), s) > bound:
            return False
    return True
