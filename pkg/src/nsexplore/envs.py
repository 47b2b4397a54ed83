"""Seeded environment generators and oracle-verified perturbations."""

from __future__ import annotations

import numpy as np

from . import oracle
from .cmp import RESET, START_STATE, Kernel
from .errors import ConfigError, PerturbationError


def _empty_table(S: int, A: int) -> np.ndarray:
    p = np.zeros((S, A, S))
    p[:, RESET, START_STATE] = 1.0
    return p


def chain(n: int, actions: int = 2, noise: float = 0.0) -> Kernel:
    """Line of n links (n+1 states); action 1 advances, extra actions go back."""
    if n < 1 or actions < 2 or not 0.0 <= noise < 1.0:
        raise ConfigError("chain needs n >= 1, actions >= 2, noise in [0,1)")
    S = n + 1
    p = _empty_table(S, actions)
    for s in range(S):
        nxt = min(s + 1, n)
        p[s, 1, nxt] += 1.0 - noise
        p[s, 1, s] += noise
        for a in range(2, actions):
            p[s, a, max(s - 1, 0)] = 1.0
    return Kernel(p)


def combolock(n: int, actions: int = 2, noise: float = 0.0,
              seed: int = 0) -> Kernel:
    """Depth-n lock: one seeded correct action per level, wrong actions reset."""
    if n < 1 or actions < 2 or not 0.0 <= noise < 1.0:
        raise ConfigError("combolock needs n >= 1, actions >= 2, noise in [0,1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(10,)))
    S = n + 1
    p = _empty_table(S, actions)
    for s in range(S):
        good = int(rng.integers(1, actions))
        nxt = min(s + 1, n)
        for a in range(1, actions):
            if a == good:
                p[s, a, nxt] += 1.0 - noise
                p[s, a, START_STATE] += noise
            else:
                p[s, a, START_STATE] = 1.0
    return Kernel(p)


def grid(width: int, height: int, slip: float = 0.0) -> Kernel:
    """Directed grid: action 1 moves right, action 2 moves down, slips stay."""
    if width < 1 or height < 1 or not 0.0 <= slip < 1.0:
        raise ConfigError("grid needs positive dimensions and slip in [0,1)")
    S = width * height
    p = _empty_table(S, 3)

    def sid(x, y):
        return y * width + x

    for y in range(height):
        for x in range(width):
            s = sid(x, y)
            right = sid(min(x + 1, width - 1), y)
            down = sid(x, min(y + 1, height - 1))
            p[s, 1, right] += 1.0 - slip
            p[s, 1, s] += slip
            p[s, 2, down] += 1.0 - slip
            p[s, 2, s] += slip
    return Kernel(p)


def random_tree(n: int, actions: int = 3, noise: float = 0.0,
                seed: int = 0) -> Kernel:
    """Random rooted tree; each edge is one action from the parent.

    Unused action slots fall back to the start state, so every wrong move
    costs a restart.
    """
    if n < 1 or actions < 2 or not 0.0 <= noise < 1.0:
        raise ConfigError("random_tree needs n >= 1, actions >= 2, noise in [0,1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(11,)))
    S = n + 1
    slots = {s: list(range(1, actions)) for s in range(S)}
    edge = {}  # (parent, action) -> child
    for child in range(1, S):
        parents = [s for s in range(child) if slots[s]]
        if not parents:
            raise ConfigError("not enough action slots for the requested size")
        parent = int(parents[rng.integers(0, len(parents))])
        a = slots[parent].pop(0)
        edge[(parent, a)] = child
    p = _empty_table(S, actions)
    for s in range(S):
        for a in range(1, actions):
            child = edge.get((s, a))
            if child is None:
                p[s, a, START_STATE] = 1.0
            else:
                p[s, a, child] += 1.0 - noise
                p[s, a, START_STATE] += noise
    return Kernel(p)


_GENERATORS = {
    "chain": chain,
    "combolock": combolock,
    "grid": grid,
    "random_tree": random_tree,
}


def generate_env(kind: str, params: dict, seed: int = 0) -> Kernel:
    if kind not in _GENERATORS:
        raise ConfigError(f"unknown environment kind {kind!r}; "
                          f"choose from {sorted(_GENERATORS)}")
    fn = _GENERATORS[kind]
    kwargs = dict(params)
    if kind in ("combolock", "random_tree"):
        kwargs.setdefault("seed", seed)
    return fn(**kwargs)


# ---------------------------------------------------------------------------
# perturbations; each one is verified against the oracle and must change the
# qualitative structure it claims to change


def _redirect_incoming(kernel: Kernel, target: int, to: int) -> np.ndarray:
    p = kernel.probs.copy()
    for s in range(kernel.state_count):
        for a in range(1, kernel.action_count):
            mass = p[s, a, target]
            if mass > 0.0 and s != target:
                p[s, a, target] = 0.0
                p[s, a, to] += mass
    return p


def break_edge(kernel: Kernel, state: int, L: float) -> Kernel:
    """Make `state` leave the discoverable set by rerouting its incoming mass."""
    before = oracle.s_arrow_l(kernel, L)
    if state not in before or state == START_STATE:
        raise PerturbationError(
            f"state {state} is not a breakable member of the discoverable set")
    out = Kernel(_redirect_incoming(kernel, state, START_STATE))
    after = oracle.s_arrow_l(out, L)
    if state in after:
        raise PerturbationError(
            f"breaking state {state} failed: still discoverable "
            f"(before={sorted(before)}, after={sorted(after)})")
    return out


def add_shortcut(kernel: Kernel, state: int, L: float,
                 via: int = START_STATE, action: int = 1) -> Kernel:
    """Pull `state` into the discoverable set with a deterministic edge."""
    before = oracle.s_arrow_l(kernel, L)
    if state in before:
        raise PerturbationError(f"state {state} is already discoverable")
    if via not in before:
        raise PerturbationError(f"shortcut origin {via} is not discoverable")
    p = kernel.probs.copy()
    p[via, action, :] = 0.0
    p[via, action, state] = 1.0
    out = Kernel(p)
    after = oracle.s_arrow_l(out, L)
    if not (state in after and before < after):
        raise PerturbationError(
            f"shortcut to {state} failed to grow the discoverable set")
    return out


def degrade_policy(kernel: Kernel, state: int, L: float, eps: float,
                   keep: float = 0.05) -> Kernel:
    """Slow every route into `state` so no policy reaches it within (1+eps)L."""
    if state == START_STATE:
        raise PerturbationError("cannot degrade the start state")
    everything = frozenset(range(kernel.state_count))
    before = oracle.min_nav_time(kernel, everything, state)
    if before > (1.0 + eps) * L:
        raise PerturbationError(f"state {state} is already slow to reach")
    p = kernel.probs.copy()
    for s in range(kernel.state_count):
        for a in range(1, kernel.action_count):
            mass = p[s, a, state]
            if mass > 0.0 and s != state:
                p[s, a, state] = mass * keep
                p[s, a, s] += mass * (1.0 - keep)
    out = Kernel(p)
    after = oracle.min_nav_time(out, everything, state)
    if after <= (1.0 + eps) * L:
        raise PerturbationError(
            f"degrading routes into {state} left min nav time at {after:.3f}")
    return out


def perturb(kernel: Kernel, kind: str, params: dict, L: float,
            eps: float = 1.0) -> Kernel:
    if kind == "break_edge":
        out = break_edge(kernel, int(params["state"]), L)
    elif kind == "add_shortcut":
        out = add_shortcut(kernel, int(params["state"]), L,
                           via=int(params.get("via", START_STATE)),
                           action=int(params.get("action", 1)))
    elif kind == "degrade_policy":
        out = degrade_policy(kernel, int(params["state"]), L, eps,
                             keep=float(params.get("keep", 0.05)))
    else:
        raise ConfigError(f"unknown perturbation kind {kind!r}")
    if kernel.same_as(out):
        raise PerturbationError("perturbation produced an identical kernel")
    return out
