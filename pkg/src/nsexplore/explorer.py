"""Resumable optimistic explorer for one stationary CMP.

The run is a state machine: the harness asks `next_action(state)`, applies it
to the environment, and feeds the observed transition back via `observe`.
All statistics reflect only transitions fed to this run, so many copies can
be interleaved on disjoint time steps.

Two internal phases alternate.  In state discovery the run samples every
(known state, action) pair up to a per-pair target by navigating to the
state with its accepted policy and executing the action once.  Once sampling
is satisfied, each observed-but-unknown state is scored by its optimistic
expected hitting time under an L1-confidence-ball model over the known set
plus one aggregate "unknown" state; the best candidate with optimistic time
<= L enters policy evaluation.  Evaluation runs a fixed number of episodes
from s0 and accepts when both the failure fraction and the truncated mean
episode length are small enough to certify tau <= (1+eps)L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cmp import RESET, START_STATE
from .errors import ConfigError, ContractError
from .policies import Hypothesis, Policy

DEFAULT_C1 = 216 * 15 ** 2 + 61  # = 48661
DEFAULT_C2 = 225

DISCOVERY = "discovery"
EVALUATION = "evaluation"
TERMINATED = "terminated"

EVENT_NONE = "none"
EVENT_EPISODE = "episode_ended"
EVENT_ACCEPT = "policy_accepted"
EVENT_FAIL = "policy_failed"
EVENT_BATCH = "discovery_batch_ended"
EVENT_TERM = "terminated"

# any of these marks the end of an evaluation episode
EPISODE_ENDING = frozenset({EVENT_EPISODE, EVENT_ACCEPT, EVENT_FAIL})


@dataclass(frozen=True)
class Event:
    kind: str
    state: int = None
    success: bool = None
    hypothesis: Hypothesis = None


@dataclass(frozen=True)
class ExplorerConfig:
    delta: float
    eps: float
    L: float
    action_count: int
    eval_scale: float = 1.0
    sample_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must be in (0,1), got {self.delta}")
        if self.eps <= 0.0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.L < 1.0:
            raise ConfigError(f"L must be >= 1, got {self.L}")
        if self.action_count < 2:
            raise ConfigError("need RESET plus at least one action")
        if self.eval_scale <= 0.0 or self.sample_scale <= 0.0:
            raise ConfigError("scales must be positive")

    @property
    def episode_cap(self) -> int:
        return math.ceil((1.0 + 1.0 / self.eps) * self.L)


def exploration_step_budget(config: ExplorerConfig, K_size: int, delta_prime: float,
                            C1: float = DEFAULT_C1, C2: float = DEFAULT_C2) -> int:
    """High-probability step bound for the subroutine on a stationary CMP."""
    if K_size < 1:
        raise ConfigError("K_size must be positive")
    if not 0.0 < delta_prime < 1.0:
        raise ConfigError(f"delta_prime must be in (0,1), got {delta_prime}")
    A, L, eps = config.action_count, config.L, config.eps
    log_term = math.log(C2 * K_size * A * L / (eps * delta_prime))
    return math.ceil(C1 * K_size * A * L ** 3 / eps ** 3 * log_term ** 3)


def eval_episode_count(K_size: int, A: int, L: float, eps: float, delta: float,
                       scale: float = 1.0) -> int:
    """Episodes per policy evaluation; mirrors the checking-phase window length."""
    arg = K_size * A * L / (eps * delta)
    if arg <= 1.0:
        raise ConfigError("degenerate evaluation parameters (log argument <= 1)")
    return max(4, math.ceil(scale * math.log(arg) ** 3))


def sample_target(K_size: int, A: int, L: float, delta: float,
                  scale: float = 1.0) -> int:
    """Per-(state, action) observation target before candidates are trusted."""
    arg = max(math.e, 2.0 * K_size * A * L / delta)
    return max(4, math.ceil(scale * 2.0 * L * math.log(arg)))


def evaluation_accepts(n_episodes: int, failures: int, length_sum: float,
                       eps: float, L: float) -> bool:
    """Accept when failures are rare and the truncated mean length is short.

    The failure-fraction test alone cannot separate tau <= (1+eps)L from
    slightly slower policies (a deterministic path of length within the
    episode cap never fails), so the truncated mean is checked against
    (1 + eps/2)L as well.
    """
    fail_ok = failures <= n_episodes * eps / (2.0 * (1.0 + eps)) + 1e-12
    mean_ok = length_sum / n_episodes <= (1.0 + eps / 2.0) * L + 1e-9
    return fail_ok and mean_ok


class ExplorerRun:
    """One suspendable execution of the subroutine."""

    def __init__(self, config: ExplorerConfig):
        self.config = config
        self.phase = DISCOVERY
        self.known = {START_STATE: Policy({})}
        self.seen = {START_STATE}
        self.n = {}        # (s, a) -> visits, non-RESET actions only
        self.counts = {}   # (s, a) -> {s': count}
        self.steps_taken = 0
        self.failed = False
        self._pending = None
        # discovery episode state
        self._pair = (START_STATE, 1)
        self._ep = 0
        # evaluation state
        self._target = None
        self._policy = None
        self._n_eval = 0
        self._episodes = 0
        self._failures = 0
        self._length_sum = 0.0
        self._aligned = False
        self._post = 0

    # ------------------------------------------------------------------
    @property
    def hypothesis(self) -> Hypothesis:
        return Hypothesis(dict(self.known))

    def quantum_length(self):
        """Steps a scheduler should grant: a full cap in discovery, one
        episode (None, bounded by the cap) in evaluation."""
        if self.phase == TERMINATED:
            raise ContractError("terminated run has no quantum")
        return self.config.episode_cap if self.phase == DISCOVERY else None

    # ------------------------------------------------------------------
    def next_action(self, state: int) -> int:
        if self.phase == TERMINATED:
            raise ContractError("next_action on a terminated run")
        if self.phase == DISCOVERY:
            ts, ta = self._pair
            a = ta if state == ts else self.known[ts].action_for(state)
        else:
            if not self._aligned:
                if state == START_STATE:
                    self._aligned = True
                else:
                    self._pending = (state, RESET)
                    return RESET
            a = self._policy.action_for(state)
        self._pending = (state, a)
        return a

    def observe(self, s: int, a: int, s_next: int) -> Event:
        if self.phase == TERMINATED:
            raise ContractError("observe on a terminated run")
        if self._pending != (s, a):
            raise ContractError(
                f"observed {(s, a)} but last emitted {self._pending}")
        self._pending = None
        self.steps_taken += 1
        self.seen.add(s)
        self.seen.add(s_next)
        if a != RESET:
            key = (s, a)
            self.n[key] = self.n.get(key, 0) + 1
            row = self.counts.setdefault(key, {})
            row[s_next] = row.get(s_next, 0) + 1
        if self.phase == DISCOVERY:
            return self._observe_discovery(s, a)
        return self._observe_evaluation(s_next)

    # ------------------------------------------------------------------
    def _observe_discovery(self, s: int, a: int) -> Event:
        self._ep += 1
        ts, ta = self._pair
        if not ((s == ts and a == ta) or self._ep >= self.config.episode_cap):
            return Event(EVENT_NONE)
        self._ep = 0
        return self._decide()

    def _observe_evaluation(self, s_next: int) -> Event:
        self._ep += 1
        if self._aligned:
            self._post += 1
        success = self._aligned and s_next == self._target
        if not success and self._ep < self.config.episode_cap:
            return Event(EVENT_NONE)
        length = self._post if success else self.config.episode_cap
        self._episodes += 1
        self._failures += 0 if success else 1
        self._length_sum += length
        self._ep = 0
        self._post = 0
        self._aligned = False
        if self._episodes < self._n_eval:
            return Event(EVENT_EPISODE, success=success)
        accepted = evaluation_accepts(self._n_eval, self._failures,
                                      self._length_sum, self.config.eps,
                                      self.config.L)
        target = self._target
        if accepted:
            self.known[target] = self._policy
        ev = Event(EVENT_ACCEPT if accepted else EVENT_FAIL,
                   state=target, success=success)
        dec = self._decide()
        if dec.kind == EVENT_TERM:
            return dec
        return ev

    # ------------------------------------------------------------------
    def _decide(self) -> Event:
        """Pick the next internal activity at an episode boundary."""
        cfg = self.config
        budget = exploration_step_budget(cfg, len(self.known), cfg.delta)
        if self.steps_taken >= budget:
            self.failed = True
            return self._terminate()
        tgt = sample_target(len(self.known), cfg.action_count, cfg.L,
                            cfg.delta, cfg.sample_scale)
        under = [(self.n.get((s, a), 0), s, a)
                 for s in sorted(self.known)
                 for a in range(1, cfg.action_count)
                 if self.n.get((s, a), 0) < tgt]
        if under:
            _cnt, s, a = min(under)
            self.phase = DISCOVERY
            self._pair = (s, a)
            return Event(EVENT_BATCH)
        viable = []
        for c in sorted(self.seen - set(self.known)):
            tau, pol = self._optimistic_reach(c)
            if tau <= cfg.L + 1e-9:
                viable.append((tau, c, pol))
        if viable:
            _tau, c, pol = min(viable, key=lambda x: (x[0], x[1]))
            self.phase = EVALUATION
            self._target = c
            self._policy = pol
            self._n_eval = eval_episode_count(len(self.known), cfg.action_count,
                                              cfg.L, cfg.eps, cfg.delta,
                                              cfg.eval_scale)
            self._episodes = 0
            self._failures = 0
            self._length_sum = 0.0
            self._ep = 0
            self._post = 0
            self._aligned = False
            return Event(EVENT_BATCH)
        return self._terminate()

    def _terminate(self) -> Event:
        self.phase = TERMINATED
        return Event(EVENT_TERM, hypothesis=self.hypothesis)

    # ------------------------------------------------------------------
    def _optimistic_reach(self, cand: int):
        """Optimistic expected hitting time of `cand` and the greedy policy.

        Model states: known states + the candidate + one aggregate state for
        everything else.  The aggregate and RESET behave exactly (RESET
        semantics are given); all other rows carry an L1 confidence ball
        around the empirical distribution.
        """
        cfg = self.config
        ks = sorted(self.known)
        model = {s: i for i, s in enumerate(ks)}
        m = len(ks) + 2
        ci = m - 2   # candidate index
        ui = m - 1   # aggregate-unknown index
        s0i = model[START_STATE]
        nA = cfg.action_count - 1  # non-RESET actions
        phat = np.zeros((len(ks), nA, m))
        rad = np.full((len(ks), nA), 2.0)
        for i, s in enumerate(ks):
            for a in range(1, cfg.action_count):
                cnt = self.n.get((s, a), 0)
                if cnt == 0:
                    phat[i, a - 1, ui] = 1.0
                    continue
                for s2, k in self.counts[(s, a)].items():
                    j = model.get(s2, ci if s2 == cand else ui)
                    phat[i, a - 1, j] += k / cnt
                rad[i, a - 1] = math.sqrt(
                    2.0 * math.log(2.0 ** m * cfg.action_count * cnt * cnt
                                   / cfg.delta) / cnt)
        V = np.zeros(m)
        limit = cfg.L + 1.0
        for _ in range(1000):
            V[ci] = 0.0
            V[ui] = 1.0 + V[s0i]
            reset_q = 1.0 + V[s0i]
            newV = V.copy()
            qvals = np.empty((len(ks), nA))
            best = int(np.argmin(V))
            order = [j for j in np.argsort(-V, kind="stable") if j != best]
            vdesc = V[order]
            for i in range(len(ks)):
                rows = phat[i]
                shift = np.minimum(rad[i] / 2.0, 1.0 - rows[:, best])
                sortedp = rows[:, order]
                before = np.concatenate(
                    [np.zeros((nA, 1)), np.cumsum(sortedp, axis=1)[:, :-1]], axis=1)
                removed = np.clip(shift[:, None] - before, 0.0, sortedp)
                qvals[i] = 1.0 + rows @ V + shift * V[best] - removed @ vdesc
                newV[model[ks[i]]] = min(reset_q, float(qvals[i].min()))
            newV[ci] = 0.0
            newV[ui] = 1.0 + newV[s0i]
            if newV[s0i] > limit:
                return INF_TAU, None
            if np.max(np.abs(newV - V)) < 1e-9:
                V = newV
                break
            V = newV
        # greedy extraction with the same optimistic operator
        actions = {}
        reset_q = 1.0 + V[s0i]
        best = int(np.argmin(V))
        order = [j for j in np.argsort(-V, kind="stable") if j != best]
        vdesc = V[order]
        for i, s in enumerate(ks):
            rows = phat[i]
            shift = np.minimum(rad[i] / 2.0, 1.0 - rows[:, best])
            sortedp = rows[:, order]
            before = np.concatenate(
                [np.zeros((nA, 1)), np.cumsum(sortedp, axis=1)[:, :-1]], axis=1)
            removed = np.clip(shift[:, None] - before, 0.0, sortedp)
            q = 1.0 + rows @ V + shift * V[best] - removed @ vdesc
            a_best = int(np.argmin(q)) + 1
            actions[s] = RESET if reset_q <= float(q.min()) else a_best
        return float(V[s0i]), Policy(actions)


INF_TAU = math.inf
