"""Round-based meta-algorithm: build a hypothesis with square-root stream
scheduling, then watch for changes with a sliding window of check-runs.

Each round r uses confidence delta'_r = 3*delta/(4*pi^2*r^2).  The building
phase interleaves explorer copies on disjoint quanta until one terminates;
its output (K_r, P_r) becomes the declared hypothesis.  The checking phase
repeatedly launches fresh explorer copies capped at W_r steps plus a policy
evaluation pass over P_r, and applies three window tests: too many
non-terminations start a new round, per-state evaluation failures remove
states, and states recurring in check-run outputs are added back.

Scaled-down constants (any *_scale != 1) make desk-scale experiments
feasible; they void the theorem constants and are recorded in the run log.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .cmp import RESET, START_STATE, Simulator
from .errors import ConfigError, StepCeilingError
from .explorer import (DEFAULT_C1, DEFAULT_C2, EPISODE_ENDING, EVENT_TERM,
                       TERMINATED, ExplorerConfig, ExplorerRun,
                       eval_episode_count, evaluation_accepts)
from .policies import Hypothesis, Policy
from .scheduler import StreamScheduler

PHASE_BUILDING = "B"
PHASE_CHECKING = "C"


@dataclass(frozen=True)
class MetaConfig:
    eps: float
    L: float
    action_count: int
    delta: float = 0.1
    C1: float = DEFAULT_C1
    C2: float = DEFAULT_C2
    constants_scale: float = 1.0
    window_scale: float = 1.0
    eval_scale: float = 1.0
    sample_scale: float = 1.0
    max_steps: int = 10 ** 6
    step_ceiling: int = 10 ** 8

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must be in (0,1)")
        if self.eps <= 0 or self.L < 1 or self.action_count < 2:
            raise ConfigError("invalid eps/L/action_count")

    @property
    def unsound(self) -> bool:
        return any(s != 1.0 for s in (self.constants_scale, self.window_scale,
                                      self.eval_scale, self.sample_scale))

    def explorer_config(self, delta_prime: float) -> ExplorerConfig:
        return ExplorerConfig(delta=delta_prime, eps=self.eps, L=self.L,
                              action_count=self.action_count,
                              eval_scale=self.eval_scale,
                              sample_scale=self.sample_scale)


def delta_r(delta: float, r: int) -> float:
    """Per-round confidence share; the series of 2*delta'_r sums below delta/2."""
    return 3.0 * delta / (4.0 * math.pi ** 2 * r ** 2)


def checking_params(K_size: int, A: int, L: float, eps: float,
                    delta_prime: float, C1: float = DEFAULT_C1,
                    C2: float = DEFAULT_C2, window_scale: float = 1.0):
    """(W_r, alpha_r, n_r) for a checking phase over a hypothesis of size K_size.

    When window_scale shrinks n_r below its nominal value, alpha_r is
    recomputed from the actual window length so the Hoeffding level is kept.
    """
    if K_size < 1:
        raise ConfigError("K_size must be >= 1")
    base_arg = K_size * A * L / (eps * delta_prime)
    w_arg = C2 * K_size * A * L / (eps * delta_prime)
    if base_arg <= 1.0 or w_arg <= 1.0:
        raise ConfigError("degenerate checking parameters (log argument <= 1)")
    base_log = math.log(base_arg)
    W = C1 * K_size * A * L ** 3 / eps ** 3 * math.log(w_arg) ** 3
    n_r = max(2, math.ceil(window_scale * base_log ** 3))
    if window_scale == 1.0:
        alpha = math.sqrt(math.log(1.0 / delta_prime) / (2.0 * base_log ** 3))
    else:
        alpha = math.sqrt(math.log(1.0 / delta_prime) / (2.0 * n_r))
    return W, alpha, n_r


@dataclass(frozen=True)
class CheckRunOutcome:
    part1_terminated: bool
    part1_hypothesis: Hypothesis  # None when part 1 was cut off manually
    eval_failures: frozenset
    index: int

    def __post_init__(self):
        if not self.part1_terminated and self.part1_hypothesis is not None:
            raise ConfigError("cut-off part 1 cannot carry an output")


@dataclass(frozen=True)
class WindowVerdict:
    new_round: bool
    removed: tuple = ()
    added: dict = field(default_factory=dict)
    t3_vacuous: bool = False


def apply_tests(outcomes, hyp: Hypothesis, alpha: float,
                delta_prime: float) -> WindowVerdict:
    """Evaluate the three window tests on a full window of outcomes."""
    n_r = len(outcomes)
    threshold = alpha + delta_prime
    b = sum(1 for o in outcomes if not o.part1_terminated)
    if b / n_r > threshold:
        return WindowVerdict(new_round=True)
    removed = tuple(s for s in hyp.states()
                    if sum(1 for o in outcomes if s in o.eval_failures) / n_r
                    > threshold)
    kept = hyp.K - set(removed)
    seen_outside = {}
    for o in outcomes:
        if o.part1_hypothesis is None:
            continue
        for s in o.part1_hypothesis.states():
            if s not in kept:
                seen_outside[s] = seen_outside.get(s, 0) + 1
    added = {}
    vacuous = bool(seen_outside) and delta_prime <= alpha
    for s in sorted(seen_outside):
        v_s = seen_outside[s]
        if delta_prime - (1.0 - v_s / n_r) > alpha:
            # the last found policy for s: newest output containing it
            for o in reversed(outcomes):
                if o.part1_hypothesis is not None and s in o.part1_hypothesis.K:
                    added[s] = o.part1_hypothesis.policy(s)
                    break
    return WindowVerdict(new_round=False, removed=removed, added=added,
                       t3_vacuous=vacuous)


@dataclass
class RunResult:
    steps: list           # (t, round, phase, unit, state, action, hyp_version)
    events: list          # dicts with at least {"t", "kind"}
    versions: list        # Hypothesis per version id
    rounds: int
    final_t: int
    halted: str           # "horizon" or "ceiling"


class _HorizonReached(Exception):
    pass


class MetaRun:
    """One full run of the meta-algorithm against a simulator."""

    def __init__(self, env: Simulator, cfg: MetaConfig):
        self.env = env
        self.cfg = cfg
        self.steps = []
        self.events = []
        self.versions = [Hypothesis.empty()]
        self._version = 0
        self._round = 0
        self._nsteps = 0
        self.hyp = self.versions[0]

    # ------------------------------------------------------------------
    def _event(self, kind: str, **fields):
        rec = {"t": self.env.t, "kind": kind}
        rec.update(fields)
        self.events.append(rec)

    def _set_hypothesis(self, hyp: Hypothesis, reason: str):
        self.versions.append(hyp)
        self._version += 1
        self.hyp = hyp
        self._event("hypothesis", version=self._version, reason=reason,
                    K=sorted(hyp.K))

    def _env_step(self, phase: str, unit: int, a: int):
        if self.env.t > self.cfg.max_steps:
            raise _HorizonReached
        if self._nsteps >= self.cfg.step_ceiling:
            self._event("step_ceiling", steps=self._nsteps)
            raise StepCeilingError(
                f"step ceiling {self.cfg.step_ceiling} hit in round "
                f"{self._round}; the environment may change too fast to build")
        t, s = self.env.t, self.env.state
        s2 = self.env.step(a)
        self.steps.append((t, self._round, phase, unit, s, a, self._version))
        self._nsteps += 1
        return s, s2

    # ------------------------------------------------------------------
    def run(self) -> RunResult:
        if self.cfg.unsound:
            self._event("unsound_constants",
                        constants_scale=self.cfg.constants_scale,
                        window_scale=self.cfg.window_scale,
                        eval_scale=self.cfg.eval_scale,
                        sample_scale=self.cfg.sample_scale)
        halted = "horizon"
        try:
            r = 0
            while True:
                r += 1
                self._round = r
                dp = delta_r(self.cfg.delta, r)
                self._event("round_start", r=r, delta_prime=dp)
                hyp = self._building_phase(r, dp)
                self._set_hypothesis(hyp, reason="building")
                self._checking_phase(r, dp)
        except _HorizonReached:
            pass
        return RunResult(steps=self.steps, events=self.events,
                         versions=self.versions, rounds=self._round,
                         final_t=self.env.t, halted=halted)

    # ------------------------------------------------------------------
    def _building_phase(self, r: int, dp: float) -> Hypothesis:
        sched = StreamScheduler()
        runs = {}
        ecfg = self.cfg.explorer_config(dp)
        while True:
            q, new, p = sched.next_quantum()
            for pn in new:
                runs[pn] = ExplorerRun(ecfg)
                self._event("stream_initiated", r=r, stream=pn, quantum=q)
            run_ = runs[p]
            self.env.set_context((1, r, p))
            ql = run_.quantum_length()
            done = 0
            while True:
                a = run_.next_action(self.env.state)
                s, s2 = self._env_step(PHASE_BUILDING, p, a)
                ev = run_.observe(s, a, s2)
                done += 1
                if ev.kind == EVENT_TERM:
                    self._event("building_done", r=r, stream=p, quantum=q,
                                K=sorted(ev.hypothesis.K),
                                budget_failed=run_.failed)
                    return ev.hypothesis
                if ql is None:
                    if ev.kind in EPISODE_ENDING:
                        break
                elif done >= ql:
                    break

    # ------------------------------------------------------------------
    def _checking_phase(self, r: int, dp: float) -> None:
        K_size = len(self.hyp.K)
        W, alpha, n_r = checking_params(
            K_size, self.cfg.action_count, self.cfg.L, self.cfg.eps, dp,
            C1=self.cfg.C1 * self.cfg.constants_scale, C2=self.cfg.C2,
            window_scale=self.cfg.window_scale)
        W = int(math.ceil(W))
        self._event("checking_params", r=r, W=W, alpha=alpha, n_r=n_r,
                    K_size=K_size)
        window = deque(maxlen=n_r)
        vacuous_logged = False
        i = 0
        while True:
            i += 1
            window.append(self._check_run(r, i, dp, W))
            if len(window) < n_r:
                continue
            verdict = apply_tests(list(window), self.hyp, alpha, dp)
            if verdict.t3_vacuous and not vacuous_logged:
                self._event("t3_vacuous", r=r, alpha=alpha, delta_prime=dp)
                vacuous_logged = True
            if verdict.new_round:
                self._event("test_new_round", r=r, check_run=i)
                return
            if verdict.removed:
                self._event("test_removed", r=r, check_run=i,
                            states=list(verdict.removed))
                self._set_hypothesis(self.hyp.with_removed(verdict.removed),
                                     reason="test_removed")
            if verdict.added:
                self._event("test_added", r=r, check_run=i,
                            states=sorted(verdict.added))
                self._set_hypothesis(self.hyp.with_added(verdict.added),
                                     reason="test_added")

    # ------------------------------------------------------------------
    def _check_run(self, r: int, i: int, dp: float, W: int) -> CheckRunOutcome:
        ecfg = self.cfg.explorer_config(dp)
        run_ = ExplorerRun(ecfg)
        self.env.set_context((2, r, i))
        part1_terminated = False
        part1_hyp = None
        done = 0
        while done < W:
            a = run_.next_action(self.env.state)
            s, s2 = self._env_step(PHASE_CHECKING, i, a)
            ev = run_.observe(s, a, s2)
            done += 1
            if ev.kind == EVENT_TERM:
                part1_terminated = True
                part1_hyp = ev.hypothesis
                break
        # part 2: one evaluation pass per declared policy
        n_eval = eval_episode_count(max(1, len(self.hyp.K)),
                                    self.cfg.action_count, self.cfg.L,
                                    self.cfg.eps, dp, self.cfg.eval_scale)
        failures = set()
        for s in self.hyp.states():
            if self._evaluate_policy(i, s, self.hyp.policy(s), n_eval):
                failures.add(s)
        self._event("check_run", r=r, index=i,
                    part1_terminated=part1_terminated,
                    eval_failures=sorted(failures))
        return CheckRunOutcome(part1_terminated, part1_hyp,
                               frozenset(failures), i)

    def _evaluate_policy(self, unit: int, target: int, policy: Policy,
                         n_eval: int) -> bool:
        """Run n_eval episodes of `policy` toward `target`; True means failed."""
        cap = math.ceil((1.0 + 1.0 / self.cfg.eps) * self.cfg.L)
        failures = 0
        length_sum = 0.0
        for _ in range(n_eval):
            aligned = False
            post = 0
            success = False
            for _step in range(cap):
                st = self.env.state
                if not aligned:
                    if st == START_STATE:
                        aligned = True
                    else:
                        self._env_step(PHASE_CHECKING, unit, RESET)
                        continue
                a = policy.action_for(st)
                _s, s2 = self._env_step(PHASE_CHECKING, unit, a)
                post += 1
                if s2 == target:
                    success = True
                    break
            failures += 0 if success else 1
            length_sum += post if success else cap
        return not evaluation_accepts(n_eval, failures, length_sum,
                                      self.cfg.eps, self.cfg.L)


def run_meta(env: Simulator, cfg: MetaConfig) -> RunResult:
    return MetaRun(env, cfg).run()
