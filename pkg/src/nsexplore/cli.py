"""Command line entry point: run experiments, query the oracle, verify the
scheduler lemmas, and evaluate the step bound."""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import experiment, metrics, oracle
from .cmp import load_kernel
from .errors import ConfigError, ExplorationError, StepCeilingError
from .scheduler import StreamScheduler


def _parse_seeds(text: str):
    """"0..19" or "0,3,7" or "5"."""
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(","))


def cmd_run(args) -> int:
    config = experiment.ExperimentConfig.load(args.config)
    overrides = {}
    if args.seeds:
        overrides["seeds"] = _parse_seeds(args.seeds)
    if args.out:
        overrides["output_dir"] = args.out
    if overrides:
        doc = config.to_json()
        doc.update(overrides)
        config = experiment.ExperimentConfig.from_json(doc)
    code = experiment.run_experiment(config, workers=args.workers)
    if code == experiment.EXIT_CEILING:
        print("step ceiling hit in at least one replica", file=sys.stderr)
    return code


def cmd_oracle(args) -> int:
    kernel = load_kernel(args.kernel)
    L = args.L
    reach = oracle.s_l(kernel, L)
    discover = oracle.s_arrow_l(kernel, L)
    print(f"S_L (L={L:g}): {sorted(reach)}")
    print(f"incrementally discoverable: {sorted(discover)}")
    print("state  tau_min(via discoverable)")
    everything = frozenset(range(kernel.state_count))
    for s in range(kernel.state_count):
        tau = oracle.min_nav_time(kernel, everything, s)
        txt = "inf" if math.isinf(tau) else f"{tau:.4f}"
        print(f"{s:>5}  {txt}")
    return 0


def cmd_verify_lemmas(args) -> int:
    sched = StreamScheduler()
    for q in range(1, args.q_max + 1):
        sched.next_quantum()
        want = math.isqrt(q - 1) + 1  # = ceil(sqrt(q))
        have = len(sched.quanta_served)
        if have != want:
            print(f"lemma 1 fails at q={q}: {have} streams", file=sys.stderr)
            return 1
        b = math.isqrt(q)
        if b * b == q:
            served = set(sched.quanta_served.values())
            if served != {b}:
                print(f"lemma 2 fails at q={q}: served={sorted(served)}",
                      file=sys.stderr)
                return 1
        if sched.fairness_gap() > 1:
            print(f"fairness gap exceeds 1 at q={q}", file=sys.stderr)
            return 1
    print(f"scheduler lemmas hold through q={args.q_max}")
    return 0


def cmd_bound(args) -> int:
    config = experiment.ExperimentConfig.load(args.config)
    schedule = experiment.build_schedule(config)
    algo = config.algorithm
    report = metrics.bound_for_schedule(
        schedule, float(algo["L"]), float(algo["eps"]),
        float(algo.get("delta", 0.1)),
        float(algo.get("C1", 48661)), float(algo.get("C2", 225)))
    print(json.dumps(report.to_json(), sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explore",
        description="autonomous exploration in piecewise-stationary CMPs")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run seeded experiment replicas")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--seeds", help='e.g. "0..19" or "0,3,7"')
    run_p.add_argument("--out", help="output directory override")
    run_p.add_argument("--workers", type=int, default=1)
    run_p.set_defaults(fn=cmd_run)

    oracle_p = sub.add_parser("oracle", help="print ground-truth sets and times")
    oracle_p.add_argument("--kernel", required=True)
    oracle_p.add_argument("--L", type=float, required=True)
    oracle_p.set_defaults(fn=cmd_oracle)

    lem_p = sub.add_parser("verify-lemmas",
                           help="check the exact scheduler invariants")
    lem_p.add_argument("--q-max", type=int, default=10000)
    lem_p.set_defaults(fn=cmd_verify_lemmas)

    bound_p = sub.add_parser("bound", help="evaluate the step bound for a config")
    bound_p.add_argument("--config", required=True)
    bound_p.set_defaults(fn=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StepCeilingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return experiment.EXIT_CEILING
    except (ConfigError, ExplorationError, FileNotFoundError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return experiment.EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
