"""Experiment configuration and seeded replica execution."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import envs, metrics
from .cmp import ChangeSchedule, Simulator, load_kernel
from .errors import ConfigError, StepCeilingError
from .meta import MetaConfig, run_meta
from .runlog import write_runlog, write_steps_csv, write_summary

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CEILING = 3


@dataclass(frozen=True)
class ExperimentConfig:
    env: dict                 # {"kind":..., "params":...} or {"kernel_file":...}
    algorithm: dict           # MetaConfig fields
    changes: tuple = ()       # [{"at": t, "perturb": {"kind":..., "params":...}}]
    seeds: tuple = (0,)
    output_dir: str = "runs"
    env_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "changes", tuple(self.changes))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ConfigError("need at least one seed")

    def to_json(self) -> dict:
        return {"env": self.env, "algorithm": self.algorithm,
                "changes": list(self.changes), "seeds": list(self.seeds),
                "output_dir": self.output_dir, "env_seed": self.env_seed}

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        try:
            return cls(env=doc["env"], algorithm=doc["algorithm"],
                       changes=doc.get("changes", ()),
                       seeds=doc.get("seeds", (0,)),
                       output_dir=doc.get("output_dir", "runs"),
                       env_seed=doc.get("env_seed", 0))
        except KeyError as exc:
            raise ConfigError(f"experiment config missing field {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def build_schedule(config: ExperimentConfig) -> ChangeSchedule:
    env = config.env
    if "kernel_file" in env:
        kernel = load_kernel(env["kernel_file"])
    else:
        kernel = envs.generate_env(env["kind"], env.get("params", {}),
                                   seed=config.env_seed)
    algo = config.algorithm
    L, eps = float(algo["L"]), float(algo["eps"])
    segments = [(1, kernel)]
    current = kernel
    for change in sorted(config.changes, key=lambda c: int(c["at"])):
        spec = change["perturb"]
        current = envs.perturb(current, spec["kind"], spec.get("params", {}),
                               L, eps)
        segments.append((int(change["at"]), current))
    return ChangeSchedule(tuple(segments))


def meta_config(config: ExperimentConfig, action_count: int) -> MetaConfig:
    algo = dict(config.algorithm)
    algo.setdefault("action_count", action_count)
    try:
        return MetaConfig(**algo)
    except TypeError as exc:
        raise ConfigError(f"bad algorithm parameters: {exc}") from exc


def output_dir(config: ExperimentConfig) -> Path:
    return Path(os.environ.get("EXPLORE_LOG_DIR", config.output_dir))


def run_replica(config: ExperimentConfig, seed: int) -> int:
    """Run one seed end to end; returns its exit code."""
    schedule = build_schedule(config)
    cfg = meta_config(config, schedule.action_count)
    out = output_dir(config) / f"seed_{seed}"
    out.mkdir(parents=True, exist_ok=True)
    env = Simulator(schedule, seed=seed)
    result = run_meta(env, cfg)
    flags = metrics.account(result, schedule, cfg.L, cfg.eps)
    summary = metrics.summarize(result, schedule, cfg.L, cfg.eps, cfg.delta,
                                cfg.C1, cfg.C2, cfg.unsound)
    summary["seed"] = seed
    # the embedded config omits replica-independent fields so re-running a
    # single seed reproduces its log byte for byte
    cfg_doc = config.to_json()
    cfg_doc.pop("seeds")
    cfg_doc.pop("output_dir")
    write_runlog(out / "runlog.jsonl", result,
                 meta={"seed": seed, "config": cfg_doc})
    write_steps_csv(out / "steps.csv", result, flags)
    write_summary(out / "summary.json", summary)
    return EXIT_OK


def _replica_job(args):
    config_doc, seed = args
    config = ExperimentConfig.from_json(config_doc)
    try:
        return run_replica(config, seed)
    except StepCeilingError:
        return EXIT_CEILING


def run_experiment(config: ExperimentConfig, workers: int = 1) -> int:
    """Run all seeds; nonzero when any replica hit the step ceiling."""
    jobs = [(config.to_json(), seed) for seed in config.seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_replica_job, jobs))
    else:
        codes = [_replica_job(job) for job in jobs]
    return max(codes) if codes else EXIT_OK
