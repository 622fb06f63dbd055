"""Experiment orchestration: the epoch loop, baseline, ablations and metrics."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import random
import time
from dataclasses import dataclass, field
from itertools import repeat
from os import PathLike
from typing import Iterator, Sequence

from genetic_curriculum.config import Mode, RunConfig
from genetic_curriculum.curriculum import (
    Curriculum,
    EmptyCurriculumError,
    cycle_schedule,
    evaluate_population,
    evaluate_scenario,
    gc_config_dict,
    generate_curriculum,
    write_archive,
)
from genetic_curriculum.envs import EnvSpec
from genetic_curriculum.learner import Policy, train_epoch
from genetic_curriculum.rng import substream
from genetic_curriculum.scenario import (
    Scenario,
    genetic_distance,
    random_initial_scenario,
    read_jsonl,
)

log = logging.getLogger(__name__)

METRICS_HEADER = (
    "epoch",
    "mean_reward",
    "failure_rate",
    "stderr",
    "curriculum_size",
    "mean_genetic_distance",
    "env_steps",
    "wall_seconds",
)

REJECTION_ATTEMPTS_PER_SLOT = 20


@dataclass
class MetricsRecord:
    epoch: int
    mean_reward: float
    failure_rate: float
    stderr: float
    curriculum_size: int
    mean_genetic_distance: float | None
    env_steps: int
    wall_seconds: float

    def row(self) -> list[str]:
        mgd = "" if self.mean_genetic_distance is None else repr(self.mean_genetic_distance)
        return [
            str(self.epoch),
            repr(self.mean_reward),
            repr(self.failure_rate),
            repr(self.stderr),
            str(self.curriculum_size),
            mgd,
            str(self.env_steps),
            f"{self.wall_seconds:.3f}",
        ]


@dataclass
class FailureReport:
    rate: float
    stderr: float
    outcomes: list[bool]
    mean_reward: float

    @property
    def failures(self) -> int:
        return sum(self.outcomes)


@dataclass
class RunResult:
    config: RunConfig
    metrics: list[MetricsRecord]
    policy: Policy
    curricula: list[list[Scenario]] = field(default_factory=list)
    out_dir: str | None = None

    @property
    def final(self) -> MetricsRecord:
        return self.metrics[-1]


def make_test_set(n: int, seed: int) -> list[Scenario]:
    """The fixed test set for ``seed``; identical across training modes."""
    rng = substream(seed, "test-set")
    return [random_initial_scenario(rng) for _ in range(n)]


def evaluate_failures(policy: Policy, spec: EnvSpec, scenarios: Sequence[Scenario], workers: int = 1) -> FailureReport:
    results = evaluate_population(policy, scenarios, spec, workers)
    n = len(results)
    outcomes = [r.failed for r in results]
    rate = sum(outcomes) / n
    return FailureReport(
        rate=rate,
        stderr=math.sqrt(rate * (1.0 - rate) / n),
        outcomes=outcomes,
        mean_reward=sum(r.reward for r in results) / n,
    )


def failure_rate(policy: Policy, spec: EnvSpec, n: int, seed: int) -> tuple[float, float, list[bool]]:
    """Greedy failure rate on ``n`` random test scenarios drawn from ``seed``."""
    if n < 1:
        raise ValueError("n must be positive")
    report = evaluate_failures(policy, spec, make_test_set(n, seed))
    return report.rate, report.stderr, report.outcomes


def random_source(rng: random.Random) -> Iterator[Scenario]:
    while True:
        yield random_initial_scenario(rng)


def rejection_sample_failures(
    policy: Policy, spec: EnvSpec, wanted: int, rng: random.Random, attempts: int
) -> tuple[list[Scenario], int]:
    """Random scenarios ``policy`` fails, in discovery order, plus attempts used."""
    found: list[Scenario] = []
    seen: set[Scenario] = set()
    used = 0
    while used < attempts and len(found) < wanted:
        s = random_initial_scenario(rng)
        used += 1
        if s in seen:
            continue
        if evaluate_scenario(policy, s, spec).failed:
            found.append(s)
            seen.add(s)
    return found, used


class RunWriter:
    """Owns the run directory: run.json, metrics.csv, curricula and policies."""

    def __init__(self, out_dir: str | PathLike | None, cfg: RunConfig):
        self.out_dir = None if out_dir is None else os.fspath(out_dir)
        self.cfg = cfg
        if self.out_dir is None:
            return
        os.makedirs(os.path.join(self.out_dir, "curricula"), exist_ok=True)
        self.write_run_json(policy_hash=None)
        with open(self.metrics_path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(METRICS_HEADER)

    @property
    def metrics_path(self) -> str:
        return os.path.join(self.out_dir, "metrics.csv")

    def write_run_json(self, policy_hash: str | None) -> None:
        if self.out_dir is None:
            return
        payload = {
            "config": self.cfg.to_flat(),
            "master_seed": self.cfg.master_seed,
            "mode": self.cfg.mode.value,
            "policy_hash": policy_hash,
        }
        with open(os.path.join(self.out_dir, "run.json"), "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def append(self, record: MetricsRecord) -> None:
        if self.out_dir is None:
            return
        with open(self.metrics_path, "a", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(record.row())

    def archive(self, scenarios: Sequence[Scenario], epoch: int, frozen: Policy) -> None:
        if self.out_dir is None:
            return
        config = {"mode": self.cfg.mode.value, **{f"gc.{k}": v for k, v in gc_config_dict(self.cfg.gc).items()}}
        write_archive(scenarios, os.path.join(self.out_dir, "curricula"), epoch, frozen, config)

    def finish(self, policy: Policy) -> None:
        if self.out_dir is None:
            return
        digest = policy.save(os.path.join(self.out_dir, "policy.final"))
        self.write_run_json(policy_hash=digest)


def _epoch_curriculum(cfg: RunConfig, frozen: Policy, epoch: int) -> list[Scenario]:
    """Training scenarios for one epoch under ``cfg.mode``; empty means fall back."""
    seed, spec = cfg.master_seed, cfg.env
    if cfg.mode is Mode.BASELINE:
        return []
    if cfg.mode in (Mode.RANDOM_FAILURE, Mode.SINGLE_RUN):
        wanted = cfg.gc.m_train if cfg.mode is Mode.RANDOM_FAILURE else 1
        rng = substream(seed, "rejection", epoch)
        found, _ = rejection_sample_failures(
            frozen, spec, wanted, rng, REJECTION_ATTEMPTS_PER_SLOT * cfg.gc.m_train
        )
        if not found:
            log.info("epoch %d: rejection sampling found no failures; training on random scenarios", epoch)
        return found
    try:
        curriculum: Curriculum = generate_curriculum(
            frozen,
            cfg.gc,
            spec,
            rng=substream(seed, "crossover", epoch),
            mutation_rng=substream(seed, "mutation", epoch),
            init_rng=substream(seed, "population-init", epoch),
            epoch_index=epoch,
            workers=cfg.workers,
        )
    except EmptyCurriculumError:
        log.info("epoch %d: empty curriculum; training on random scenarios", epoch)
        return []
    return curriculum.scenarios


def run(cfg: RunConfig, out_dir: str | PathLike | None = None) -> RunResult:
    """Run ``cfg.epochs`` epochs of ``cfg.mode``; record 0 is the untrained policy."""
    writer = RunWriter(out_dir, cfg)
    start = time.perf_counter()
    spec = cfg.env
    policy = Policy(spec.n_actions)
    tests = make_test_set(cfg.test_set_size, cfg.master_seed)
    report = evaluate_failures(policy, spec, tests, cfg.workers)
    record = MetricsRecord(0, report.mean_reward, report.rate, report.stderr, 0, None, 0, time.perf_counter() - start)
    metrics = [record]
    writer.append(record)
    curricula: list[list[Scenario]] = []
    env_steps = 0
    for epoch in range(1, cfg.epochs + 1):
        frozen = policy.snapshot()
        scenarios = _epoch_curriculum(cfg, frozen, epoch)
        curricula.append(scenarios)
        if cfg.mode is not Mode.BASELINE:
            writer.archive(scenarios, epoch, frozen)
        explore_rng = substream(cfg.master_seed, "exploration", epoch)
        if not scenarios:
            source = random_source(substream(cfg.master_seed, "random-source", epoch))
        elif cfg.mode is Mode.SINGLE_RUN:
            source = repeat(scenarios[0])
        else:
            source = cycle_schedule(scenarios, substream(cfg.master_seed, "schedule", epoch))
        policy, stats = train_epoch(policy, source, spec, cfg.learner, explore_rng)
        env_steps += stats.env_steps
        report = evaluate_failures(policy, spec, tests, cfg.workers)
        record = MetricsRecord(
            epoch=epoch,
            mean_reward=report.mean_reward,
            failure_rate=report.rate,
            stderr=report.stderr,
            curriculum_size=len(scenarios),
            mean_genetic_distance=stats.mean_genetic_distance,
            env_steps=env_steps,
            wall_seconds=time.perf_counter() - start,
        )
        metrics.append(record)
        writer.append(record)
        log.info("%s epoch %d: failure_rate=%.3f reward=%.2f", cfg.mode.value, epoch, report.rate, report.mean_reward)
    if cfg.mode is Mode.GC and len(metrics) > 2 and metrics[-1].failure_rate > metrics[1].failure_rate:
        log.warning("gc failure rate rose from epoch 1 (%.3f) to epoch %d (%.3f)",
                    metrics[1].failure_rate, cfg.epochs, metrics[-1].failure_rate)
    writer.finish(policy)
    return RunResult(cfg, metrics, policy, curricula, writer.out_dir)


def run_gc(cfg: RunConfig, out_dir=None) -> RunResult:
    if cfg.mode not in (Mode.GC, Mode.NO_MUTATE, Mode.NO_CROSSOVER):
        raise ValueError(f"run_gc does not handle mode {cfg.mode.value}")
    return run(cfg.with_mode(cfg.mode), out_dir)


def run_baseline(cfg: RunConfig, out_dir=None) -> RunResult:
    if cfg.mode is not Mode.BASELINE:
        raise ValueError(f"run_baseline needs mode baseline, got {cfg.mode.value}")
    return run(cfg, out_dir)


def run_ablation(cfg: RunConfig, out_dir=None) -> RunResult:
    if cfg.mode not in (Mode.NO_MUTATE, Mode.NO_CROSSOVER, Mode.RANDOM_FAILURE, Mode.SINGLE_RUN):
        raise ValueError(f"not an ablation mode: {cfg.mode.value}")
    return run(cfg.with_mode(cfg.mode), out_dir)


def distance_matrix(path: str | PathLike | Sequence[Scenario]) -> list[list[int]]:
    scenarios = list(path) if not isinstance(path, (str, os.PathLike)) else read_jsonl(path)
    if len(scenarios) < 2:
        raise ValueError("distance matrix needs at least two scenarios")
    n = len(scenarios)
    mat = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            mat[i][j] = mat[j][i] = genetic_distance(scenarios[i], scenarios[j])
    return mat


def write_distance_matrix(mat: Sequence[Sequence[int]], path: str | PathLike) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(mat)


def read_metrics(path: str | PathLike) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
