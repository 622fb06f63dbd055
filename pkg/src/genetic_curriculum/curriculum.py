"""Per-epoch curriculum generation: evaluate, collect failures, breed."""

from __future__ import annotations

import json
import logging
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import islice
from os import PathLike
from typing import Iterator, Sequence

from genetic_curriculum.envs import EnvSpec, Outcome, make_env
from genetic_curriculum.genetics import (
    EvaluatedScenario,
    LENGTH_BIASES,
    OperatorMode,
    Population,
    next_generation,
)
from genetic_curriculum.learner import Policy
from genetic_curriculum.scenario import (
    INIT_LENGTH,
    Scenario,
    canonical_seed,
    genetic_distance,
    random_initial_scenario,
    write_jsonl,
)

log = logging.getLogger(__name__)

# defensive cap on episode length independent of the env's own budget
HARD_STEP_CEILING = 100_000


class EmptyCurriculumError(RuntimeError):
    """No failing scenario was found within the iteration budget."""


@dataclass(frozen=True)
class GcConfig:
    m_train: int = 32
    m_pop: int = 100
    p_mu: float = 0.1
    max_iterations: int = 40
    operator_mode: OperatorMode = OperatorMode.FULL
    length_bias: str = "longer"

    def __post_init__(self) -> None:
        object.__setattr__(self, "operator_mode", OperatorMode(self.operator_mode))
        if self.m_train < 1:
            raise ValueError("m_train must be >= 1")
        if self.m_pop < 2:
            raise ValueError("m_pop must be >= 2")
        if not 0.0 <= self.p_mu <= 1.0:
            raise ValueError("p_mu must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.length_bias not in LENGTH_BIASES:
            raise ValueError(f"length_bias must be one of {LENGTH_BIASES}")


@dataclass
class Curriculum:
    scenarios: list[Scenario] = field(default_factory=list)
    epoch_index: int = 0
    iterations: int = 0
    evaluations: int = 0
    # generation-0 scenarios, kept for gene provenance audits
    initial_population: list[Scenario] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.scenarios)


def evaluate_scenario(policy: Policy, scenario: Scenario, spec: EnvSpec, gamma: float = 0.95) -> EvaluatedScenario:
    """One greedy episode; ``failed`` is True unless the goal was reached."""
    env = make_env(spec)
    obs = env.reset(scenario)
    total = discounted = 0.0
    scale = 1.0
    for _ in range(HARD_STEP_CEILING):
        result = env.step(policy.greedy(obs))
        total += result.reward
        discounted += scale * result.reward
        scale *= gamma
        obs = result.observation
        if result.terminal:
            return EvaluatedScenario(scenario, result.outcome is not Outcome.SUCCESS, total, discounted)
    log.warning("episode hit the hard step ceiling without terminating; counted as failure")
    return EvaluatedScenario(scenario, True, total, discounted)


def _evaluate_chunk(args) -> list[EvaluatedScenario]:
    policy, scenarios, spec = args
    return [evaluate_scenario(policy, s, spec) for s in scenarios]


def parallel_disabled() -> bool:
    return os.environ.get("NO_PARALLEL", "") == "1"


def evaluate_population(
    policy: Policy,
    scenarios: Sequence[Scenario],
    spec: EnvSpec,
    workers: int = 1,
) -> list[EvaluatedScenario]:
    """Evaluate all scenarios, merging results in input order."""
    if workers <= 1 or parallel_disabled() or len(scenarios) < 2 * workers:
        return [evaluate_scenario(policy, s, spec) for s in scenarios]
    size = -(-len(scenarios) // workers)
    chunks = [(policy, list(scenarios[i : i + size]), spec) for i in range(0, len(scenarios), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_evaluate_chunk, chunks))
    return [r for chunk in results for r in chunk]


def generate_curriculum(
    policy: Policy,
    cfg: GcConfig,
    spec: EnvSpec,
    rng: random.Random,
    mutation_rng: random.Random | None = None,
    init_rng: random.Random | None = None,
    epoch_index: int = 0,
    workers: int = 1,
    init_length: tuple[int, int] = INIT_LENGTH,
) -> Curriculum:
    """Genetic search for scenarios the frozen ``policy`` fails.

    Failures are appended in discovery order without duplicates until
    ``cfg.m_train`` are collected or ``cfg.max_iterations`` generations have
    been evaluated. Raises :class:`EmptyCurriculumError` if nothing failed.
    """
    init_rng = init_rng or rng
    scenarios = [random_initial_scenario(init_rng, init_length) for _ in range(cfg.m_pop)]
    curriculum = Curriculum(epoch_index=epoch_index, initial_population=list(scenarios))
    seen: dict[int, list[Scenario]] = {}
    for iteration in range(cfg.max_iterations):
        members = evaluate_population(policy, scenarios, spec, workers)
        curriculum.iterations = iteration + 1
        curriculum.evaluations += len(members)
        for m in members:
            if not m.failed:
                continue
            bucket = seen.setdefault(canonical_seed(m.scenario), [])
            if any(s == m.scenario for s in bucket):
                continue
            bucket.append(m.scenario)
            curriculum.scenarios.append(m.scenario)
        if len(curriculum.scenarios) >= cfg.m_train:
            del curriculum.scenarios[cfg.m_train :]
            return curriculum
        if iteration + 1 == cfg.max_iterations:
            break
        population = Population(members, generation=iteration)
        scenarios = next_generation(
            population, cfg.m_pop, cfg.p_mu, cfg.operator_mode, rng, mutation_rng, init_length,
            cfg.length_bias,
        )
    if not curriculum.scenarios:
        raise EmptyCurriculumError(f"no failures after {cfg.max_iterations} iterations")
    return curriculum


def cycle_schedule(scenarios: Sequence[Scenario], rng: random.Random) -> Iterator[Scenario]:
    """Endless shuffled round-robin over ``scenarios``."""
    if not scenarios:
        raise ValueError("cannot schedule an empty curriculum")
    order = list(scenarios)
    while True:
        rng.shuffle(order)
        yield from order


def schedule(curriculum: Curriculum | Sequence[Scenario], total_episodes: int, rng: random.Random) -> list[Scenario]:
    scenarios = curriculum.scenarios if isinstance(curriculum, Curriculum) else list(curriculum)
    if not scenarios:
        raise ValueError("cannot schedule an empty curriculum")
    if total_episodes < 1:
        raise ValueError("total_episodes must be positive")
    return list(islice(cycle_schedule(scenarios, rng), total_episodes))


def mean_genetic_distance(loads: Sequence[Scenario]) -> float:
    if len(loads) < 2:
        raise ValueError("mean genetic distance needs at least two loads")
    dists = [genetic_distance(a, b) for a, b in zip(loads, loads[1:])]
    return sum(dists) / len(dists)


def write_archive(
    curriculum: Curriculum | Sequence[Scenario],
    directory: str | PathLike,
    epoch: int,
    policy: Policy,
    config: dict | None = None,
) -> dict:
    """Write ``epoch_<k>.jsonl`` plus the frozen policy and a metadata sidecar."""
    scenarios = curriculum.scenarios if isinstance(curriculum, Curriculum) else list(curriculum)
    os.makedirs(directory, exist_ok=True)
    base = os.path.join(directory, f"epoch_{epoch}")
    write_jsonl(scenarios, base + ".jsonl")
    policy_hash = policy.save(base + ".policy")
    meta = {
        "epoch": epoch,
        "policy_hash": policy_hash,
        "size": len(scenarios),
        "config": config or {},
    }
    with open(base + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


def gc_config_dict(cfg: GcConfig) -> dict:
    d = asdict(cfg)
    d["operator_mode"] = cfg.operator_mode.value
    return d
