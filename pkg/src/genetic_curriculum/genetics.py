"""Length-biased parent selection, segment-swap crossover and mutation."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from genetic_curriculum.scenario import (
    INIT_LENGTH,
    L_MAX,
    Scenario,
    random_initial_scenario,
)

CROSSOVER_RETRIES = 16

# "longer": raw weight 1 / (max_L - L + 1), favouring the longest failures.
# "shorter": the mirrored 1 / (L - min_L + 1), favouring the shortest ones.
LENGTH_BIASES = ("longer", "shorter")


class OperatorMode(str, Enum):
    FULL = "full"
    NO_MUTATE = "no-mutate"
    NO_CROSSOVER = "no-crossover"


class NoParentsError(ValueError):
    """Raised when selection is asked to draw from an all-zero weight vector."""


@dataclass(frozen=True)
class EvaluatedScenario:
    scenario: Scenario
    failed: bool
    reward: float = 0.0
    discounted_return: float = 0.0


@dataclass
class Population:
    members: list[EvaluatedScenario] = field(default_factory=list)
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)


def parent_weights(
    population: Population | Sequence[EvaluatedScenario], length_bias: str = "longer"
) -> list[float]:
    """Length-biased selection probabilities over the failing members.

    Under ``"longer"`` a failing member of length ``L`` gets raw weight
    ``1 / (max_L - L + 1)`` where ``max_L`` is the longest failing length.
    ``"shorter"`` uses ``1 / (L - min_L + 1)`` instead. Non-failing members
    get 0, and the result is all zeros when nothing failed.
    """
    if length_bias not in LENGTH_BIASES:
        raise ValueError(f"unknown length_bias {length_bias!r}")
    members = population.members if isinstance(population, Population) else population
    failing = [len(m.scenario) for m in members if m.failed]
    if not failing:
        return [0.0] * len(members)
    if length_bias == "longer":
        max_len = max(failing)
        raw = [1.0 / (max_len - len(m.scenario) + 1) if m.failed else 0.0 for m in members]
    else:
        min_len = min(failing)
        raw = [1.0 / (len(m.scenario) - min_len + 1) if m.failed else 0.0 for m in members]
    total = sum(raw)
    return [w / total for w in raw]


def select_parent_pair(
    population: Population | Sequence[EvaluatedScenario],
    weights: Sequence[float],
    rng: random.Random,
) -> tuple[Scenario, Scenario]:
    members = population.members if isinstance(population, Population) else population
    if not any(w > 0 for w in weights):
        raise NoParentsError("no failing members to select parents from")
    a, b = rng.choices(members, weights=weights, k=2)
    return a.scenario, b.scenario


def _segment(length: int, rng: random.Random) -> tuple[int, int]:
    i = rng.randrange(length)
    j = rng.randint(i + 1, length)
    return i, j


def splice(a: Sequence[float], seg_a: tuple[int, int], b: Sequence[float], seg_b: tuple[int, int]):
    """Both offspring of exchanging ``a[seg_a]`` with ``b[seg_b]``."""
    (i1, j1), (i2, j2) = seg_a, seg_b
    child1 = tuple(a[:i1]) + tuple(b[i2:j2]) + tuple(a[j1:])
    child2 = tuple(b[:i2]) + tuple(a[i1:j1]) + tuple(b[j2:])
    return child1, child2


def crossover_pair(a: Scenario, b: Scenario, rng: random.Random) -> tuple[Scenario, Scenario]:
    """Swap a random contiguous section of ``a`` with one of ``b``.

    Offspring lengths change by the difference of the section lengths.
    Segments are re-drawn a bounded number of times if an offspring would
    exceed ``L_MAX``; after that the inserted section is truncated to fit.
    """
    la, lb = len(a), len(b)
    for _ in range(CROSSOVER_RETRIES):
        seg_a, seg_b = _segment(la, rng), _segment(lb, rng)
        n1 = la - (seg_a[1] - seg_a[0]) + (seg_b[1] - seg_b[0])
        n2 = lb - (seg_b[1] - seg_b[0]) + (seg_a[1] - seg_a[0])
        if n1 <= L_MAX and n2 <= L_MAX:
            break
    c1, c2 = splice(a.genes, seg_a, b.genes, seg_b)
    if len(c1) > L_MAX:
        i1, j1 = seg_a
        keep = L_MAX - (la - (j1 - i1))
        c1 = a.genes[:i1] + b.genes[seg_b[0] : seg_b[0] + keep] + a.genes[j1:]
    if len(c2) > L_MAX:
        i2, j2 = seg_b
        keep = L_MAX - (lb - (j2 - i2))
        c2 = b.genes[:i2] + a.genes[seg_a[0] : seg_a[0] + keep] + b.genes[j2:]
    return Scenario(c1), Scenario(c2)


def mutate(
    s: Scenario,
    p_mu: float,
    rng: random.Random,
    init_length: tuple[int, int] = INIT_LENGTH,
) -> Scenario:
    """Crossover with a freshly generated random scenario, with probability ``p_mu``."""
    if not 0.0 <= p_mu <= 1.0:
        raise ValueError(f"p_mu={p_mu} outside [0, 1]")
    if rng.random() >= p_mu:
        return s
    r = random_initial_scenario(rng, init_length)
    return crossover_pair(s, r, rng)[0]


def next_generation(
    population: Population | Sequence[EvaluatedScenario],
    m_pop: int,
    p_mu: float,
    mode: OperatorMode | str,
    rng: random.Random,
    mutation_rng: random.Random | None = None,
    init_length: tuple[int, int] = INIT_LENGTH,
    length_bias: str = "longer",
) -> list[Scenario]:
    """Breed the next (unevaluated) generation from the failing members.

    With no failing members the search restarts from ``m_pop`` fresh random
    scenarios.
    """
    if m_pop < 2:
        raise ValueError(f"m_pop must be >= 2, got {m_pop}")
    mode = OperatorMode(mode)
    mutation_rng = mutation_rng or rng
    members = population.members if isinstance(population, Population) else list(population)
    weights = parent_weights(members, length_bias)
    if not any(weights):
        return [random_initial_scenario(rng, init_length) for _ in range(m_pop)]

    offspring: list[Scenario] = []
    if mode is OperatorMode.NO_CROSSOVER:
        parents = rng.choices(members, weights=weights, k=m_pop)
        offspring = [p.scenario for p in parents]
    else:
        while len(offspring) < m_pop:
            a, b = select_parent_pair(members, weights, rng)
            offspring.extend(crossover_pair(a, b, rng))

    if mode is OperatorMode.NO_MUTATE:
        p_mu = 0.0
    return [mutate(s, p_mu, mutation_rng, init_length) for s in offspring]
