"""Scenario encodings, the tape that replays them, and the edit-distance metric.

A scenario is the sequence of unit-interval values an environment would
otherwise pull from its random number generator. Environments read it through
a :class:`ScenarioTape`; once the genes run out the tape continues with a
pseudo-random stream seeded from the scenario itself, so every scenario has
exactly one outcome under a deterministic policy.
"""

from __future__ import annotations

import hashlib
import json
import random
import struct
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Sequence

L_MAX = 1024
INIT_LENGTH = (8, 32)


@dataclass(frozen=True)
class Scenario:
    genes: tuple[float, ...]

    def __post_init__(self) -> None:
        genes = tuple(float(g) for g in self.genes)
        if not 1 <= len(genes) <= L_MAX:
            raise ValueError(f"scenario length {len(genes)} outside [1, {L_MAX}]")
        for g in genes:
            if not 0.0 <= g < 1.0:
                raise ValueError(f"gene {g!r} outside [0, 1)")
        object.__setattr__(self, "genes", genes)

    def __len__(self) -> int:
        return len(self.genes)

    def __iter__(self):
        return iter(self.genes)

    def __getitem__(self, idx):
        return self.genes[idx]


def random_scenario(length: int, rng: random.Random) -> Scenario:
    if not 1 <= length <= L_MAX:
        raise ValueError(f"length {length} outside [1, {L_MAX}]")
    return Scenario(tuple(rng.random() for _ in range(length)))


def random_initial_scenario(rng: random.Random, bounds: tuple[int, int] = INIT_LENGTH) -> Scenario:
    """Scenario with length drawn uniformly from the initial-length bounds."""
    return random_scenario(rng.randint(*bounds), rng)


def canonical_seed(scenario: Scenario) -> int:
    """Stable 64-bit hash of the exact gene bytes and length."""
    n = len(scenario.genes)
    payload = struct.pack(f"<Q{n}d", n, *scenario.genes)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


class ScenarioTape:
    """Cursor over a scenario's genes with a deterministic overflow stream."""

    __slots__ = ("scenario", "cursor", "overflow_counter", "_overflow")

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.cursor = 0
        self.overflow_counter = 0
        self._overflow: random.Random | None = None

    def draw(self) -> float:
        genes = self.scenario.genes
        if self.cursor < len(genes):
            value = genes[self.cursor]
            self.cursor += 1
            return value
        if self._overflow is None:
            self._overflow = random.Random(canonical_seed(self.scenario))
        self.overflow_counter += 1
        return self._overflow.random()


def tape_draw(tape: ScenarioTape) -> float:
    return tape.draw()


def genetic_distance(a: Scenario | Sequence[float], b: Scenario | Sequence[float]) -> int:
    """Levenshtein distance between gene sequences with exact gene equality.

    Counts the fewest single-gene substitutions, insertions and deletions
    turning ``a`` into ``b``.
    """
    xs = a.genes if isinstance(a, Scenario) else tuple(a)
    ys = b.genes if isinstance(b, Scenario) else tuple(b)
    if xs == ys:
        return 0
    if len(xs) < len(ys):
        xs, ys = ys, xs
    prev = list(range(len(ys) + 1))
    for i, x in enumerate(xs, 1):
        cur = [i]
        for j, y in enumerate(ys, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(list(scenario.genes))


def loads_scenario(line: str) -> Scenario:
    values = json.loads(line)
    if not isinstance(values, list):
        raise ValueError("scenario line must be a JSON array")
    return Scenario(tuple(values))


def write_jsonl(scenarios: Iterable[Scenario], path: str | PathLike) -> None:
    with open(path, "w") as fh:
        for s in scenarios:
            fh.write(dumps_scenario(s) + "\n")


def read_jsonl(path: str | PathLike) -> list[Scenario]:
    with open(path) as fh:
        return [loads_scenario(line) for line in fh if line.strip()]
