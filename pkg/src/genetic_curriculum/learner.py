"""Tabular Q-learning with greedy snapshots for scenario evaluation."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterator

from genetic_curriculum.envs import EnvSpec, Outcome, make_env
from genetic_curriculum.scenario import Scenario, genetic_distance


@dataclass(frozen=True)
class LearnerConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    epsilon_start: float = 0.3
    epsilon_end: float = 0.05
    steps_per_epoch: int = 20_000

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma={self.gamma} outside [0, 1)")
        if not 1.0 >= self.epsilon_start >= self.epsilon_end >= 0.0:
            raise ValueError("need 1 >= epsilon_start >= epsilon_end >= 0")
        if self.steps_per_epoch < 0:
            raise ValueError("steps_per_epoch must be non-negative")


class Policy:
    """Action values keyed by observation tuple; unseen entries read as zero."""

    def __init__(self, n_actions: int = 4):
        self.n_actions = n_actions
        self.q: dict[tuple, list[float]] = {}
        self.visits: dict[tuple, list[int]] = {}

    def values(self, obs: tuple) -> list[float]:
        return self.q.get(obs) or [0.0] * self.n_actions

    def greedy(self, obs: tuple) -> int:
        q = self.q.get(obs)
        if q is None:
            return 0
        best, best_v = 0, q[0]
        for a in range(1, self.n_actions):
            if q[a] > best_v:
                best, best_v = a, q[a]
        return best

    def snapshot(self) -> Policy:
        clone = Policy(self.n_actions)
        clone.q = {k: list(v) for k, v in self.q.items()}
        clone.visits = {k: list(v) for k, v in self.visits.items()}
        return clone

    def dumps(self) -> str:
        """Stable text form: one JSON object, keys sorted by observation."""
        payload = {
            "n_actions": self.n_actions,
            "q": [[list(k), self.q[k]] for k in sorted(self.q)],
            "visits": [[list(k), self.visits[k]] for k in sorted(self.visits)],
        }
        return json.dumps(payload, separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, text: str) -> Policy:
        payload = json.loads(text)
        policy = cls(int(payload["n_actions"]))
        policy.q = {tuple(k): [float(x) for x in v] for k, v in payload["q"]}
        policy.visits = {tuple(k): [int(x) for x in v] for k, v in payload.get("visits", [])}
        return policy

    def save(self, path: str | PathLike) -> str:
        text = self.dumps()
        with open(path, "w") as fh:
            fh.write(text)
        return policy_hash_text(text)

    @classmethod
    def load(cls, path: str | PathLike) -> Policy:
        with open(path) as fh:
            return cls.loads(fh.read())

    def hash(self) -> str:
        return policy_hash_text(self.dumps())


def policy_hash_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def act(policy: Policy, obs: tuple, epsilon: float, rng: random.Random) -> int:
    if epsilon > 0.0 and rng.random() < epsilon:
        return rng.randrange(policy.n_actions)
    return policy.greedy(obs)


def q_update(
    policy: Policy,
    transition: tuple[tuple, int, float, tuple, bool],
    cfg: LearnerConfig,
) -> None:
    obs, action, reward, next_obs, terminal = transition
    q = policy.q.get(obs)
    if q is None:
        q = policy.q[obs] = [0.0] * policy.n_actions
        policy.visits[obs] = [0] * policy.n_actions
    target = reward
    if not terminal:
        nq = policy.q.get(next_obs)
        if nq is not None:
            target += cfg.gamma * max(nq)
    q[action] += cfg.alpha * (target - q[action])
    policy.visits[obs][action] += 1


@dataclass
class TrainStats:
    env_steps: int = 0
    episodes: int = 0
    failures: int = 0
    total_reward: float = 0.0
    distance_trace: list[int] = field(default_factory=list)

    @property
    def mean_reward(self) -> float:
        return self.total_reward / self.episodes if self.episodes else 0.0

    @property
    def mean_genetic_distance(self) -> float | None:
        if not self.distance_trace:
            return None
        return sum(self.distance_trace) / len(self.distance_trace)


def train_epoch(
    policy: Policy,
    scenario_source: Iterator[Scenario],
    spec: EnvSpec,
    cfg: LearnerConfig,
    rng: random.Random,
) -> tuple[Policy, TrainStats]:
    """Run exactly ``cfg.steps_per_epoch`` epsilon-greedy Q-learning steps.

    Every reset pulls the next scenario from ``scenario_source``; the final
    episode is cut off at the step cap without a terminal update. The
    genetic distance between consecutive loads is recorded.
    """
    stats = TrainStats()
    budget = cfg.steps_per_epoch
    if budget == 0:
        return policy, stats
    env = make_env(spec)
    eps0, eps1 = cfg.epsilon_start, cfg.epsilon_end
    span = max(budget - 1, 1)
    previous: Scenario | None = None
    steps = 0
    while steps < budget:
        try:
            scenario = next(scenario_source)
        except StopIteration:
            raise ValueError("scenario source exhausted before the epoch step budget") from None
        if previous is not None:
            stats.distance_trace.append(0 if scenario is previous else genetic_distance(previous, scenario))
        previous = scenario
        obs = env.reset(scenario)
        stats.episodes += 1
        episode_reward = 0.0
        while steps < budget:
            epsilon = eps0 + (eps1 - eps0) * (steps / span)
            action = act(policy, obs, epsilon, rng)
            result = env.step(action)
            steps += 1
            q_update(policy, (obs, action, result.reward, result.observation, result.terminal), cfg)
            episode_reward += result.reward
            obs = result.observation
            if result.terminal:
                if result.outcome is Outcome.FAILURE:
                    stats.failures += 1
                break
        stats.total_reward += episode_reward
    stats.env_steps = steps
    return policy, stats
