"""Deterministic desk-scale environments driven entirely by a scenario tape.

``ridge-runner`` is an obstacle course: the scenario lays out gaps, walls and
bars, and the runner must meet each with the right verb while managing a
small energy reserve. ``thruster-lander`` is a vertical descent in which the
scenario decides when the engine degrades and how badly; neither quantity is
observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, NamedTuple

from genetic_curriculum.scenario import Scenario, ScenarioTape

RIDGE_RUNNER = "ridge-runner"
THRUSTER_LANDER = "thruster-lander"
ENV_IDS = (RIDGE_RUNNER, THRUSTER_LANDER)

Observation = tuple[int, ...]


class Outcome(str, Enum):
    ONGOING = "ongoing"
    SUCCESS = "success"
    FAILURE = "failure"


class StepResult(NamedTuple):
    observation: Observation
    reward: float
    terminal: bool
    outcome: Outcome


class EpisodeOverError(RuntimeError):
    pass


# ridge-runner terrain and verbs
FLAT, GAP, WALL, BAR = 0, 1, 2, 3
ADVANCE, JUMP, VAULT, DUCK = 0, 1, 2, 3
REQUIRED_VERB = {GAP: JUMP, WALL: VAULT, BAR: DUCK}
FAR = 4


@dataclass(frozen=True)
class RidgeParams:
    cells: int = 64
    energy_cap: int = 6
    start_energy: int = 6
    gap_threshold: float = 0.70
    wall_threshold: float = 0.80
    bar_threshold: float = 0.90
    size_threshold: float = 0.5
    jump_cost: int = 2
    vault_cost: int = 2
    duck_cost: int = 1
    # extra energy charged per size step above 1
    size_surcharge: int = 0
    lookahead: int = 3
    step_reward: float = 1.0
    goal_reward: float = 100.0
    failure_reward: float = -100.0

    def verb_cost(self, verb: int) -> int:
        return {JUMP: self.jump_cost, VAULT: self.vault_cost, DUCK: self.duck_cost}[verb]


@dataclass(frozen=True)
class LanderParams:
    altitude: float = 100.0
    velocity: float = 0.0
    gravity: float = 1.0
    fuel: int = 120
    max_thrust: int = 3
    onset_horizon: int = 120
    severity_min: float = 0.6
    severity_span: float = 0.4
    safe_speed: float = 4.0
    fuel_penalty: float = 0.1
    success_reward: float = 100.0
    crash_reward: float = -100.0
    altitude_bucket: float = 10.0
    velocity_bucket: float = 2.0
    velocity_clamp: float = 10.0
    fuel_bucket: int = 20


DEFAULT_BUDGET = {RIDGE_RUNNER: 128, THRUSTER_LANDER: 150}
_PARAM_TYPES = {RIDGE_RUNNER: RidgeParams, THRUSTER_LANDER: LanderParams}


@dataclass(frozen=True)
class EnvSpec:
    env_id: str = RIDGE_RUNNER
    step_budget: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.env_id not in ENV_IDS:
            raise ValueError(f"unknown env id {self.env_id!r}; expected one of {ENV_IDS}")
        if self.step_budget < 0:
            raise ValueError("step_budget must be positive (0 selects the default)")
        if self.step_budget == 0:
            object.__setattr__(self, "step_budget", DEFAULT_BUDGET[self.env_id])
        known = {f.name for f in fields(_PARAM_TYPES[self.env_id])}
        unknown = set(self.params) - known
        if unknown:
            raise ValueError(f"unknown {self.env_id} parameters: {sorted(unknown)}")

    def env_params(self):
        return replace(_PARAM_TYPES[self.env_id](), **self.params)

    @property
    def n_actions(self) -> int:
        return 4


class RidgeRunner:
    n_actions = 4

    def __init__(self, params: RidgeParams | None = None, step_budget: int | None = None):
        self.params = params or RidgeParams()
        self.step_budget = step_budget or 2 * self.params.cells
        self.track: list[int] = []
        self.sizes: list[int] = []

    def reset(self, scenario: Scenario) -> Observation:
        p = self.params
        tape = ScenarioTape(scenario)
        track = [FLAT]
        sizes = [0]
        # cell 0 is the start pad; cells 1..C-1 come off the tape; cell C is the goal
        for _ in range(1, p.cells):
            d = tape.draw()
            if d < p.gap_threshold:
                track.append(FLAT)
                sizes.append(0)
                continue
            if d < p.wall_threshold:
                track.append(GAP)
            elif d < p.bar_threshold:
                track.append(WALL)
            else:
                track.append(BAR)
            sizes.append(1 if tape.draw() < p.size_threshold else 2)
        self.track, self.sizes = track, sizes
        self.tape = tape
        self.pos = 0
        self.energy = p.start_energy
        self.steps = 0
        self.done = False
        return self.observe()

    def obstacle_cost(self, cell: int) -> int:
        p = self.params
        return p.verb_cost(REQUIRED_VERB[self.track[cell]]) + p.size_surcharge * (self.sizes[cell] - 1)

    def observe(self) -> Observation:
        track, pos, cells = self.track, self.pos, self.params.cells
        for dist in range(1, self.params.lookahead + 1):
            cell = pos + dist
            if cell < cells and track[cell] != FLAT:
                return (track[cell], dist, self.energy)
        return (FLAT, FAR, self.energy)

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EpisodeOverError("step() called on a finished episode")
        p = self.params
        self.steps += 1
        nxt = self.pos + 1
        terrain = self.track[nxt] if nxt < p.cells else FLAT
        reward = 0.0
        if terrain == FLAT:
            # another verb toward flat ground is a rest step (hold position)
            # unless energy is already full, in which case the runner walks on
            if action == ADVANCE or self.energy >= p.energy_cap:
                self.pos = nxt
                reward = p.step_reward
            self.energy = min(p.energy_cap, self.energy + 1)
        else:
            cost = self.obstacle_cost(nxt)
            if action != REQUIRED_VERB[terrain] or self.energy < cost:
                return self._finish(reward + p.failure_reward, Outcome.FAILURE)
            self.energy -= cost
            self.pos = nxt
            reward = p.step_reward
        if self.pos >= p.cells:
            return self._finish(reward + p.goal_reward, Outcome.SUCCESS)
        if self.steps >= self.step_budget:
            return self._finish(reward + p.failure_reward, Outcome.FAILURE)
        return StepResult(self.observe(), reward, False, Outcome.ONGOING)

    def _finish(self, reward: float, outcome: Outcome) -> StepResult:
        self.done = True
        return StepResult(self.observe(), reward, True, outcome)

    def state(self) -> tuple:
        return (self.pos, self.energy, self.steps, self.done)


class ThrusterLander:
    n_actions = 4

    def __init__(self, params: LanderParams | None = None, step_budget: int = 150):
        self.params = params or LanderParams()
        self.step_budget = step_budget

    def reset(self, scenario: Scenario) -> Observation:
        p = self.params
        tape = ScenarioTape(scenario)
        self.onset = math.floor(tape.draw() * p.onset_horizon)
        self.severity = p.severity_min + p.severity_span * tape.draw()
        self.tape = tape
        self.h = p.altitude
        self.v = p.velocity
        self.fuel = p.fuel
        self.t = 0
        self.fuel_used = 0
        self.done = False
        return self.observe()

    def observe(self) -> Observation:
        p = self.params
        h_b = min(int(max(self.h, 0.0) // p.altitude_bucket), int(p.altitude // p.altitude_bucket) + 2)
        v = max(-p.velocity_clamp, min(p.velocity_clamp, self.v))
        v_b = math.floor(v / p.velocity_bucket)
        return (h_b, v_b, self.fuel // p.fuel_bucket)

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EpisodeOverError("step() called on a finished episode")
        p = self.params
        u = min(max(int(action), 0), p.max_thrust, self.fuel)
        u_eff = self.severity * u if self.t >= self.onset else float(u)
        self.v = self.v + p.gravity - u_eff
        self.h = self.h - self.v
        self.fuel -= u
        self.fuel_used += u
        self.t += 1
        reward = -p.fuel_penalty * u
        if self.h <= 0:
            if abs(self.v) <= p.safe_speed:
                return self._finish(reward + p.success_reward, Outcome.SUCCESS)
            return self._finish(reward + p.crash_reward, Outcome.FAILURE)
        if self.t >= self.step_budget:
            return self._finish(reward + p.crash_reward, Outcome.FAILURE)
        return StepResult(self.observe(), reward, False, Outcome.ONGOING)

    def _finish(self, reward: float, outcome: Outcome) -> StepResult:
        self.done = True
        return StepResult(self.observe(), reward, True, outcome)

    def state(self) -> tuple:
        return (self.h, self.v, self.fuel, self.t, self.done)


def make_env(spec: EnvSpec):
    params = spec.env_params()
    if spec.env_id == RIDGE_RUNNER:
        return RidgeRunner(params, spec.step_budget)
    return ThrusterLander(params, spec.step_budget)


def reset(spec: EnvSpec, scenario: Scenario):
    """Build a fresh environment for ``scenario``; returns ``(env, observation)``."""
    env = make_env(spec)
    return env, env.reset(scenario)


def step(env, action: int) -> StepResult:
    return env.step(action)
