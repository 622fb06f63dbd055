"""Run configuration and the flat ``section.key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from os import PathLike
from typing import Any, Iterable

from genetic_curriculum.curriculum import GcConfig
from genetic_curriculum.envs import EnvSpec
from genetic_curriculum.genetics import OperatorMode
from genetic_curriculum.learner import LearnerConfig


class ConfigError(ValueError):
    pass


class Mode(str, Enum):
    GC = "gc"
    BASELINE = "baseline"
    NO_MUTATE = "no-mutate"
    NO_CROSSOVER = "no-crossover"
    RANDOM_FAILURE = "random-failure"
    SINGLE_RUN = "single-run"

    @property
    def operator_mode(self) -> OperatorMode:
        if self is Mode.NO_MUTATE:
            return OperatorMode.NO_MUTATE
        if self is Mode.NO_CROSSOVER:
            return OperatorMode.NO_CROSSOVER
        return OperatorMode.FULL


ABLATIONS = (Mode.NO_MUTATE, Mode.NO_CROSSOVER, Mode.RANDOM_FAILURE, Mode.SINGLE_RUN)


@dataclass(frozen=True)
class RunConfig:
    env: EnvSpec = field(default_factory=EnvSpec)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    gc: GcConfig = field(default_factory=GcConfig)
    epochs: int = 15
    test_set_size: int = 500
    master_seed: int = 0
    mode: Mode = Mode.GC
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.test_set_size < 1:
            raise ValueError("test_set_size must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")

    def with_mode(self, mode: Mode | str) -> RunConfig:
        mode = Mode(mode)
        gc = dataclasses.replace(self.gc, operator_mode=mode.operator_mode)
        return dataclasses.replace(self, mode=mode, gc=gc)

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {
            "env.id": self.env.env_id,
            "env.step_budget": self.env.step_budget,
        }
        for k in sorted(self.env.params):
            flat[f"env.{k}"] = self.env.params[k]
        for f in dataclasses.fields(self.learner):
            flat[f"learner.{f.name}"] = getattr(self.learner, f.name)
        for f in dataclasses.fields(self.gc):
            if f.name == "operator_mode":
                continue
            flat[f"gc.{f.name}"] = getattr(self.gc, f.name)
        flat.update(
            {
                "run.epochs": self.epochs,
                "run.test_set_size": self.test_set_size,
                "run.master_seed": self.master_seed,
                "run.mode": self.mode.value,
                "run.workers": self.workers,
            }
        )
        return flat


def _coerce(raw: str, kind: Any) -> Any:
    raw = raw.strip()
    if kind in (int, "int"):
        return int(raw)
    if kind in (float, "float"):
        return float(raw)
    if kind in (bool, "bool"):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return raw


def _number(raw: str) -> int | float:
    try:
        return int(raw)
    except ValueError:
        return float(raw)


def parse_lines(lines: Iterable[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def read_config_file(path: str | PathLike) -> dict[str, str]:
    try:
        with open(path) as fh:
            return parse_lines(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def build_config(values: dict[str, Any]) -> RunConfig:
    """Turn flat dotted keys into a validated :class:`RunConfig`."""
    env_kw: dict[str, Any] = {}
    env_params: dict[str, Any] = {}
    learner_kw: dict[str, Any] = {}
    gc_kw: dict[str, Any] = {}
    run_kw: dict[str, Any] = {}
    learner_types = {f.name: f.type for f in dataclasses.fields(LearnerConfig)}
    gc_types = {f.name: f.type for f in dataclasses.fields(GcConfig) if f.name != "operator_mode"}
    run_types = {"epochs": "int", "test_set_size": "int", "master_seed": "int", "mode": "str", "workers": "int"}
    try:
        for key, raw in values.items():
            raw = str(raw)
            section, _, name = key.partition(".")
            if section == "env":
                if name == "id":
                    env_kw["env_id"] = raw.strip()
                elif name == "step_budget":
                    env_kw["step_budget"] = int(raw)
                else:
                    env_params[name] = _number(raw)
            elif section == "learner" and name in learner_types:
                learner_kw[name] = _coerce(raw, learner_types[name])
            elif section == "gc" and name in gc_types:
                gc_kw[name] = _coerce(raw, gc_types[name])
            elif section == "run" and name in run_types:
                run_kw[name] = _coerce(raw, run_types[name])
            else:
                raise ConfigError(f"unknown config key {key!r}")
        env = EnvSpec(params=env_params, **env_kw)
        mode = Mode(run_kw.pop("mode", Mode.GC))
        gc = GcConfig(operator_mode=mode.operator_mode, **gc_kw)
        return RunConfig(env=env, learner=LearnerConfig(**learner_kw), gc=gc, mode=mode, **run_kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: str | PathLike | None = None, overrides: Iterable[str] = ()) -> RunConfig:
    values: dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    values.update(parse_overrides(overrides))
    return build_config(values)
