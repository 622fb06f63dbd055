"""Genetic curriculum: evolve scenarios a frozen policy fails and train on them."""

from genetic_curriculum.scenario import (
    L_MAX,
    Scenario,
    ScenarioTape,
    canonical_seed,
    genetic_distance,
    random_scenario,
)

__all__ = [
    "L_MAX",
    "Scenario",
    "ScenarioTape",
    "canonical_seed",
    "genetic_distance",
    "random_scenario",
]

__version__ = "0.1.0"
