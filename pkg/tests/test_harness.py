import csv
import json
import random

import pytest

from genetic_curriculum import harness
from genetic_curriculum.config import Mode, RunConfig
from genetic_curriculum.curriculum import EmptyCurriculumError, GcConfig, evaluate_scenario
from genetic_curriculum.envs import RIDGE_RUNNER, THRUSTER_LANDER, EnvSpec
from genetic_curriculum.harness import (
    METRICS_HEADER,
    distance_matrix,
    evaluate_failures,
    failure_rate,
    make_test_set,
    read_metrics,
    rejection_sample_failures,
    run,
    run_ablation,
    run_baseline,
    run_gc,
    write_distance_matrix,
)
from genetic_curriculum.learner import LearnerConfig, Policy
from genetic_curriculum.rng import substream
from genetic_curriculum.scenario import Scenario, random_initial_scenario, read_jsonl
from oracles import CautiousLander


def small(env_id=RIDGE_RUNNER, mode="gc", seed=0, epochs=2):
    return RunConfig(
        env=EnvSpec(env_id),
        learner=LearnerConfig(steps_per_epoch=3000),
        gc=GcConfig(m_train=8, m_pop=20, max_iterations=5),
        epochs=epochs,
        test_set_size=60,
        master_seed=seed,
    ).with_mode(mode)


def test_failure_rate_all_fail():
    rate, stderr, outcomes = failure_rate(Policy(), EnvSpec(THRUSTER_LANDER), 40, seed=1)
    assert (rate, stderr) == (1.0, 0.0)
    assert len(outcomes) == 40


def test_failure_rate_none_fail():
    rate, stderr, _ = failure_rate(CautiousLander(), EnvSpec(THRUSTER_LANDER), 40, seed=1)
    assert (rate, stderr) == (0.0, 0.0)


def test_failure_rate_standard_error():
    # the always-advance policy fails exactly the three courses with a bar
    flat = Scenario((0.1,) * 63)
    barred = Scenario((0.1, 0.95, 0.2) + (0.1,) * 61)
    tests = [barred] * 3 + [flat] * 97
    report = evaluate_failures(Policy(), EnvSpec(), tests)
    assert report.rate == pytest.approx(0.03)
    assert report.stderr == pytest.approx(0.0171, abs=1e-4)


def test_failure_rate_rejects_empty():
    with pytest.raises(ValueError):
        failure_rate(Policy(), EnvSpec(), 0, seed=0)


def test_test_set_is_fixed_per_seed():
    assert make_test_set(20, 3) == make_test_set(20, 3)
    assert make_test_set(20, 3) != make_test_set(20, 4)


def test_zero_epochs_gives_single_record(tmp_path):
    result = run(small(epochs=0), tmp_path)
    assert [m.epoch for m in result.metrics] == [0]
    rows = read_metrics(tmp_path / "metrics.csv")
    assert len(rows) == 1 and rows[0]["epoch"] == "0"


def test_metrics_header(tmp_path):
    run(small(epochs=1), tmp_path)
    with open(tmp_path / "metrics.csv") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == METRICS_HEADER == (
        "epoch", "mean_reward", "failure_rate", "stderr", "curriculum_size",
        "mean_genetic_distance", "env_steps", "wall_seconds",
    )


def test_run_directory_layout(tmp_path):
    result = run(small(epochs=2), tmp_path)
    meta = json.loads((tmp_path / "run.json").read_text())
    assert meta["master_seed"] == 0 and meta["mode"] == "gc"
    assert meta["policy_hash"] == result.policy.hash()
    assert Policy.load(tmp_path / "policy.final").hash() == meta["policy_hash"]
    for k in (1, 2):
        assert (tmp_path / "curricula" / f"epoch_{k}.jsonl").exists()
    assert [m.env_steps for m in result.metrics] == [0, 3000, 6000]


def strip_wall(path):
    return [row[:-1] for row in csv.reader(open(path))]


def test_run_is_deterministic(tmp_path):
    run(small(), tmp_path / "a")
    run(small(), tmp_path / "b")
    assert strip_wall(tmp_path / "a" / "metrics.csv") == strip_wall(tmp_path / "b" / "metrics.csv")
    for k in (1, 2):
        name = f"curricula/epoch_{k}.jsonl"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "policy.final").read_bytes() == (tmp_path / "b" / "policy.final").read_bytes()


@pytest.mark.parametrize("mode", ["gc", "no-mutate", "no-crossover", "random-failure", "single-run"])
def test_archived_curricula_fail_under_archived_policy(tmp_path, mode):
    cfg = small(mode=mode)
    run(cfg, tmp_path)
    for k in (1, 2):
        policy = Policy.load(tmp_path / "curricula" / f"epoch_{k}.policy")
        meta = json.loads((tmp_path / "curricula" / f"epoch_{k}.meta.json").read_text())
        assert policy.hash() == meta["policy_hash"]
        scenarios = read_jsonl(tmp_path / "curricula" / f"epoch_{k}.jsonl")
        assert all(evaluate_scenario(policy, s, cfg.env).failed for s in scenarios)


def test_no_mutate_genes_come_from_initial_population():
    cfg = small(mode="no-mutate")
    result = run(cfg)
    for epoch, scenarios in enumerate(result.curricula, 1):
        init = substream(cfg.master_seed, "population-init", epoch)
        pool = {g for _ in range(cfg.gc.m_pop) for g in random_initial_scenario(init).genes}
        assert all(set(s.genes) <= pool for s in scenarios)


def test_single_run_distance_is_zero():
    result = run(small(mode="single-run", epochs=3))
    assert all(len(c) == 1 for c in result.curricula)
    assert all(m.mean_genetic_distance == 0 for m in result.metrics[1:])


def test_baseline_has_no_curriculum(tmp_path):
    result = run_baseline(small(mode="baseline"), tmp_path)
    assert all(m.curriculum_size == 0 for m in result.metrics)
    assert not list((tmp_path / "curricula").iterdir())


def test_runner_mode_guards():
    with pytest.raises(ValueError):
        run_gc(small(mode="baseline"))
    with pytest.raises(ValueError):
        run_baseline(small(mode="gc"))
    with pytest.raises(ValueError):
        run_ablation(small(mode="gc"))


def test_untrained_lander_curriculum_is_full():
    result = run_gc(small(THRUSTER_LANDER, epochs=1))
    assert result.metrics[1].curriculum_size == 8


def test_rejection_sampling_respects_cap():
    found, used = rejection_sample_failures(CautiousLander(), EnvSpec(THRUSTER_LANDER), 4, random.Random(0), 50)
    assert found == [] and used == 50
    found, used = rejection_sample_failures(Policy(), EnvSpec(THRUSTER_LANDER), 4, random.Random(0), 50)
    assert len(found) == 4 and used == 4


def test_empty_curriculum_falls_back_to_random_training(monkeypatch, caplog):
    def nothing_fails(*args, **kwargs):
        raise EmptyCurriculumError("stub")

    monkeypatch.setattr(harness, "generate_curriculum", nothing_fails)
    caplog.set_level("INFO", logger="genetic_curriculum.harness")
    result = run(small(epochs=2))
    assert [m.curriculum_size for m in result.metrics] == [0, 0, 0]
    assert result.metrics[-1].env_steps == 6000
    assert "empty curriculum" in caplog.text


def test_distance_matrix_examples(tmp_path):
    x, y, w = 0.11, 0.42, 0.73
    scenarios = [Scenario((x, y)), Scenario((x, y, w)), Scenario((w, y, x))]
    mat = distance_matrix(scenarios)
    assert mat == [[0, 1, 2], [1, 0, 2], [2, 2, 0]]
    write_distance_matrix(mat, tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text() == "0,1,2\n1,0,2\n2,2,0\n"


def test_distance_matrix_from_archive(tmp_path):
    run(small(epochs=1), tmp_path)
    mat = distance_matrix(tmp_path / "curricula" / "epoch_1.jsonl")
    n = len(mat)
    assert all(mat[i][i] == 0 for i in range(n))
    assert all(mat[i][j] == mat[j][i] for i in range(n) for j in range(n))
    with pytest.raises(ValueError):
        distance_matrix([Scenario((0.5,))])


def test_mode_parsing():
    assert Mode("random-failure") is Mode.RANDOM_FAILURE
    with pytest.raises(ValueError):
        small(mode="adversarial")
