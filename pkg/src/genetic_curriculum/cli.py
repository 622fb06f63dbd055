"""Command-line entry point: train, ablate, eval, distmat and suite."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import statistics
import sys
from typing import Sequence

from genetic_curriculum.config import ABLATIONS, ConfigError, Mode, RunConfig, load_config
from genetic_curriculum.harness import (
    distance_matrix,
    failure_rate,
    run,
    run_ablation,
    run_baseline,
    run_gc,
    write_distance_matrix,
)
from genetic_curriculum.learner import Policy

log = logging.getLogger("genetic_curriculum")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

SUITE_MODES = ("gc", "baseline", "no-mutate", "no-crossover", "random-failure", "single-run")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--seed", type=int, help="master seed (overrides run.master_seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genetic-curriculum", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train with the genetic curriculum or the baseline")
    _add_config_flags(p)
    p.add_argument("--mode", choices=["gc", "baseline"], default="gc")
    p.add_argument("--out", required=True, help="run directory")

    p = sub.add_parser("ablate", help="run one ablation")
    _add_config_flags(p)
    p.add_argument("--mode", choices=[m.value for m in ABLATIONS], required=True)
    p.add_argument("--out", required=True, help="run directory")

    p = sub.add_parser("eval", help="failure rate of a saved policy on random test scenarios")
    _add_config_flags(p)
    p.add_argument("--policy", required=True)
    p.add_argument("--n", type=int, default=500)

    p = sub.add_parser("distmat", help="pairwise genetic distances of an archived curriculum")
    p.add_argument("--curriculum", required=True, help="epoch_<k>.jsonl archive")
    p.add_argument("--out", help="CSV destination (default: stdout)")

    p = sub.add_parser("suite", help="every mode over several seeds, with a summary table")
    _add_config_flags(p)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--modes", default=",".join(SUITE_MODES))
    p.add_argument("--out", help="parent directory for per-run directories")
    return parser


def _config(args: argparse.Namespace, mode: str | None = None) -> RunConfig:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"run.master_seed={args.seed}")
    if mode is not None:
        overrides.append(f"run.mode={mode}")
    return load_config(args.config, overrides)


def _parse_list(raw: str, kind=str) -> list:
    try:
        return [kind(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config(args, args.mode)
    result = run_gc(cfg, args.out) if cfg.mode is Mode.GC else run_baseline(cfg, args.out)
    _print_final(result)
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = _config(args, args.mode)
    _print_final(run_ablation(cfg, args.out))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.n < 1:
        raise ConfigError("--n must be positive")
    if not os.path.exists(args.policy):
        raise ConfigError(f"no policy file at {args.policy}")
    rate, stderr, _ = failure_rate(Policy.load(args.policy), cfg.env, args.n, cfg.master_seed)
    print(f"failure_rate={rate:.4f} stderr={stderr:.4f} n={args.n}")
    return EXIT_OK


def cmd_distmat(args: argparse.Namespace) -> int:
    if not os.path.exists(args.curriculum):
        raise ConfigError(f"no curriculum archive at {args.curriculum}")
    mat = distance_matrix(args.curriculum)
    if args.out:
        write_distance_matrix(mat, args.out)
    else:
        for row in mat:
            print(",".join(map(str, row)))
    return EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    base = _config(args)
    seeds = _parse_list(args.seeds, int)
    try:
        modes = [Mode(m) for m in _parse_list(args.modes)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    table: dict[Mode, list[tuple[float, float | None]]] = {m: [] for m in modes}
    for seed in seeds:
        for mode in modes:
            cfg = dataclasses.replace(base, master_seed=seed).with_mode(mode)
            out = None if args.out is None else os.path.join(args.out, f"{mode.value}_seed{seed}")
            result = run(cfg, out)
            mgds = [m.mean_genetic_distance for m in result.metrics[1:] if m.mean_genetic_distance is not None]
            mgd = statistics.fmean(mgds) if mgds else None
            table[mode].append((result.final.failure_rate, mgd))
            log.info("seed %d %s: failure_rate=%.3f", seed, mode.value, result.final.failure_rate)
    print(format_suite_table(table, seeds, base.env.env_id))
    return EXIT_OK


def format_suite_table(table, seeds: Sequence[int], env_id: str) -> str:
    lines = [f"env {env_id}, seeds {','.join(map(str, seeds))}",
             f"{'mode':<16}{'final failure rate':>20}{'mean gen. distance':>20}"]
    for mode, rows in table.items():
        rates = [r for r, _ in rows]
        mgds = [d for _, d in rows if d is not None]
        rate = f"{statistics.fmean(rates):.3f}" if rates else "-"
        mgd = f"{statistics.fmean(mgds):.2f}" if mgds else "-"
        lines.append(f"{mode.value:<16}{rate:>20}{mgd:>20}")
    return "\n".join(lines)


def _print_final(result) -> None:
    final = result.final
    print(f"{result.config.mode.value} epoch {final.epoch}: failure_rate={final.failure_rate:.4f} "
          f"stderr={final.stderr:.4f} mean_reward={final.mean_reward:.2f} -> {result.out_dir}")


COMMANDS = {
    "train": cmd_train,
    "ablate": cmd_ablate,
    "eval": cmd_eval,
    "distmat": cmd_distmat,
    "suite": cmd_suite,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface any failure as exit 1
        log.debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
