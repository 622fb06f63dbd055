"""Compare the literal selection weight against its mirrored "shorter" reading.

Prints final failure rate and mean genetic distance per seed for GC under
both length biases, next to RandomFailure, on RidgeRunner.

    python scripts/compare_length_bias.py --seeds 0,1,2
"""

import argparse
import dataclasses
import statistics

from genetic_curriculum.config import RunConfig
from genetic_curriculum.envs import EnvSpec
from genetic_curriculum.harness import run


def summarize(result):
    mgds = [m.mean_genetic_distance for m in result.metrics[1:] if m.mean_genetic_distance is not None]
    return result.final.failure_rate, statistics.fmean(mgds)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--env", default="ridge-runner")
    args = p.parse_args(argv)
    print(f"{'seed':>4}  {'variant':<16}{'failure':>9}{'mgd':>8}")
    for seed in (int(s) for s in args.seeds.split(",")):
        base = RunConfig(env=EnvSpec(args.env), master_seed=seed)
        variants = {
            "gc longer": base,
            "gc shorter": dataclasses.replace(base, gc=dataclasses.replace(base.gc, length_bias="shorter")),
            "random-failure": base.with_mode("random-failure"),
        }
        for label, cfg in variants.items():
            rate, mgd = summarize(run(cfg))
            print(f"{seed:>4}  {label:<16}{rate:>9.3f}{mgd:>8.2f}", flush=True)


if __name__ == "__main__":
    main()
