"""Run every mode over paired seeds on both environments and print summary tables.

    python scripts/run_suite.py --out runs/suite --seeds 0,1,2,3,4
"""

import argparse
import os
import sys

from genetic_curriculum.cli import main

ENVS = ("ridge-runner", "thruster-lander")


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--envs", default=",".join(ENVS))
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--out", help="keep per-run directories under this path")
    return p.parse_args(argv)


def run_all(args) -> int:
    worst = 0
    for env_id in args.envs.split(","):
        cmd = ["suite", "--seeds", args.seeds, "--set", f"env.id={env_id}", "--set", f"run.epochs={args.epochs}"]
        if args.out:
            cmd += ["--out", os.path.join(args.out, env_id)]
        worst = max(worst, main(cmd))
        print()
    return worst


if __name__ == "__main__":
    sys.exit(run_all(parse_args()))
