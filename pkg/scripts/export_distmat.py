"""Write the pairwise genetic-distance matrix of every archived curriculum in a run.

    python scripts/export_distmat.py runs/gc_seed0
"""

import argparse
import os
import statistics

from genetic_curriculum.harness import distance_matrix, write_distance_matrix


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("run_dir")
    args = p.parse_args(argv)
    curricula = os.path.join(args.run_dir, "curricula")
    names = sorted((n for n in os.listdir(curricula) if n.endswith(".jsonl")),
                   key=lambda n: int(n.split("_")[1].split(".")[0]))
    for name in names:
        path = os.path.join(curricula, name)
        with open(path) as fh:
            if sum(1 for _ in fh) < 2:
                continue
        mat = distance_matrix(path)
        out = os.path.join(args.run_dir, name.replace(".jsonl", ".distmat.csv"))
        write_distance_matrix(mat, out)
        off = [mat[i][j] for i in range(len(mat)) for j in range(i + 1, len(mat))]
        print(f"{name}: {len(mat)} scenarios, mean pairwise distance {statistics.fmean(off):.2f} -> {out}")


if __name__ == "__main__":
    main()
