"""Loss and support-recovery tables for the four estimators.

Default is the desk-scale setting (p=50, 20 replications). ``--full`` runs
p in {50, 100, 200} with 100 replications, which takes a long time.
"""

import argparse
from pathlib import Path

from coat import io as cio
from coat.simulation import SimConfig, run_simulation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/tables"))
    ap.add_argument("--seed", type=int, default=419)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args()

    dims, reps = ((50, 100, 200), 100) if args.full else ((50,), 20)
    args.out.mkdir(parents=True, exist_ok=True)
    rows = []
    for dist in ("normal", "gamma"):
        for p in dims:
            res = run_simulation(SimConfig("2", dist, 100, p, args.seed, reps), threads=args.threads)
            for method, rule, metric, mean, se in res.summary():
                rows.append((dist, p, method, rule, metric, mean, se))
                print(f"{dist:6s} p={p:<3d} {method:9s} {rule:4s} {metric:9s} {mean:8.3f} ({se:.3f})")
    cio.write_csv(args.out / "tables.csv", ("dist", "p", "method", "rule", "metric", "mean", "se"), rows)


if __name__ == "__main__":
    main()
