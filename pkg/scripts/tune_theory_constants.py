"""Grid search for the constants of the theory-driven tuning parameter.

lambda = c1 sqrt(log p / n) + c2 s0 / p with s0 the largest row support of
Omega0. Prints the median Frobenius loss per n and the mean sign agreement,
on seeds disjoint from the ones used for evaluation.
"""

import argparse
import itertools

import numpy as np

from coat.parallel import rng_for
from coat.simulation import (
    bases_to_composition,
    generate_omega0,
    matrix_losses,
    method_scores,
    row_sparsity,
    sample_bases,
    sign_agreement,
    theory_lambda,
    thresholded_covariance,
)

SIZES = (50, 100, 200, 400)


def evaluate(c1, c2, seeds, p=50):
    fro = {n: [] for n in SIZES}
    sign = {n: [] for n in SIZES}
    for s in seeds:
        omega0 = generate_omega0("2", p, s).values
        for n in SIZES:
            y = sample_bases(n, None, omega0, "normal", rng_for(s, 11, n))
            lam = theory_lambda(n, p, row_sparsity(omega0), c1, c2)
            est = thresholded_covariance(method_scores("coat", x=bases_to_composition(y)), lam, "hard")
            fro[n].append(matrix_losses(est, omega0).frobenius)
            sign[n].append(sign_agreement(est, omega0))
    return [np.median(fro[n]) for n in SIZES], [np.mean(sign[n]) for n in SIZES]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs=2, default=(100, 110), metavar=("START", "STOP"))
    args = ap.parse_args()
    seeds = range(*args.seeds)
    for c1, c2 in itertools.product((0.5, 1.0, 1.5, 2.0), (0.0, 0.5, 1.0)):
        fro, sign = evaluate(c1, c2, seeds)
        print(f"c1={c1:.1f} c2={c2:.1f} fro={np.round(fro, 3).tolist()} sign={np.round(sign, 3).tolist()}")


if __name__ == "__main__":
    main()
