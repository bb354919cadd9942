"""Monte Carlo versus exact Dirichlet moments for all monomials up to a degree, over several seeds.

For each seed, draws ``n`` samples and reports the largest z-score
``|mean - exact| / standard error`` over all monomials and how many exceed
the threshold. With hundreds of correlated comparisons a few 3-sigma
exceedances are expected by chance; the pooled run over all seeds shows
whether they persist.

Usage: python scripts/mc_seed_study.py [--seeds 0 1 ... ] [--n 1000000] [--degree 12]
"""

import argparse

import numpy as np

from gpdd import example_dirichlet, oracle
from gpdd.multiindex import enumerate_up_to_degree


def z_scores(batch, idx, exact):
    x = batch.draws
    powers = [np.stack([x[:, i] ** k for k in range(max(map(max, idx)) + 1)]) for i in range(x.shape[1])]
    out = np.empty(len(idx))
    for n, j in enumerate(idx):
        v = np.prod([powers[i][k] for i, k in enumerate(j)], axis=0)
        out[n] = abs(v.mean() - exact[n]) / (v.std(ddof=1) / np.sqrt(len(v)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(10)))
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--degree", type=int, default=12)
    ap.add_argument("--threshold", type=float, default=3.0)
    args = ap.parse_args()
    X = example_dirichlet(exact=True)
    idx = enumerate_up_to_degree(X.dim, args.degree)
    idx = [j for j in idx if any(j)]
    exact = np.array([float(oracle.dirichlet_moment_exact(X.alpha, j)) for j in idx])
    print(f"{len(idx)} non-constant monomials, n={args.n}, threshold {args.threshold}")
    pooled = []
    for seed in args.seeds:
        batch = oracle.sample_measure(X, args.n, seed)
        z = z_scores(batch, idx, exact)
        pooled.append(batch.draws)
        worst = [idx[i] for i in np.argsort(z)[::-1][:3]]
        print(f"seed {seed}: max z {z.max():.2f}, beyond threshold {int((z > args.threshold).sum())}, largest at {worst}")
    big = oracle.SampleBatch(np.concatenate(pooled), seed=-1)
    z = z_scores(big, idx, exact)
    print(f"pooled n={big.count}: max z {z.max():.2f}, beyond threshold {int((z > args.threshold).sum())}")


if __name__ == "__main__":
    main()
