"""Orthonormality of the double-precision basis, scored against exact rational moments.

For each subset and degree, the float basis coefficients are read as the
rationals they store and ``max |E[Psi_a Psi_b] - delta_ab|`` is evaluated in
exact arithmetic. ``--no-refine`` shows plain Gram-Schmidt for comparison.

Usage: python scripts/double_path_accuracy.py [--max-degree 8] [--no-refine]
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from gpdd import Dirichlet
from gpdd.linalg import gram_schmidt
from gpdd.orthopoly import monomial_stream, moment_gram, orthogonalise


def score(C, G):
    Cf = np.array([[Fraction(float(x)) for x in row] for row in C], dtype=object)
    M = Cf @ G @ Cf.T
    return max(abs(float(M[a, b]) - (a == b)) for a in range(len(C)) for b in range(len(C)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=int, nargs="+", default=[1, 1, 1, 1])
    ap.add_argument("--max-degree", type=int, default=8)
    ap.add_argument("--no-refine", action="store_true")
    args = ap.parse_args()
    X = Dirichlet.from_kappa(args.kappa)
    N = X.dim
    for k in range(1, N + 1):
        u = tuple(range(1, k + 1))
        for D in range(max(k, 4), args.max_degree + 1):
            t = time.perf_counter()
            stream = monomial_stream(k, D)
            G = moment_gram(X.marginal(u), stream)
            Xf = X.as_float().marginal(u)
            if args.no_refine:
                Q, norms = gram_schmidt(moment_gram(Xf, stream), exact=False)
            else:
                _, Q, norms = orthogonalise(Xf, stream)
            C = Q / np.sqrt(norms)[:, None]
            cond = np.linalg.cond(np.asarray(G, dtype=float))
            print(f"u={u} degree={D} size={len(stream)} cond(G)={cond:.1e} error={score(C, G):.2e} ({time.perf_counter() - t:.1f} s)", flush=True)


if __name__ == "__main__":
    main()
