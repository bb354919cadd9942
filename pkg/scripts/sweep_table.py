"""Relative variance errors and coefficient counts of GPDD and GPCE on the Dirichlet example.

Prints a table with one row per order and columns for univariate GPDD,
bivariate GPDD and GPCE, each as ``error (count)``.

Usage: python scripts/sweep_table.py [--precision double|extended] [--max-order 5]
"""

import argparse
import time

from gpdd import Polynomial, example_dirichlet, gpce_expand
from gpdd.expansion import exact_variance, expand, variance_of_approx

FUNCTION = "10*(x1^6 + x2^6 + x3^6) + (x1*x2 + x1*x3 + x2*x3)/10 + x1^2*x2^2*x3^2/1000"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--precision", choices=("double", "extended"), default="double")
    ap.add_argument("--max-order", type=int, default=5)
    args = ap.parse_args()
    exact = args.precision == "extended"
    X = example_dirichlet(exact=exact)
    y = Polynomial.parse(FUNCTION, exact=exact)
    var = exact_variance(y, X)
    t0 = time.perf_counter()
    print(f"{'order':>5}  {'univariate GPDD':>20}  {'bivariate GPDD':>20}  {'GPCE':>20}")
    for m in range(1, args.max_order + 1):
        cells = []
        for S in (1, 2):
            if m < S:
                cells.append("-")
                continue
            e = expand(y, X, S, m)
            cells.append(f"{float(abs(var - variance_of_approx(e)) / var):.6g} ({e.n_coefficients})")
        g = gpce_expand(y, X, m)
        cells.append(f"{float(abs(var - g.variance) / var):.6g} ({g.n_coefficients})")
        print(f"{m:>5}  " + "  ".join(f"{c:>20}" for c in cells))
    print(f"variance {float(var):.10g}, {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
