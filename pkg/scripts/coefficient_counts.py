"""Closed-form coefficient counts of truncated GPDD and GPCE, checked against enumeration.

Usage: python scripts/coefficient_counts.py [--N 20] [--max-order 6]
"""

import argparse

from gpdd.multiindex import (
    count_gpce_coefficients,
    count_gpdd_coefficients,
    enumerate_interior_degree,
    enumerate_subsets,
)


def enumerated(N, S, m):
    return 1 + sum(len(enumerate_interior_degree(len(u), l)) for u in enumerate_subsets(N, S) for l in range(len(u), m + 1))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=20)
    ap.add_argument("--max-order", type=int, default=6)
    ap.add_argument("--no-check", action="store_true", help="skip the enumeration cross-check")
    args = ap.parse_args()
    N = args.N
    S_values = list(range(1, min(N, 3) + 1))
    print("m   " + "  ".join(f"{'S=' + str(S):>10}" for S in S_values) + f"  {'GPCE':>12}")
    for m in range(1, args.max_order + 1):
        row = []
        for S in S_values:
            if m < S:
                row.append(f"{'-':>10}")
                continue
            c = count_gpdd_coefficients(N, S, m)
            if not args.no_check:
                assert c == enumerated(N, S, m), (N, S, m)
            row.append(f"{c:>10}")
        print(f"{m:<3} " + "  ".join(row) + f"  {count_gpce_coefficients(N, m):>12}")


if __name__ == "__main__":
    main()
