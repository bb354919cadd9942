"""Print the standardised polynomials of the three-variable Dirichlet example up to degree 3.

Usage: python scripts/basis_table.py [--form dual|orthonormal] [--precision double|extended]
"""

import argparse

from gpdd import build_basis, example_dirichlet
from gpdd.multiindex import enumerate_subsets


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--form", choices=("dual", "orthonormal"), default="dual")
    ap.add_argument("--precision", choices=("double", "extended"), default="extended")
    ap.add_argument("--max-degree", type=int, default=3)
    args = ap.parse_args()
    X = example_dirichlet(exact=args.precision == "extended")
    for u in enumerate_subsets(3, 3):
        b = build_basis(X, u, args.max_degree, args.form)
        for j in b.indices():
            name = f"Psi_{{{','.join(map(str, u))}}},{''.join(map(str, j))}"
            print(f"{name:<18} = {b.psi[j].map_coefficients(lambda c: round(float(c), 6)).to_text()}")
            if X.exact:
                print(f"{'':<18}   ({b.P[j].to_text()}) / sqrt({b.norm2[j]})")


if __name__ == "__main__":
    main()
