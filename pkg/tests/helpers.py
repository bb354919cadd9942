"""Random polynomial inputs shared by the expansion and acceptance tests."""

from fractions import Fraction

import numpy as np

from gpdd.multiindex import enumerate_up_to_degree
from gpdd.polynomial import Polynomial


def random_polynomial(rng: np.random.Generator, N: int, degree: int, n_terms: int = 8, exact: bool = True) -> Polynomial:
    """Sparse polynomial in ``x1..xN`` with small rational coefficients.

    One term of the full requested degree is always present so the degree is
    exactly ``degree``.
    """
    monos = enumerate_up_to_degree(N, degree)
    top = [j for j in monos if sum(j) == degree]
    picks = {top[rng.integers(len(top))]}
    picks.update(monos[i] for i in rng.choice(len(monos), size=min(n_terms, len(monos)), replace=False))
    terms = {}
    for j in picks:
        c = Fraction(int(rng.integers(-9, 10)) or 1, int(rng.integers(1, 6)))
        terms[j] = c if exact else float(c)
    return Polynomial(terms, range(1, N + 1))


def dirichlet_kappa(rng: np.random.Generator, N: int) -> tuple:
    return tuple(int(k) for k in rng.integers(1, 4, size=N + 1))
