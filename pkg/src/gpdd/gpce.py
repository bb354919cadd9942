"""Total-degree polynomial chaos on the full input vector, for comparison.

The basis is the Gram-Schmidt orthogonalisation of all N-variate monomials of
degree <= p in graded-lex order, against the joint measure. Being
orthonormal, coefficients are plain projections ``C_j = E[y Psi_j]`` and the
approximation variance is ``sum_{j != 0} C_j^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .linalg import NotPositiveDefiniteError
from .measure import MarginalMeasure, Measure
from .multiindex import MultiIndex, count_gpce_coefficients, enumerate_up_to_degree
from .orthopoly import BasisConstructionError, orthogonalise
from .polynomial import Polynomial


@dataclass(eq=False)
class FullBasis:
    """Orthonormal polynomials ``Psi_j``, ``|j| <= p``, over all N variables."""

    measure: Measure
    p: int
    indices: list
    P: dict
    norm2: dict
    psi: dict

    def scale(self, j: MultiIndex) -> float:
        return 1.0 / math.sqrt(self.norm2[j])

    def __len__(self):
        return len(self.indices)


@dataclass
class GpceExpansion:
    coefficients: dict
    p: int
    N: int
    mean: object
    variance: object
    measure: Measure = field(repr=False)
    basis: FullBasis = field(repr=False)
    raw: dict = field(repr=False, default_factory=dict)

    kind = "gpce"

    @property
    def n_coefficients(self) -> int:
        return len(self.coefficients)

    def polynomial(self) -> Polynomial:
        total = Polynomial({}, range(1, self.N + 1))
        for j, r in self.raw.items():
            total = total + self.basis.P[j] * r
        return total

    def __call__(self, x) -> float:
        return sum(c * float(self.basis.psi[j].evaluate(x)) for j, c in self.coefficients.items())


def _root(measure):
    return measure.root() if isinstance(measure, MarginalMeasure) else measure


def build_full_basis(measure: Measure, p: int) -> FullBasis:
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    return _full_cached(_root(measure), int(p))


@lru_cache(maxsize=64)
def _full_cached(measure: Measure, p: int) -> FullBasis:
    N = measure.dim
    stream = enumerate_up_to_degree(N, p)
    try:
        _, Q, norms = orthogonalise(measure, stream)
    except NotPositiveDefiniteError as err:
        deg = sum(stream[err.index])
        raise BasisConstructionError(f"joint moment Gram matrix is not positive definite at degree {deg}", degree=deg) from err
    labels = range(1, N + 1)
    P, norm2, psi = {}, {}, {}
    for k, j in enumerate(stream):
        poly = Polynomial.from_vector(Q[k], stream, labels)
        P[j] = poly
        norm2[j] = norms[k]
        s = 1.0 / math.sqrt(norms[k])
        psi[j] = poly.map_coefficients(lambda c: float(c) * s)
    return FullBasis(measure, p, stream, P, norm2, psi)


def gpce_expand(y: Polynomial, measure: Measure, p: int) -> GpceExpansion:
    """p-th order chaos approximation of a polynomial ``y``."""
    measure = _root(measure)
    basis = build_full_basis(measure, p)
    coefficients, raw = {}, {}
    variance = 0
    for j in basis.indices:
        proj = measure.expect_product(y, basis.P[j])
        raw[j] = proj / basis.norm2[j]
        coefficients[j] = float(proj) * basis.scale(j)
        if any(j):
            variance += proj * proj / basis.norm2[j]
    assert len(coefficients) == count_gpce_coefficients(measure.dim, p)
    return GpceExpansion(coefficients, p, measure.dim, raw[(0,) * measure.dim], variance, measure, basis, raw)


def gpce_relative_error(y: Polynomial, measure: Measure, p: int) -> float:
    measure = _root(measure)
    mu = measure.expect(y)
    var = measure.expect_product(y, y) - mu * mu
    if var == 0:
        raise ZeroDivisionError("function has zero variance")
    e = gpce_expand(y, measure, p)
    return float(abs(var - e.variance) / var)
