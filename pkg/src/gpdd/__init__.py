"""Polynomial dimensional decomposition for dependent random inputs.

Main entry points::

    from gpdd import Dirichlet, Polynomial, build_basis, expand, gpce_expand

    X = Dirichlet.from_kappa((1, 1, 1, 1))          # exact rational moments
    y = Polynomial.parse("10*x1^6 + x1*x2/10")
    e = expand(y, X, S=2, m=4)                      # S-variate, m-th order
"""

from .expansion import (
    BlockSolveError,
    GpddExpansion,
    exact_variance,
    expand,
    relative_variance_error,
    to_dict,
    variance_of_approx,
)
from .gpce import build_full_basis, gpce_expand, gpce_relative_error
from .measure import (
    Dirichlet,
    IndependentProduct,
    Marginal1D,
    Measure,
    MomentRangeError,
    MomentTable,
    example_dirichlet,
    measure_from_spec,
    validate_assumptions,
)
from .multiindex import count_gpce_coefficients, count_gpdd_coefficients, enumerate_subsets
from .orthopoly import BasisConstructionError, OrthoBasis, build_basis
from .polynomial import Polynomial

__version__ = "0.1.0"

__all__ = [
    "BasisConstructionError",
    "BlockSolveError",
    "Dirichlet",
    "GpddExpansion",
    "IndependentProduct",
    "Marginal1D",
    "Measure",
    "MomentRangeError",
    "MomentTable",
    "OrthoBasis",
    "Polynomial",
    "build_basis",
    "build_full_basis",
    "count_gpce_coefficients",
    "count_gpdd_coefficients",
    "enumerate_subsets",
    "example_dirichlet",
    "exact_variance",
    "expand",
    "gpce_expand",
    "gpce_relative_error",
    "measure_from_spec",
    "relative_variance_error",
    "to_dict",
    "validate_assumptions",
    "variance_of_approx",
]
