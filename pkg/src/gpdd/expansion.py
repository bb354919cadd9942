"""Generalised polynomial dimensional decomposition of polynomial inputs.

The expansion of ``y`` is ``y_0 + sum_{u, j} C_{u,j} Psi_{u,j}(X_u)``. For
dependent inputs the basis functions of different subsets are not orthogonal
when they share a degree, so the coefficients of one total degree ``l`` come
from a small symmetric positive-definite system; different degrees decouple.

Truncation to at most ``S`` interacting variables solves each degree block
restricted to the kept keys (a Galerkin projection onto the truncated
space), which is the best mean-square approximation from that space.

On the exact path every block is assembled and solved in rational
arithmetic in terms of the unnormalised polynomials ``P = ||P|| Psi``; float
coefficients and matrices are derived from those at the end.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linalg import ldl_solve_exact, spd_solve
from .measure import MarginalMeasure, Measure
from .multiindex import (
    MultiIndex,
    SubsetId,
    count_gpdd_coefficients,
    enumerate_interior_degree,
    enumerate_subsets,
)
from .orthopoly import OrthoBasis, build_basis
from .polynomial import Polynomial

log = logging.getLogger(__name__)

RESIDUAL_WARN = 1e-8
RESIDUAL_FAIL = 1e-4

Key = tuple  # (SubsetId, MultiIndex)


class BlockSolveError(ArithmeticError):
    pass


def _root(measure: Measure) -> Measure:
    return measure.root() if isinstance(measure, MarginalMeasure) else measure


def _zero(exact):
    return Fraction(0) if exact else 0.0


@dataclass
class DegreeBlock:
    """Linear system for all kept coefficients of one total degree.

    ``J`` and ``I`` are in terms of the standardised polynomials; ``C`` is
    the solved coefficient slice. ``raw_*`` hold the same quantities for the
    unnormalised polynomials in the measure's own arithmetic.
    """

    degree: int
    keys: list
    J: np.ndarray | None
    I: np.ndarray
    C: np.ndarray
    residual: float = 0.0
    condition: float = 1.0
    method: str = "skipped"
    raw_matrix: np.ndarray | None = field(default=None, repr=False)
    raw_rhs: np.ndarray | None = field(default=None, repr=False)
    raw_solution: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.keys)


@dataclass
class GpddExpansion:
    """Solved S-variate, m-th order expansion."""

    mean: object
    coefficients: dict
    S: int
    m: int
    N: int
    measure: Measure = field(repr=False)
    bases: dict = field(repr=False)
    blocks: dict = field(repr=False)
    form: str = "orthonormal"
    function: Polynomial | None = field(default=None, repr=False)
    _approx: Polynomial | None = field(default=None, repr=False)

    kind = "gpdd"

    def keys(self) -> list:
        return [k for l in sorted(self.blocks) for k in self.blocks[l].keys]

    @property
    def n_coefficients(self) -> int:
        """Coefficients including the mean."""
        return 1 + len(self.coefficients)

    def psi(self, key: Key) -> Polynomial:
        u, j = key
        return self.bases[u].psi[j]

    def component(self, u: SubsetId) -> Polynomial:
        return add_component(self, u)

    def polynomial(self) -> Polynomial:
        """The approximation as a single polynomial over all N variables."""
        if self._approx is None:
            exact = self.measure.exact
            total = Polynomial.constant(self.mean, range(1, self.N + 1))
            for blk in self.blocks.values():
                for a, (u, j) in enumerate(blk.keys):
                    if exact and blk.raw_solution is not None:
                        total = total + self.bases[u].P[j] * blk.raw_solution[a]
                    elif blk.C[a] != 0:
                        total = total + self.bases[u].psi[j] * float(blk.C[a])
            self._approx = total
        return self._approx

    def __call__(self, x):
        return evaluate_approx(self, x)


def _subsets_for(N: int, S: int, l: int) -> list[SubsetId]:
    top = min(S, l, N)
    return enumerate_subsets(N, top) if top >= 1 else []


def block_keys(N: int, S: int, l: int) -> list[Key]:
    """Keys ``(u, j)`` with ``|j| = l`` and ``|u| <= S``: subsets first, then graded-lex indices."""
    return [(u, j) for u in _subsets_for(N, S, l) for j in enumerate_interior_degree(len(u), l)]


def compute_mean(y: Polynomial, measure: Measure):
    """``E[y]`` in the measure's arithmetic."""
    return measure.expect(y)


def compute_I(y: Polynomial, basis: OrthoBasis, j: MultiIndex, measure: Measure | None = None) -> float:
    """``E[y Psi_{u,j}]``."""
    measure = basis.measure if measure is None else _root(measure)
    if measure != basis.measure:
        raise ValueError("measure does not match the basis")
    return float(measure.expect_product(y, basis.P[j])) * basis.scale(j)


def compute_J(basisA: OrthoBasis, j: MultiIndex, basisB: OrthoBasis, k: MultiIndex, measure: Measure | None = None) -> float:
    """``E[Psi_{u,j} Psi_{v,k}]``."""
    if basisA.measure != basisB.measure:
        raise ValueError("bases were built from different measures")
    measure = basisA.measure if measure is None else _root(measure)
    if measure != basisA.measure:
        raise ValueError("measure does not match the bases")
    return float(measure.expect_product(basisA.P[j], basisB.P[k])) * basisA.scale(j) * basisB.scale(k)


def _build_bases(measure, S, m, form, N):
    return {u: build_basis(measure, u, m, form) for u in enumerate_subsets(N, S)}


def solve_degree_block(l: int, S: int, y: Polynomial, measure: Measure, bases: dict) -> DegreeBlock:
    """Assemble and solve the degree-``l`` system restricted to ``|u| <= S``.

    Raises
    ------
    BlockSolveError
        If the relative residual exceeds ``1e-4``.
    """
    measure = _root(measure)
    exact = measure.exact
    keys = block_keys(measure.dim, S, l)
    n = len(keys)
    for u, j in keys:
        if u not in bases or j not in bases[u].P:
            raise ValueError(f"basis for subset {u} does not reach degree {l}")
    if n == 0:
        return DegreeBlock(l, keys, np.zeros((0, 0)), np.zeros(0), np.zeros(0))
    if y.degree() < l:
        # orthogonal to every polynomial of lower degree: nothing to solve
        return DegreeBlock(l, keys, None, np.zeros(n), np.zeros(n))

    polys = [bases[u].P[j] for u, j in keys]
    scales = np.array([bases[u].scale(j) for u, j in keys])
    A = np.empty((n, n), dtype=object if exact else float)
    b = np.empty(n, dtype=object if exact else float)
    for a in range(n):
        b[a] = measure.expect_product(y, polys[a])
        for c in range(a, n):
            A[a, c] = A[c, a] = measure.expect_product(polys[a], polys[c])

    J = np.asarray(A, dtype=float) * np.outer(scales, scales)
    I = np.asarray(b, dtype=float) * scales
    raw_solution = None
    if exact:
        raw_solution, method = ldl_solve_exact(A, b)
        C = np.asarray(raw_solution, dtype=float) / scales
    else:
        C, method = spd_solve(J, I)

    scale_I = max(float(np.max(np.abs(I))), np.finfo(float).tiny)
    residual = float(np.max(np.abs(J @ C - I))) / scale_I
    condition = float(np.linalg.cond(J))
    if residual > RESIDUAL_FAIL:
        raise BlockSolveError(f"degree-{l} block residual {residual:.3g} exceeds {RESIDUAL_FAIL}")
    if residual > RESIDUAL_WARN:
        warnings.warn(f"degree-{l} block residual {residual:.3g} above {RESIDUAL_WARN}", RuntimeWarning, stacklevel=2)
    return DegreeBlock(l, keys, J, I, C, residual, condition, method, A, b, raw_solution)


def expand(
    y: Polynomial,
    measure: Measure,
    S: int,
    m: int,
    form: str = "orthonormal",
    jobs: int = 1,
) -> GpddExpansion:
    """S-variate, m-th order expansion of a polynomial ``y``.

    Degree blocks ``l = 1..m`` are independent; ``jobs > 1`` solves them on a
    thread pool. The result does not depend on the order of the solves.
    """
    measure = _root(measure)
    N = measure.dim
    if not 1 <= S <= N:
        raise ValueError(f"S must be in [1, {N}], got {S}")
    if m < S:
        raise ValueError(f"m must be >= S, got m={m}, S={S}")
    if y.scope and y.scope[-1] > N:
        raise ValueError(f"function uses variables {y.scope} beyond N={N}")
    bases = _build_bases(measure, S, m, form, N)
    mean = compute_mean(y, measure)

    def one(l):
        return solve_degree_block(l, S, y, measure, bases)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(one, range(1, m + 1)))
    else:
        solved = [one(l) for l in range(1, m + 1)]
    blocks = {blk.degree: blk for blk in solved}
    coefficients = {}
    for blk in solved:
        for key, c in zip(blk.keys, blk.C):
            coefficients[key] = float(c)
    expected = count_gpdd_coefficients(N, S, m) - 1
    assert len(coefficients) == expected, (len(coefficients), expected)
    return GpddExpansion(mean, coefficients, S, m, N, measure, bases, blocks, form, y)


def evaluate_approx(e: GpddExpansion, x) -> float:
    """``y_0 + sum C Psi(x_u)`` at a point (length-N vector)."""
    if len(x) != e.N:
        raise ValueError(f"point has length {len(x)}, expansion has N={e.N}")
    total = float(e.mean)
    for (u, j), c in e.coefficients.items():
        if c:
            total += c * float(e.bases[u].psi[j].evaluate(x))
    return total


def variance_of_approx(e: GpddExpansion, measure: Measure | None = None):
    """Variance of the truncated expansion.

    Computed as ``E[(y_{S,m} - y_0)^2]`` on the assembled polynomial, so all
    cross terms between basis functions (including across subsets) count.
    On the exact path the value is an exact rational.
    """
    measure = e.measure if measure is None else _root(measure)
    centred = e.polynomial() - e.mean
    return measure.expect_product(centred, centred)


def exact_variance(y: Polynomial, measure: Measure):
    measure = _root(measure)
    mu = measure.expect(y)
    return measure.expect_product(y, y) - mu * mu


def relative_variance_error(y: Polynomial, measure: Measure, S: int, m: int, form: str = "orthonormal") -> float:
    """``|var[y] - var[y_{S,m}]| / var[y]``."""
    var = exact_variance(y, measure)
    if var == 0:
        raise ZeroDivisionError("function has zero variance")
    e = expand(y, measure, S, m, form)
    return float(abs(var - variance_of_approx(e)) / var)


def add_component(e: GpddExpansion, u: SubsetId) -> Polynomial:
    """The ``u``-component ``sum_j C_{u,j} Psi_{u,j}`` as a polynomial over ``u``."""
    u = tuple(u)
    if u not in e.bases:
        raise KeyError(f"subset {u} is not part of the expansion (S={e.S})")
    exact = e.measure.exact
    out = Polynomial({}, u)
    for blk in e.blocks.values():
        for a, (v, j) in enumerate(blk.keys):
            if v != u:
                continue
            if exact and blk.raw_solution is not None:
                out = out + e.bases[u].P[j] * blk.raw_solution[a]
            elif blk.C[a] != 0:
                out = out + e.bases[u].psi[j] * float(blk.C[a])
    return out


# serialisation --------------------------------------------------------------

SCHEMA_VERSION = 1


def _num(v):
    if isinstance(v, Fraction):
        return {"exact": str(v), "float": float(v)}
    return float(v)


def to_dict(e) -> dict:
    """Stable JSON-ready form of a GPDD or GPCE expansion.

    Schema (version 1)::

        {"schema": 1, "kind": "gpdd" | "gpce", "N": int, "measure": {...},
         "truncation": {"S": int, "m": int} | {"p": int},
         "mean": float | {"exact": "p/q", "float": float},
         "variance": same as mean,
         "coefficients": [{"subset": [..], "index": [..], "value": float}, ...]   (gpdd)
                         [{"index": [..], "value": float}, ...]                   (gpce)
         "blocks": [{"degree": l, "size": n, "residual": r, "condition": c, "method": s}]  (gpdd)
        }
    """
    base = {"schema": SCHEMA_VERSION, "kind": e.kind, "N": e.N}
    try:
        base["measure"] = e.measure.to_spec()
    except NotImplementedError:
        base["measure"] = {"kind": e.measure.kind}
    if e.kind == "gpdd":
        base["truncation"] = {"S": e.S, "m": e.m}
        base["basis_form"] = e.form
        base["mean"] = _num(e.mean)
        base["variance"] = _num(variance_of_approx(e))
        base["coefficients"] = [
            {"subset": list(u), "index": list(j), "value": float(e.coefficients[(u, j)])} for (u, j) in e.keys()
        ]
        base["blocks"] = [
            {
                "degree": blk.degree,
                "size": blk.size,
                "residual": blk.residual,
                "condition": blk.condition,
                "method": blk.method,
            }
            for _, blk in sorted(e.blocks.items())
        ]
    else:
        base["truncation"] = {"p": e.p}
        base["mean"] = _num(e.mean)
        base["variance"] = _num(e.variance)
        base["coefficients"] = [{"index": list(j), "value": float(c)} for j, c in e.coefficients.items()]
    return base
