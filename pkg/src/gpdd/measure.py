"""Probability measures described by their moments.

Everything downstream (Gram matrices, projections, variances) integrates
polynomials, so a measure only has to answer ``moment(j) = E[X^j]``.

Measures with rational parameters answer with exact ``Fraction`` values;
``as_float()`` gives the double-precision twin. Moments are memoised per
measure instance in a plain dict; concurrent fills of the same key write the
same value, so no lock is needed.

Float measures keep an exact twin (the same parameters read as the rationals
the doubles store) so that ``moment_pair`` can hand out double-double
moments and ``expect``/``expect_product`` stay accurate when large
coefficients cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .linalg import two_prod
from .multiindex import MultiIndex, SubsetId, check_subset
from .polynomial import Polynomial


class MomentRangeError(ValueError):
    """Requested moment lies outside what the measure can provide."""


def as_number(v, exact: bool):
    """Coerce a parameter: rationals (including strings like ``"3/2"``) stay exact."""
    if isinstance(v, str):
        v = Fraction(v)
    if isinstance(v, bool):
        raise TypeError("boolean is not a numeric parameter")
    if isinstance(v, Rational):
        return Fraction(v) if exact else float(v)
    return float(v)


def _is_rational(v) -> bool:
    return isinstance(v, (str, Rational)) and not isinstance(v, bool)


def rising(a, k: int):
    """Rising factorial ``a (a+1) ... (a+k-1)``."""
    out = Fraction(1) if isinstance(a, Fraction) else 1.0
    for i in range(k):
        out *= a + i
    return out


class Measure:
    """Base class: a probability measure on R^N with a moment oracle."""

    kind = "abstract"
    dim: int
    exact: bool

    def _moment(self, j: MultiIndex):
        raise NotImplementedError

    def moment(self, j: Iterable[int]):
        j = tuple(int(k) for k in j)
        if len(j) != self.dim:
            raise ValueError(f"moment index {j} has length {len(j)}, measure has dimension {self.dim}")
        if any(k < 0 for k in j):
            raise ValueError(f"negative exponent in {j}")
        cache = self._cache
        val = cache.get(j)
        if val is None:
            val = cache.setdefault(j, self._moment(j))
        return val

    @property
    def labels(self) -> SubsetId:
        return tuple(range(1, self.dim + 1))

    def marginal(self, u: Iterable[int]) -> "MarginalMeasure":
        return MarginalMeasure(self, tuple(u))

    def _full_indices(self, p: Polynomial) -> list[MultiIndex]:
        labels = self.labels
        if not set(p.scope) <= set(labels):
            raise ValueError(f"polynomial scope {p.scope} is outside measure variables {labels}")
        pos = [labels.index(v) for v in p.scope]
        out = []
        for exps in p.terms:
            full = [0] * len(labels)
            for q, e in zip(pos, exps):
                full[q] = e
            out.append(tuple(full))
        return out

    def moment_pair(self, j: Iterable[int]) -> tuple[float, float]:
        """Moment as an unevaluated double-double ``hi + lo``.

        Float measures take it from their exact twin, so ``lo`` restores the
        digits lost when the moment was rounded to a double.
        """
        j = tuple(int(k) for k in j)
        pairs = self._cache.setdefault("pairs", {})
        v = pairs.get(j)
        if v is None:
            m = self.moment(j) if self.exact else self.exact_twin().moment(j)
            hi = float(m)
            lo = float(m - Fraction(hi)) if isinstance(m, Fraction) else 0.0
            v = pairs.setdefault(j, (hi, lo))
        return v

    def exact_twin(self) -> "Measure":
        """Same measure with every float parameter read as the exact rational it stores."""
        if self.exact:
            return self
        twin = self._cache.get("twin")
        if twin is None:
            twin = self._cache.setdefault("twin", self._make_twin())
        return twin

    def _make_twin(self) -> "Measure":
        raise NotImplementedError

    def expect(self, p: Polynomial):
        """E[p(X)] as the moment-weighted sum of the coefficients.

        Exact measures sum in rationals; float measures use error-free
        products against double-double moments and a correctly rounded sum.
        """
        idx = self._full_indices(p)
        if self.exact:
            total = Fraction(0)
            for j, c in zip(idx, p.terms.values()):
                total += c * self.moment(j)
            return total
        parts = []
        for j, c in zip(idx, p.terms.values()):
            c = float(c)
            hi, lo = self.moment_pair(j)
            h, e = two_prod(c, hi)
            parts += (h, e, c * lo)
        return math.fsum(parts)

    def expect_product(self, a: Polynomial, b: Polynomial):
        """``E[a(X) b(X)]`` without rounding the product's coefficients first.

        On the exact path this is ``expect(a * b)``. On the float path the
        double sum over term pairs is formed with error-free products against
        double-double moments, so the result is accurate to about unit
        roundoff of its own size even when the coefficients are large and
        cancel.
        """
        if self.exact:
            return self.expect(a * b)
        ia, ib = self._full_indices(a), self._full_indices(b)
        if not ia or not ib:
            return 0.0
        ca = np.array([float(c) for c in a.terms.values()])
        cb = np.array([float(c) for c in b.terms.values()])
        hi = np.empty((len(ia), len(ib)))
        lo = np.empty_like(hi)
        for r, ja in enumerate(ia):
            for s, jb in enumerate(ib):
                hi[r, s], lo[r, s] = self.moment_pair(tuple(x + y for x, y in zip(ja, jb)))
        h1, e1 = two_prod(ca[:, None], hi)
        h2, e2 = two_prod(h1, cb[None, :])
        rest = e1 * cb[None, :] + ca[:, None] * lo * cb[None, :]
        return math.fsum(np.concatenate([h2.ravel(), e2.ravel(), rest.ravel()]))

    def as_float(self) -> "Measure":
        raise NotImplementedError

    def with_precision(self, precision: str) -> "Measure":
        """``"double"`` gives float arithmetic, ``"extended"`` exact rationals."""
        if precision == "double":
            return self.as_float()
        if precision == "extended":
            if not self.exact:
                raise ValueError(f"{self.kind} measure has non-rational parameters; extended precision needs exact moments")
            return self
        raise ValueError(f"unknown precision {precision!r}")

    def root(self) -> "Measure":
        return self

    def validate_assumptions(self) -> "AssumptionReport":
        return validate_assumptions(self)

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class MarginalMeasure(Measure):
    """Moments of the sub-vector X_u, delegated to the parent with zero padding."""

    parent: Measure
    subset: SubsetId
    kind = "marginal"

    def __post_init__(self):
        self.subset = check_subset(self.subset, self.parent.dim)
        if not self.subset:
            raise ValueError("marginal needs a non-empty subset")
        if isinstance(self.parent, MarginalMeasure):
            parent = self.parent
            if not set(self.subset) <= set(parent.subset):
                raise ValueError(f"subset {self.subset} not inside {parent.subset}")
            self.parent = parent.parent
        self.dim = len(self.subset)
        self.exact = self.parent.exact
        self._cache = {}

    @property
    def labels(self) -> SubsetId:
        return self.subset

    def _moment(self, j):
        full = [0] * self.parent.dim
        for v, k in zip(self.subset, j):
            full[v - 1] = k
        return self.parent.moment(full)

    def root(self) -> Measure:
        return self.parent

    def as_float(self):
        return MarginalMeasure(self.parent.as_float(), self.subset)

    def _make_twin(self):
        return MarginalMeasure(self.parent.exact_twin(), self.subset)


@dataclass(frozen=True)
class Dirichlet(Measure):
    """Dirichlet distribution of ``(X_1..X_N)`` on the N-simplex.

    ``alpha`` holds all N+1 concentrations; the last one belongs to the slack
    ``1 - X_1 - ... - X_N``. A density proportional to
    ``prod x_i^(k_i - 1/2) (1 - sum x)^(k_{N+1} - 1/2)`` has ``alpha_i = k_i + 1/2``.
    """

    alpha: tuple
    exact: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "dirichlet"

    def __post_init__(self):
        raw = tuple(self.alpha)
        if len(raw) < 2:
            raise ValueError("Dirichlet needs at least two concentrations")
        exact = self.exact and all(_is_rational(a) for a in raw)
        alpha = tuple(as_number(a, exact) for a in raw)
        if any(a <= 0 for a in alpha):
            raise ValueError(f"Dirichlet concentrations must be positive, got {raw}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "exact", exact)

    @classmethod
    def from_kappa(cls, kappa: Sequence, exact: bool = True) -> "Dirichlet":
        half = Fraction(1, 2)
        return cls(tuple(as_number(k, True) + half if _is_rational(k) else float(k) + 0.5 for k in kappa), exact)

    @property
    def dim(self) -> int:
        return len(self.alpha) - 1

    def _moment(self, j):
        a0 = sum(self.alpha)
        num = Fraction(1) if self.exact else 1.0
        for a, k in zip(self.alpha, j):
            num *= rising(a, k)
        return num / rising(a0, sum(j))

    def as_float(self):
        return Dirichlet(tuple(float(a) for a in self.alpha), exact=False)

    def _make_twin(self):
        return Dirichlet(tuple(Fraction(a) for a in self.alpha))

    def to_spec(self):
        return {"kind": "dirichlet", "dimension": self.dim, "alpha": [_spec_number(a) for a in self.alpha]}


@dataclass(frozen=True)
class Marginal1D:
    """One-dimensional distribution family used in independent products.

    ``family`` is one of ``gaussian`` (mean, std), ``uniform`` (low, high),
    ``exponential`` (rate), ``beta`` (a, b) on [0, 1], ``gamma`` (shape, rate).
    """

    family: str
    params: tuple
    exact: bool = True

    _ARITY = {"gaussian": 2, "uniform": 2, "exponential": 1, "beta": 2, "gamma": 2}

    def __post_init__(self):
        if self.family not in self._ARITY:
            raise ValueError(f"unknown marginal family {self.family!r}")
        raw = tuple(self.params)
        if len(raw) != self._ARITY[self.family]:
            raise ValueError(f"{self.family} takes {self._ARITY[self.family]} parameters, got {len(raw)}")
        exact = self.exact and all(_is_rational(a) for a in raw)
        params = tuple(as_number(a, exact) for a in raw)
        f = self.family
        if f == "gaussian" and params[1] <= 0:
            raise ValueError("gaussian std must be positive")
        if f == "uniform" and not params[0] < params[1]:
            raise ValueError("uniform needs low < high")
        if f in ("exponential",) and params[0] <= 0:
            raise ValueError("exponential rate must be positive")
        if f in ("beta", "gamma") and min(params) <= 0:
            raise ValueError(f"{f} parameters must be positive")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "exact", exact)

    def moment(self, k: int):
        one = Fraction(1) if self.exact else 1.0
        f, p = self.family, self.params
        if f == "gaussian":
            mu, sd = p
            total = 0 * one
            for i in range(0, k + 1, 2):
                dfact = math.prod(range(i - 1, 0, -2)) if i else 1
                total += math.comb(k, i) * mu ** (k - i) * sd**i * dfact
            return total
        if f == "uniform":
            a, b = p
            return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a) * one)
        if f == "exponential":
            return math.factorial(k) * one / p[0] ** k
        if f == "beta":
            a, b = p
            return rising(a, k) / rising(a + b, k)
        if f == "gamma":
            shape, rate = p
            return rising(shape, k) / rate**k
        raise AssertionError(f)

    def as_float(self):
        return Marginal1D(self.family, tuple(float(v) for v in self.params), exact=False)

    def to_spec(self):
        return {"family": self.family, "params": [_spec_number(v) for v in self.params]}


@dataclass(frozen=True)
class IndependentProduct(Measure):
    """Product of independent one-dimensional marginals; moments factor."""

    marginals: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "independent"

    def __post_init__(self):
        ms = tuple(m if isinstance(m, Marginal1D) else Marginal1D(m[0], tuple(m[1])) for m in self.marginals)
        if not ms:
            raise ValueError("independent product needs at least one marginal")
        object.__setattr__(self, "marginals", ms)

    @property
    def dim(self):
        return len(self.marginals)

    @property
    def exact(self):
        return all(m.exact for m in self.marginals)

    def _moment(self, j):
        out = Fraction(1) if self.exact else 1.0
        for m, k in zip(self.marginals, j):
            out *= m.moment(k) if self.exact else float(m.moment(k))
        return out

    def as_float(self):
        return IndependentProduct(tuple(m.as_float() for m in self.marginals))

    def _make_twin(self):
        return IndependentProduct(tuple(Marginal1D(m.family, tuple(Fraction(v) for v in m.params)) for m in self.marginals))

    def to_spec(self):
        return {"kind": "independent", "dimension": self.dim, "marginals": [m.to_spec() for m in self.marginals]}


@dataclass(frozen=True, eq=False)
class MomentTable(Measure):
    """Explicit moment table up to ``max_degree`` (e.g. empirically estimated).

    Keys are exponent tuples; missing entries within range are an error, as
    is any request above ``max_degree``. The zeroth moment defaults to one.
    """

    dim: int
    max_degree: int
    moments: Mapping
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "moment_table"

    def __post_init__(self):
        table = {}
        exact = True
        for k, v in dict(self.moments).items():
            key = tuple(int(e) for e in (k if not isinstance(k, str) else k.split(",")))
            if len(key) != self.dim:
                raise ValueError(f"moment key {key} does not have length {self.dim}")
            exact = exact and _is_rational(v)
            table[key] = v
        table = {k: as_number(v, exact) for k, v in table.items()}
        zero = (0,) * self.dim
        table.setdefault(zero, Fraction(1) if exact else 1.0)
        if table[zero] != 1:
            raise ValueError("moment table must be normalised: E[1] = 1")
        object.__setattr__(self, "moments", table)
        object.__setattr__(self, "exact", exact)

    def _moment(self, j):
        if sum(j) > self.max_degree:
            raise MomentRangeError(f"moment {j} has degree {sum(j)} > table maximum {self.max_degree}")
        try:
            return self.moments[j]
        except KeyError:
            raise MomentRangeError(f"moment {j} missing from table") from None

    def as_float(self):
        return MomentTable(self.dim, self.max_degree, {k: float(v) for k, v in self.moments.items()})

    def _make_twin(self):
        return MomentTable(self.dim, self.max_degree, {k: Fraction(v) for k, v in self.moments.items()})

    def to_spec(self):
        return {
            "kind": "moment_table",
            "dimension": self.dim,
            "max_degree": self.max_degree,
            "moments": {",".join(map(str, k)): _spec_number(v) for k, v in self.moments.items()},
        }


def _spec_number(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return float(v)


# assumption checks ---------------------------------------------------------

HOLDS = "holds"
BY_CONSTRUCTION = "holds-by-construction"
NOT_CHECKABLE = "not-checkable"
FAILS = "fails"


@dataclass
class AssumptionReport:
    """Per-item status of the standing assumptions on the input measure.

    Items: ``1`` continuous density, ``2`` finite moments of all orders,
    ``3a`` compact support, ``3b`` exponential integrability (item 3 needs one
    of them), ``4`` grid-closed support.
    """

    kind: str
    items: dict
    notes: dict

    @property
    def compliant(self) -> bool:
        ok = {HOLDS, BY_CONSTRUCTION}
        item3 = self.items["3a"] in ok or self.items["3b"] in ok
        return all(self.items[k] in ok for k in ("1", "2", "4")) and item3

    def lines(self):
        for k in ("1", "2", "3a", "3b", "4"):
            yield f"item {k}: {self.items[k]}" + (f" ({self.notes[k]})" if self.notes.get(k) else "")


def validate_assumptions(measure: Measure) -> AssumptionReport:
    """Classify the known measure families; moment tables cannot be checked."""
    m = measure.root() if isinstance(measure, MarginalMeasure) else measure
    if isinstance(m, Dirichlet):
        items = {"1": HOLDS, "2": BY_CONSTRUCTION, "3a": HOLDS, "3b": BY_CONSTRUCTION, "4": HOLDS}
        notes = {"3a": "support is the closed unit simplex", "4": "simplex has non-empty interior"}
        return AssumptionReport("dirichlet", items, notes)
    if isinstance(m, IndependentProduct):
        fams = {mm.family for mm in m.marginals}
        compact = fams <= {"uniform", "beta"}
        items = {
            "1": HOLDS,
            "2": BY_CONSTRUCTION,
            "3a": HOLDS if compact else FAILS,
            "3b": HOLDS,
            "4": BY_CONSTRUCTION,
        }
        notes = {"3b": "light-tailed marginals: " + ", ".join(sorted(fams)), "4": "product support is a box"}
        return AssumptionReport("independent", items, notes)
    items = {k: NOT_CHECKABLE for k in ("1", "2", "3a", "3b", "4")}
    return AssumptionReport(m.kind, items, {"1": "no density available"})


# spec loading ---------------------------------------------------------------


def measure_from_spec(spec: Mapping) -> Measure:
    """Build a measure from a config mapping (see README for the schema)."""
    spec = dict(spec)
    kind = spec.get("kind")
    if kind == "dirichlet":
        if "alpha" in spec:
            m = Dirichlet(tuple(spec["alpha"]))
        elif "kappa" in spec:
            m = Dirichlet.from_kappa(spec["kappa"])
        else:
            raise ValueError("dirichlet spec needs 'alpha' or 'kappa'")
    elif kind == "independent":
        margs = []
        for entry in spec.get("marginals", []):
            margs.append(Marginal1D(entry["family"], tuple(entry["params"])))
        m = IndependentProduct(tuple(margs))
    elif kind == "moment_table":
        m = MomentTable(int(spec["dimension"]), int(spec["max_degree"]), spec["moments"])
    else:
        raise ValueError(f"unknown measure kind {kind!r}")
    if "dimension" in spec and int(spec["dimension"]) != m.dim:
        raise ValueError(f"declared dimension {spec['dimension']} does not match parameters (dimension {m.dim})")
    return m


def moment(measure: Measure, j: Iterable[int]):
    return measure.moment(j)


def marginal(measure: Measure, u: Iterable[int]) -> MarginalMeasure:
    return measure.marginal(u)


def expect_polynomial(measure: Measure, p: Polynomial):
    return measure.expect(p)


def example_dirichlet(exact: bool = True) -> Dirichlet:
    """The three-variable Dirichlet used in the worked example (all kappa = 1)."""
    return Dirichlet.from_kappa((1, 1, 1, 1), exact=exact)
