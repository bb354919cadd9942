"""Sparse multivariate polynomials over a declared variable scope.

A :class:`Polynomial` is an immutable map from exponent tuples to coefficients.
Exponents refer, position by position, to the 1-based variable labels in
``scope``. Coefficients may be ``int``, ``Fraction`` or ``float``; exact types
stay exact under ``+``, ``-`` and ``*``.

Text form
---------
``to_text`` writes terms in descending graded-lex order (highest degree first),
each as ``coef*x1^2*x3``, with unit coefficients omitted and ``+``/``-``
separators::

    3/2*x1^2*x2 - 4*x1 + 7

Rational coefficients are written ``p/q``; floats use ``repr`` so they
round-trip bit-exactly. ``Polynomial.parse`` accepts this form and, more
generally, any polynomial expression in ``x1, x2, ...`` (``^`` or ``**``,
parentheses, products).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

from .multiindex import MultiIndex, SubsetId, check_subset

ZERO_DEGREE = -math.inf


def _canon_coef(c):
    if isinstance(c, bool):
        c = int(c)
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, (Fraction, float)):
        return c
    if isinstance(c, np.floating):
        return float(c)
    if isinstance(c, np.integer):
        return Fraction(int(c))
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def _graded_lex_key(exps: MultiIndex):
    return (sum(exps), exps)


class Polynomial:
    """Immutable sparse polynomial.

    Parameters
    ----------
    terms : mapping
        Exponent tuple (one entry per scope variable) to coefficient.
        Zero coefficients are dropped.
    scope : tuple of int
        Strictly increasing 1-based variable labels.
    """

    __slots__ = ("_terms", "_scope", "_hash")

    def __init__(self, terms: Mapping[MultiIndex, Number] | None = None, scope: Iterable[int] = ()):
        scope = check_subset(tuple(scope))
        clean: dict[MultiIndex, Number] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(scope):
                raise ValueError(f"exponent {exps} does not match scope {scope}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = _canon_coef(c)
            if exps in clean:
                c = clean[exps] + c
            clean[exps] = c
        self._terms = {k: v for k, v in clean.items() if v != 0}
        self._scope = scope
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, c, scope: Iterable[int] = ()) -> "Polynomial":
        scope = tuple(scope)
        return cls({(0,) * len(scope): c}, scope)

    @classmethod
    def variable(cls, label: int) -> "Polynomial":
        return cls({(1,): 1}, (label,))

    @classmethod
    def monomial(cls, exps: MultiIndex, scope: Iterable[int], coef=1) -> "Polynomial":
        return cls({tuple(exps): coef}, tuple(scope))

    @classmethod
    def from_vector(cls, coefs, monomials: list[MultiIndex], scope: Iterable[int]) -> "Polynomial":
        """Build from a coefficient vector aligned with a list of exponent tuples."""
        return cls({m: c for m, c in zip(monomials, coefs)}, tuple(scope))

    @property
    def scope(self) -> SubsetId:
        return self._scope

    @property
    def terms(self) -> dict[MultiIndex, Number]:
        return dict(self._terms)

    def items(self):
        """Terms in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: _graded_lex_key(kv[0]), reverse=True)

    def coefficient(self, exps: MultiIndex):
        return self._terms.get(tuple(exps), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self):
        """Total degree; ``-inf`` for the zero polynomial."""
        if not self._terms:
            return ZERO_DEGREE
        return max(sum(k) for k in self._terms)

    def __len__(self):
        return len(self._terms)

    # scope handling
    def promote(self, target: Iterable[int]) -> "Polynomial":
        """Same polynomial written over a larger variable scope."""
        target = check_subset(tuple(target))
        if not set(self._scope) <= set(target):
            raise ValueError(f"scope {self._scope} is not contained in {target}")
        if target == self._scope:
            return self
        pos = [target.index(v) for v in self._scope]
        out = {}
        for exps, c in self._terms.items():
            full = [0] * len(target)
            for p, e in zip(pos, exps):
                full[p] = e
            out[tuple(full)] = c
        return Polynomial(out, target)

    def restrict_scope(self) -> "Polynomial":
        """Drop scope variables that no term uses."""
        used = [k for k in range(len(self._scope)) if any(e[k] for e in self._terms)]
        scope = tuple(self._scope[k] for k in used)
        return Polynomial({tuple(e[k] for k in used): c for e, c in self._terms.items()}, scope)

    def _align(self, other: "Polynomial"):
        if self._scope == other._scope:
            return self, other, self._scope
        scope = tuple(sorted(set(self._scope) | set(other._scope)))
        return self.promote(scope), other.promote(scope), scope

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self._scope)
        a, b, scope = self._align(other)
        out = dict(a._terms)
        for k, c in b._terms.items():
            out[k] = out.get(k, 0) + c
        return Polynomial(out, scope)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({k: -c for k, c in self._terms.items()}, self._scope)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = _canon_coef(other)
            return Polynomial({k: v * c for k, v in self._terms.items()}, self._scope)
        a, b, scope = self._align(other)
        out: dict[MultiIndex, Number] = {}
        for ka, ca in a._terms.items():
            for kb, cb in b._terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0) + ca * cb
        return Polynomial(out, scope)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / _canon_coef(c) if isinstance(c, float) else Fraction(1) / _canon_coef(c))

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(1, self._scope)
        for _ in range(k):
            out = out * self
        return out

    def map_coefficients(self, f) -> "Polynomial":
        return Polynomial({k: f(c) for k, c in self._terms.items()}, self._scope)

    def to_float(self) -> "Polynomial":
        return self.map_coefficients(float)

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self.restrict_scope(), other.restrict_scope()
        return a._scope == b._scope and a._terms == b._terms

    def __hash__(self):
        if self._hash is None:
            r = self.restrict_scope()
            self._hash = hash((r._scope, frozenset(r._terms.items())))
        return self._hash

    # evaluation
    def evaluate(self, point):
        """Value at ``point``, a full-length vector indexed by label - 1."""
        point = list(point) if not isinstance(point, np.ndarray) else point
        if self._scope and len(point) < self._scope[-1]:
            raise ValueError(f"point of length {len(point)} does not cover scope {self._scope}")
        xs = [point[v - 1] for v in self._scope]
        total = 0
        for exps, c in self._terms.items():
            t = c
            for x, e in zip(xs, exps):
                if e:
                    t = t * x**e
            total = total + t
        return total

    __call__ = evaluate

    def evaluate_many(self, points) -> np.ndarray:
        """Vectorised float evaluation at the rows of an ``(n, N)`` array."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise ValueError("points must be a 2-D array")
        if self._scope and points.shape[1] < self._scope[-1]:
            raise ValueError(f"points of width {points.shape[1]} do not cover scope {self._scope}")
        out = np.zeros(points.shape[0])
        cols = [points[:, v - 1] for v in self._scope]
        for exps, c in self._terms.items():
            t = np.full(points.shape[0], float(c))
            for col, e in zip(cols, exps):
                if e:
                    t = t * col**e
            out += t
        return out

    # text form
    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.items():
            neg = c < 0
            mag = -c if neg else c
            factors = [f"x{v}" + (f"^{e}" if e > 1 else "") for v, e in zip(self._scope, exps) if e]
            coef = _format_coef(mag)
            if factors and coef == "1":
                body = "*".join(factors)
            else:
                body = "*".join([coef] + factors)
            parts.append(("-" if neg else "+", body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial({self.to_text()!r}, scope={self._scope})"

    @classmethod
    def parse(cls, text: str, exact: bool = True, scope: Iterable[int] | None = None) -> "Polynomial":
        """Parse a polynomial expression in variables ``x1, x2, ...``.

        With ``exact=True`` decimal literals become exact rationals; otherwise
        every coefficient is converted to float.
        """
        import sympy
        from sympy.parsing.sympy_parser import (
            convert_xor,
            parse_expr,
            rationalize,
            standard_transformations,
        )

        # rationalize reads decimal literals exactly from their text
        transformations = standard_transformations + (convert_xor, rationalize)
        expr = parse_expr(text, transformations=transformations, evaluate=True)
        syms = sorted(expr.free_symbols, key=lambda s: s.name)
        labels = []
        for s in syms:
            name = s.name
            if not (name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1):
                raise ValueError(f"unknown variable {name!r}; use x1, x2, ...")
            labels.append(int(name[1:]))
        order = sorted(range(len(syms)), key=lambda k: labels[k])
        syms = [syms[k] for k in order]
        labels = [labels[k] for k in order]
        if not syms:
            value = sympy.Rational(expr)
            out = cls.constant(Fraction(int(value.p), int(value.q)))
        else:
            poly = sympy.Poly(sympy.expand(expr), *syms)
            terms = {}
            for exps, c in poly.terms():
                c = sympy.Rational(c)
                terms[tuple(exps)] = Fraction(int(c.p), int(c.q))
            out = cls(terms, tuple(labels))
        if not exact:
            out = out.to_float()
        if scope is not None:
            out = out.promote(scope)
        return out


def _format_coef(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def evaluate(p: Polynomial, point) -> Number:
    return p.evaluate(point)


def promote_scope(p: Polynomial, target: Iterable[int]) -> Polynomial:
    return p.promote(target)
