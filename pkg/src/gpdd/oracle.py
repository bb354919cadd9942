"""Verification engines kept apart from the analytic moment path.

Nothing here calls ``Measure.moment``. Measures are read only for their kind
and parameters (``alpha`` of a Dirichlet, ``marginals`` of an independent
product), so the three routes below stay independent of what they check:

* exact Dirichlet moments from the Gamma-ratio formula, in rationals;
* tensor Gauss quadrature, with the Dirichlet handled by stick-breaking:
  ``X_1 = T_1``, ``X_k = T_k prod_{i<k} (1 - T_i)`` with independent
  ``T_k ~ Beta(alpha_k, alpha_{k+1} + ... + alpha_{N+1})``, so each ``T_k``
  gets a Gauss-Jacobi rule and the Jacobian is absorbed in the weights;
* seeded Monte Carlo sampling.

Parallel sampling uses sub-streams: stream ``k`` of seed ``s`` draws from
``numpy.random.default_rng([s, k])``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special


def dirichlet_moment_exact(alpha, j) -> Fraction:
    """``E[X^j]`` for ``X ~ Dirichlet(alpha)``; ``len(alpha) == len(j) + 1``.

    ``prod_i Gamma(a_i + j_i)/Gamma(a_i)  *  Gamma(a_0)/Gamma(a_0 + |j|)``,
    written with rising factorials so rational ``alpha`` gives a rational.
    """
    alpha = [Fraction(a) if not isinstance(a, Fraction) else a for a in alpha]
    if any(a <= 0 for a in alpha):
        raise ValueError(f"concentrations must be positive, got {alpha}")
    j = list(j)
    if len(alpha) != len(j) + 1:
        raise ValueError("alpha must have one more entry than the exponent vector")
    num = Fraction(1)
    for a, k in zip(alpha, j):
        for t in range(k):
            num *= a + t
    a0 = sum(alpha)
    den = Fraction(1)
    for t in range(sum(j)):
        den *= a0 + t
    return num / den


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``(n, N)``, weights ``(n,)`` summing to one, and the claimed exactness degree."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)


def _beta_rule(a: float, b: float, n: int):
    """Gauss rule for the Beta(a, b) law on [0, 1]."""
    x, w = special.roots_jacobi(n, b - 1.0, a - 1.0)
    return (1.0 + x) / 2.0, w / w.sum()


def _rule_1d(family: str, params, n: int):
    p = [float(v) for v in params]
    if family == "gaussian":
        x, w = special.roots_hermitenorm(n)
        return p[0] + p[1] * x, w / w.sum()
    if family == "uniform":
        x, w = special.roots_legendre(n)
        return p[0] + (p[1] - p[0]) * (x + 1.0) / 2.0, w / w.sum()
    if family == "exponential":
        x, w = special.roots_genlaguerre(n, 0.0)
        return x / p[0], w / w.sum()
    if family == "gamma":
        x, w = special.roots_genlaguerre(n, p[0] - 1.0)
        return x / p[1], w / w.sum()
    if family == "beta":
        return _beta_rule(p[0], p[1], n)
    raise ValueError(f"no quadrature for family {family!r}")


def dirichlet_rule(alpha, n_points: int) -> QuadratureRule:
    """Collapsed tensor Gauss-Jacobi rule for a Dirichlet law, exact to degree ``2n-1``."""
    alpha = [float(a) for a in alpha]
    N = len(alpha) - 1
    rules = [_beta_rule(alpha[k], sum(alpha[k + 1 :]), n_points) for k in range(N)]
    ts = np.array(list(itertools.product(*[r[0] for r in rules])))
    ws = np.prod(np.array(list(itertools.product(*[r[1] for r in rules]))), axis=1)
    nodes = np.empty_like(ts)
    rem = np.ones(len(ts))
    for k in range(N):
        nodes[:, k] = ts[:, k] * rem
        rem = rem * (1.0 - ts[:, k])
    return QuadratureRule(nodes, ws / ws.sum(), 2 * n_points - 1)


def product_rule(marginals, n_points: int) -> QuadratureRule:
    """Tensor Gauss rule for independent marginals given as ``(family, params)`` pairs."""
    rules = [_rule_1d(fam, params, n_points) for fam, params in marginals]
    nodes = np.array(list(itertools.product(*[r[0] for r in rules])))
    ws = np.prod(np.array(list(itertools.product(*[r[1] for r in rules]))), axis=1)
    return QuadratureRule(nodes, ws / ws.sum(), 2 * n_points - 1)


def _params_of(measure):
    kind = getattr(measure, "kind", None)
    if kind == "marginal":
        raise ValueError("pass the full measure; restrict the integrand instead")
    if kind == "dirichlet":
        return kind, [float(a) for a in measure.alpha]
    if kind == "independent":
        return kind, [(m.family, [float(v) for v in m.params]) for m in measure.marginals]
    raise ValueError(f"no oracle for measure kind {kind!r}")


def rule_for(measure, degree: int) -> QuadratureRule:
    """Smallest rule for ``measure`` claiming exactness up to ``degree``."""
    n = max(1, (degree + 2) // 2)
    kind, params = _params_of(measure)
    if kind == "dirichlet":
        return dirichlet_rule(params, n)
    return product_rule(params, n)


def integrate_quadrature(rule: QuadratureRule, f) -> float:
    """``sum_i w_i f(node_i)``; ``f`` takes the ``(n, N)`` node array."""
    vals = np.broadcast_to(np.asarray(f(rule.nodes), dtype=float), rule.weights.shape)
    return float(rule.weights @ vals)


def monomial_function(j):
    j = np.asarray(j)
    return lambda x: np.prod(x ** j[None, :], axis=1)


def verify_exactness(rule: QuadratureRule, exact_moment, rtol: float = 1e-12, beyond: bool = True):
    """Check a rule against exact moments.

    Returns ``(worst_error_within_degree, worst_error_at_degree_plus_one)``;
    the second is ``None`` when ``beyond`` is false. Relative errors.
    """
    N = rule.nodes.shape[1]

    def worst(deg_lo, deg_hi):
        out = 0.0
        for d in range(deg_lo, deg_hi + 1):
            for j in _indices(N, d):
                exact = float(exact_moment(j))
                q = integrate_quadrature(rule, monomial_function(j))
                out = max(out, abs(q - exact) / abs(exact))
        return out

    inside = worst(0, rule.degree)
    outside = worst(rule.degree + 1, rule.degree + 1) if beyond else None
    return inside, outside


def _indices(N, d):
    if N == 1:
        yield (d,)
        return
    for a in range(d, -1, -1):
        for rest in _indices(N - 1, d - a):
            yield (a,) + rest


@dataclass(frozen=True)
class SampleBatch:
    draws: np.ndarray
    seed: int
    stream: int = 0

    @property
    def count(self) -> int:
        return len(self.draws)


def sample_measure(measure, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """Reproducible i.i.d. draws: Dirichlet via normalised Gammas, products via numpy samplers."""
    if n < 1:
        raise ValueError("need at least one draw")
    kind, params = _params_of(measure)
    rng = np.random.default_rng([int(seed), int(stream)])
    if kind == "dirichlet":
        g = rng.standard_gamma(np.asarray(params), size=(n, len(params)))
        draws = (g / g.sum(axis=1, keepdims=True))[:, :-1]
    else:
        cols = []
        for fam, p in params:
            if fam == "gaussian":
                cols.append(rng.normal(p[0], p[1], n))
            elif fam == "uniform":
                cols.append(rng.uniform(p[0], p[1], n))
            elif fam == "exponential":
                cols.append(rng.exponential(1.0 / p[0], n))
            elif fam == "beta":
                cols.append(rng.beta(p[0], p[1], n))
            elif fam == "gamma":
                cols.append(rng.gamma(p[0], 1.0 / p[1], n))
            else:
                raise ValueError(f"cannot sample family {fam!r}")
        draws = np.column_stack(cols)
    return SampleBatch(draws, int(seed), int(stream))


def mc_expectation(batch: SampleBatch, f) -> tuple[float, float]:
    """Sample mean of ``f`` over the batch and its standard error."""
    if batch.count == 0:
        raise ValueError("empty batch")
    vals = np.broadcast_to(np.asarray(f(batch.draws), dtype=float), (batch.count,))
    n = batch.count
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return mean, se
