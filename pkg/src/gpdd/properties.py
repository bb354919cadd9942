"""Property checks behind the ``verify`` command.

Each check yields a :class:`Check` row with a measured residual and the
tolerance it was held to. Analytic checks use the measure's own moment
arithmetic; the oracle rows recompute the same quantities by quadrature or
sampling without touching ``Measure.moment``.

Statuses: ``PASS``, ``FAIL``, ``SKIP`` (check not applicable, e.g. no oracle
for a moment table) and ``INCONCLUSIVE`` (Monte Carlo sample too small to
have power, see :data:`MC_Z`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import oracle
from .expansion import exact_variance, expand, variance_of_approx
from .measure import Measure
from .multiindex import enumerate_subsets, enumerate_up_to_degree
from .orthopoly import BasisConstructionError, annihilation_residual, build_basis
from .polynomial import Polynomial

TOL_ANALYTIC = 1e-8
TOL_QUADRATURE = 1e-10
MC_Z = 3.0

PASS, FAIL, SKIP, INCONCLUSIVE = "PASS", "FAIL", "SKIP", "INCONCLUSIVE"


@dataclass
class Check:
    name: str
    status: str
    residual: float | None
    tolerance: float | None
    detail: str = ""

    def line(self) -> str:
        res = "-" if self.residual is None else f"{self.residual:.3e}"
        tol = "-" if self.tolerance is None else f"{self.tolerance:.0e}"
        text = f"{self.status:<12} {self.name:<34} residual={res:<10} tol={tol}"
        return text + (f"  ({self.detail})" if self.detail else "")

    def to_dict(self) -> dict:
        return asdict(self)


def _judge(name, residual, tol, detail=""):
    return Check(name, PASS if residual <= tol else FAIL, float(residual), tol, detail)


def _inner(measure, a: Polynomial, b: Polynomial) -> float:
    return float(measure.expect_product(a, b))


def _all_psi(bases):
    for u in sorted(bases, key=lambda s: (len(s), s)):
        for j in bases[u].indices():
            yield u, j


def basis_checks(measure: Measure, max_degree: int, max_cardinality: int, form: str) -> tuple[list[Check], dict]:
    """Standardisation, zero-structure and annihilation of every basis polynomial."""
    checks = []
    bases = {}
    try:
        for u in enumerate_subsets(measure.dim, max_cardinality):
            bases[u] = build_basis(measure, u, max_degree, form)
    except BasisConstructionError as err:
        checks.append(Check("orthonormality", FAIL, None, TOL_ANALYTIC, f"basis construction failed: {err}"))
        return checks, {}

    psis = list(_all_psi(bases))
    P = {(u, j): bases[u].P[j] for u, j in psis}
    scale = {(u, j): bases[u].scale(j) for u, j in psis}

    def e2(a, b):
        return _inner(measure, P[a], P[b]) * scale[a] * scale[b]

    mean_err = max((abs(float(measure.expect(P[k]))) * scale[k] for k in psis), default=0.0)
    norm_err = max((abs(e2(k, k) - 1.0) for k in psis), default=0.0)
    checks.append(_judge("zero mean", mean_err, TOL_ANALYTIC, f"{len(psis)} polynomials"))
    checks.append(_judge("unit second moment", norm_err, TOL_ANALYTIC))

    same, cross, nested = 0.0, 0.0, 0.0
    n_same = n_cross = n_nested = 0
    for a, b in itertools.combinations(psis, 2):
        (u, j), (v, k) = a, b
        if sum(j) != sum(k):
            cross = max(cross, abs(e2(a, b)))
            n_cross += 1
        elif u != v and (set(u) < set(v) or set(v) < set(u)):
            nested = max(nested, abs(e2(a, b)))
            n_nested += 1
        elif u == v and form == "orthonormal":
            same = max(same, abs(e2(a, b)))
            n_same += 1
        # nested pairs of different degree are already covered by the cross-degree row
    if form == "orthonormal":
        checks.append(_judge("same-subset orthogonality", same, TOL_ANALYTIC, f"{n_same} pairs"))
    checks.append(_judge("cross-degree zeros", cross, TOL_ANALYTIC, f"{n_cross} pairs"))
    checks.append(_judge("nested-subset zeros", nested, TOL_ANALYTIC, f"{n_nested} same-degree pairs"))

    ann = 0.0
    for u, j in psis:
        for i in u:
            ann = max(ann, annihilation_residual(bases[u], j, i))
    checks.append(_judge("annihilation", ann, TOL_ANALYTIC))
    return checks, bases


def quadrature_checks(measure: Measure, max_degree: int, bases: dict) -> list[Check]:
    """Moments and Psi second moments recomputed with the quadrature oracle."""
    try:
        rule = oracle.rule_for(measure, 2 * max_degree)
    except ValueError as err:
        return [Check("quadrature moments", SKIP, None, None, str(err))]
    N = measure.dim
    worst = 0.0
    for j in enumerate_up_to_degree(N, 2 * max_degree):
        exact = float(measure.moment(j))
        q = oracle.integrate_quadrature(rule, oracle.monomial_function(j))
        worst = max(worst, abs(q - exact) / abs(exact) if exact else abs(q))
    out = [_judge("quadrature moments", worst, TOL_QUADRATURE, f"degree <= {2 * max_degree}, {len(rule)} nodes")]
    if bases:
        psis = list(_all_psi(bases))
        vals = {k: bases[k[0]].psi[k[1]].evaluate_many(rule.nodes) for k in psis}
        gram_err = 0.0
        for a, b in itertools.combinations_with_replacement(psis, 2):
            target = 1.0 if a == b else None
            q = float(rule.weights @ (vals[a] * vals[b]))
            if target is None:
                target = _inner(measure, bases[a[0]].P[a[1]], bases[b[0]].P[b[1]]) * (
                    bases[a[0]].scale(a[1]) * bases[b[0]].scale(b[1])
                )
            gram_err = max(gram_err, abs(q - target))
        out.append(_judge("quadrature psi second moments", gram_err, TOL_ANALYTIC))
    return out


def expansion_checks(y: Polynomial, measure: Measure, seed: int, jobs: int = 1) -> list[Check]:
    """Full expansion of ``y``: pointwise exactness and the Parseval identity."""
    N = measure.dim
    m = max(int(y.degree()), N)
    try:
        e = expand(y, measure, N, m, jobs=jobs)
    except (BasisConstructionError, ArithmeticError) as err:
        return [Check("full expansion", FAIL, None, TOL_ANALYTIC, str(err))]
    var = exact_variance(y, measure)
    approx = variance_of_approx(e)
    parseval = float(abs(var - approx) / var) if var else float(abs(approx))
    out = [_judge("parseval", parseval, TOL_ANALYTIC, f"S={N}, m={m}")]
    try:
        pts = oracle.sample_measure(measure, 64, seed, stream=1).draws
    except ValueError:
        pts = np.random.default_rng([seed, 1]).random((64, N)) / N
    yv = y.evaluate_many(pts)
    av = np.array([e(x) for x in pts])
    scale = max(1.0, float(np.max(np.abs(yv))))
    out.append(_judge("pointwise reconstruction", float(np.max(np.abs(yv - av))) / scale, TOL_ANALYTIC, "64 points"))
    return out


def mc_checks(
    measure: Measure, y: Polynomial | None, bases: dict, n: int, min_n: int, seed: int
) -> list[Check]:
    """Sampling cross-checks; ``INCONCLUSIVE`` when ``n < min_n``."""
    try:
        oracle.sample_measure(measure, 1, seed)
    except ValueError as err:
        return [Check("mc", SKIP, None, None, str(err))]
    rows = []
    targets = []
    if y is not None:
        targets.append(("mc mean of function", lambda x: y.evaluate_many(x), float(measure.expect(y))))
    pair = _cross_degree_pair(bases)
    if pair is not None:
        (u, j), (v, k) = pair
        pa, pb = bases[u].psi[j], bases[v].psi[k]
        targets.append((f"mc cross-degree {list(u)}{list(j)}x{list(v)}{list(k)}", lambda x: pa.evaluate_many(x) * pb.evaluate_many(x), 0.0))
    if not targets:
        return [Check("mc", SKIP, None, None, "nothing to sample")]
    if n < max(2, min_n):
        return [Check(name, INCONCLUSIVE, None, MC_Z, f"n={n} < {min_n}") for name, _, _ in targets]
    batch = oracle.sample_measure(measure, n, seed, stream=0)
    for name, f, exact in targets:
        mean, se = oracle.mc_expectation(batch, f)
        z = abs(mean - exact) / se if se > 0 else (0.0 if mean == exact else math.inf)
        rows.append(Check(name, PASS if z <= MC_Z else FAIL, z, MC_Z, f"n={n}, standard errors"))
    return rows


def _cross_degree_pair(bases):
    psis = list(_all_psi(bases))
    for a, b in itertools.combinations(psis, 2):
        if sum(a[1]) != sum(b[1]) and a[0] != b[0]:
            return a, b
    for a, b in itertools.combinations(psis, 2):
        if sum(a[1]) != sum(b[1]):
            return a, b
    return None


def run_suite(
    measure: Measure,
    y: Polynomial | None = None,
    max_degree: int = 4,
    max_cardinality: int | None = None,
    form: str = "orthonormal",
    mc_samples: int = 200_000,
    mc_min_samples: int = 10_000,
    quadrature: bool = True,
    seed: int = 0,
    jobs: int = 1,
) -> list[Check]:
    card = measure.dim if max_cardinality is None else max_cardinality
    checks, bases = basis_checks(measure, max_degree, card, form)
    if not bases:
        return checks
    if quadrature:
        checks += quadrature_checks(measure, max_degree, bases)
    if y is not None:
        checks += expansion_checks(y, measure, seed, jobs)
    checks += mc_checks(measure, y, bases, mc_samples, mc_min_samples, seed)
    return checks
