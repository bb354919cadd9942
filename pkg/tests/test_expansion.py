import json
import math
from fractions import Fraction

import numpy as np
import pytest
from helpers import dirichlet_kappa, random_polynomial
from hypothesis import given, settings
from hypothesis import strategies as st
from reference import EXAMPLE_FUNCTION, SWEEP_COUNTS, SWEEP_ERRORS

from gpdd.expansion import (
    add_component,
    compute_I,
    compute_J,
    compute_mean,
    exact_variance,
    expand,
    relative_variance_error,
    solve_degree_block,
    to_dict,
    variance_of_approx,
)
from gpdd.measure import Dirichlet
from gpdd.multiindex import count_gpdd_coefficients
from gpdd.orthopoly import build_basis
from gpdd.polynomial import Polynomial

X1 = Polynomial.variable(1)


@pytest.fixture(scope="module")
def example_y():
    return Polynomial.parse(EXAMPLE_FUNCTION)


def test_example_moments(dirichlet_exact):
    assert compute_mean(X1, dirichlet_exact) == Fraction(1, 4)
    assert exact_variance(X1, dirichlet_exact) == Fraction(3, 112)


def test_projection_of_x1_on_first_polynomial(dirichlet_exact):
    b = build_basis(dirichlet_exact, (1,), 1)
    # E[X1 (1 - 4 X1)] = 1/4 - 4 * 5/56 = -3/28
    assert abs(compute_I(X1, b, (1,))) == pytest.approx(math.sqrt(7 / 3) * 3 / 28, rel=1e-14)


def test_blocks_above_function_degree_vanish(dirichlet_exact):
    y = Polynomial.parse("x1^2*x2 + 3*x3 - x1")
    bases = {u: build_basis(dirichlet_exact, u, 5) for u in [(1,), (2,), (1, 2), (1, 2, 3)]}
    for u, b in bases.items():
        for j in b.indices():
            if sum(j) > 3:
                assert dirichlet_exact.expect(y * b.P[j]) == 0
    e = expand(y, dirichlet_exact, 3, 5)
    assert all(not np.any(e.blocks[l].C) for l in (4, 5))


def test_basis_function_expands_to_itself(dirichlet_exact):
    b = build_basis(dirichlet_exact, (1, 2), 2)
    y = b.P[(1, 1)] / b.P[(1, 1)].coefficient((1, 1))
    e = expand(y, dirichlet_exact, 2, 2)
    target = 1.0 / (b.scale((1, 1)) * float(b.P[(1, 1)].coefficient((1, 1))))
    for key, c in e.coefficients.items():
        assert c == pytest.approx(target if key == ((1, 2), (1, 1)) else 0.0, abs=1e-12)


CELLS = [
    (method, S, order, ref, count)
    for (method, S), errs in SWEEP_ERRORS.items()
    for order, (ref, count) in enumerate(zip(errs, SWEEP_COUNTS[(method, S)]), start=1)
    if ref is not None
]


@pytest.mark.parametrize("method, S, m, ref, count", [c for c in CELLS if c[0] == "gpdd"])
@pytest.mark.parametrize("exact", [True, False])
def test_reference_sweep_gpdd_cells(example_y, dirichlet_exact, method, S, m, ref, count, exact):
    X = dirichlet_exact if exact else dirichlet_exact.as_float()
    y = example_y if exact else example_y.to_float()
    e = expand(y, X, S, m)
    err = float(abs(exact_variance(y, X) - variance_of_approx(e)) / exact_variance(y, X))
    assert err == pytest.approx(ref, rel=1e-4)
    assert e.n_coefficients == count == count_gpdd_coefficients(3, S, m)


def test_double_and_exact_paths_agree(example_y, dirichlet_exact):
    for S, m in [(1, 5), (2, 5), (3, 6)]:
        a = relative_variance_error(example_y, dirichlet_exact, S, m)
        b = relative_variance_error(example_y.to_float(), dirichlet_exact.as_float(), S, m)
        assert abs(a - b) <= 1e-8 * max(a, 1e-300) or abs(a - b) <= 1e-14


def test_univariate_order_five_has_sixteen_coefficients(example_y, dirichlet_float):
    e = expand(example_y.to_float(), dirichlet_float, 1, 5)
    assert len(e.coefficients) == 15 and e.n_coefficients == 16


@pytest.mark.parametrize("S", [1, 2, 3])
def test_error_decays_monotonically_in_order(example_y, dirichlet_float, S):
    errs = [relative_variance_error(example_y.to_float(), dirichlet_float, S, m) for m in range(S, 7)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    if S == 3:
        # the trivariate sixth-order space contains the function
        assert errs[-1] < 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_full_expansion_is_exact(seed):
    rng = np.random.default_rng(seed)
    N = 1 + seed % 4
    X = Dirichlet.from_kappa(dirichlet_kappa(rng, N))
    # rational arithmetic at N = 4, degree 5 takes minutes; the double path covers it
    y = random_polynomial(rng, N, int(rng.integers(1, 6 if N < 4 else 4)))
    e = expand(y, X, N, max(int(y.degree()), N))
    assert e.polynomial() == y
    assert variance_of_approx(e) == exact_variance(y, X)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 5))
def test_full_expansion_double_path_pointwise(seed, N, degree):
    rng = np.random.default_rng(seed)
    X = Dirichlet.from_kappa(dirichlet_kappa(rng, N), exact=False)
    y = random_polynomial(rng, N, degree, exact=False)
    e = expand(y, X, N, max(degree, N))
    pts = rng.dirichlet(np.ones(N + 1), size=20)[:, :N]
    scale = max(1.0, float(np.max(np.abs(y.evaluate_many(pts)))))
    assert max(abs(e(x) - y.evaluate(x)) for x in pts) / scale <= 1e-8


@pytest.mark.parametrize("S, m", [(1, 3), (2, 3), (2, 4), (1, 5)])
def test_truncation_error_is_orthogonal_to_retained_space(dirichlet_exact, S, m):
    y = Polynomial.parse("x1^3*x2 + x2^2*x3^2 - 2*x1*x2*x3 + x3^4/3")
    e = expand(y, dirichlet_exact, S, m)
    r = y - e.polynomial()
    assert dirichlet_exact.expect(r) == 0
    for (u, j) in e.keys():
        assert dirichlet_exact.expect(r * e.bases[u].P[j]) == 0


def test_truncation_error_orthogonality_double_path(dirichlet_float):
    y = Polynomial.parse(EXAMPLE_FUNCTION, exact=False)
    e = expand(y, dirichlet_float, 2, 4)
    r = y - e.polynomial()
    worst = max(abs(dirichlet_float.expect_product(r, e.bases[u].psi[j])) for u, j in e.keys())
    assert worst <= 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_parseval(seed):
    rng = np.random.default_rng(100 + seed)
    N = 2 + seed % 3
    X = Dirichlet.from_kappa(dirichlet_kappa(rng, N), exact=False)
    y = random_polynomial(rng, N, 4, exact=False)
    e = expand(y, X, N, 4)
    quad = sum(float(blk.C @ blk.J @ blk.C) for blk in e.blocks.values() if blk.J is not None and blk.size)
    var = exact_variance(y, X)
    assert abs(quad - var) / var <= 1e-8


def test_independent_measure_gives_direct_projections(independent3):
    y = Polynomial.parse("x1^2*x2 + x3^3 - x1*x3 + 2*x2^2*x3")
    e = expand(y, independent3, 3, 3)
    for l, blk in e.blocks.items():
        if blk.J is not None:
            assert np.max(np.abs(blk.J - np.eye(blk.size))) <= 1e-10
    for (u, j), c in e.coefficients.items():
        assert c == pytest.approx(compute_I(y, e.bases[u], j), abs=1e-8)


def test_cross_subset_same_degree_coupling(dirichlet_exact):
    b1, b2 = build_basis(dirichlet_exact, (1,), 1), build_basis(dirichlet_exact, (2,), 1)
    assert compute_J(b1, (1,), b2, (1,)) == pytest.approx(-1 / 3, rel=1e-14)


def test_threaded_blocks_match_serial(example_y, dirichlet_float):
    y = example_y.to_float()
    a = expand(y, dirichlet_float, 2, 5, jobs=1)
    b = expand(y, dirichlet_float, 2, 5, jobs=4)
    assert a.coefficients == b.coefficients


def test_block_solve_does_not_depend_on_other_blocks(example_y, dirichlet_exact):
    e = expand(example_y, dirichlet_exact, 2, 4)
    alone = solve_degree_block(3, 2, example_y, dirichlet_exact, e.bases)
    assert list(alone.raw_solution) == list(e.blocks[3].raw_solution)


def test_components_have_zero_mean(example_y, dirichlet_exact):
    e = expand(example_y, dirichlet_exact, 3, 6)
    for u in e.bases:
        comp = add_component(e, u)
        assert dirichlet_exact.expect(comp) == 0
    with pytest.raises(KeyError):
        add_component(expand(X1, dirichlet_exact, 1, 1), (1, 2))


def test_serialisation_schema(example_y, dirichlet_exact):
    d = to_dict(expand(example_y, dirichlet_exact, 2, 3))
    text = json.dumps(d)
    back = json.loads(text)
    assert back["schema"] == 1 and back["kind"] == "gpdd"
    assert back["truncation"] == {"S": 2, "m": 3}
    assert Fraction(back["mean"]["exact"]) == dirichlet_exact.expect(example_y)
    assert len(back["coefficients"]) == 18
    assert [blk["degree"] for blk in back["blocks"]] == [1, 2, 3]
    assert {"subset", "index", "value"} == set(back["coefficients"][0])


@pytest.mark.parametrize("S, m, y", [(0, 2, "x1"), (4, 4, "x1"), (2, 1, "x1"), (1, 2, "x4")])
def test_bad_truncation(dirichlet_exact, S, m, y):
    with pytest.raises(ValueError):
        expand(Polynomial.parse(y), dirichlet_exact, S, m)


def test_evaluate_checks_point_length(dirichlet_float):
    e = expand(X1.to_float(), dirichlet_float, 1, 1)
    with pytest.raises(ValueError):
        e([0.1, 0.2])


def test_restricted_solve_differs_from_truncated_full_solve(example_y, dirichlet_exact):
    """Dropping the bivariate terms of a full solve is not the best univariate approximation."""
    var = exact_variance(example_y, dirichlet_exact)
    full = expand(example_y, dirichlet_exact, 3, 5)
    kept = Polynomial.constant(full.mean, (1, 2, 3))
    for blk in full.blocks.values():
        for a, (u, j) in enumerate(blk.keys):
            if len(u) == 1:
                kept = kept + full.bases[u].P[j] * blk.raw_solution[a]
    centred = kept - full.mean
    copied = float(abs(var - dirichlet_exact.expect(centred * centred)) / var)
    restricted = relative_variance_error(example_y, dirichlet_exact, 1, 5)
    assert restricted == pytest.approx(SWEEP_ERRORS[("gpdd", 1)][4], rel=1e-4)
    assert copied > 100 * restricted
