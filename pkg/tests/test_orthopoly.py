import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from reference import REFERENCE_BASIS, sign_aligned_error
from scipy import special

from gpdd.measure import Dirichlet, IndependentProduct, Marginal1D, MomentTable
from gpdd.multiindex import enumerate_interior_degree, enumerate_subsets, enumerate_up_to_degree
from gpdd.orthopoly import (
    BasisConstructionError,
    annihilation_residual,
    build_basis,
    moment_gram,
    monomial_stream,
    psi_inner,
    second_moment_matrix,
)
from gpdd.polynomial import Polynomial


def exact_psi_coefficients(basis, j):
    """Standardised coefficients from the exact unnormalised polynomial."""
    s = 1.0 / math.sqrt(basis.norm2[j])
    return {k: float(c) * s for k, c in basis.P[j].terms.items()}


BASIS_CASES = [
    (u, j, form)
    for (card, j), _ in REFERENCE_BASIS.items()
    for u in enumerate_subsets(3, 3)
    if len(u) == card
    for form in ("dual",) + (("orthonormal",) if card != 2 or j == (1, 1) else ())
]


@pytest.mark.parametrize("u, j, form", BASIS_CASES)
def test_reference_basis_polynomials(dirichlet_exact, u, j, form):
    basis = build_basis(dirichlet_exact, u, 3, form)
    got = exact_psi_coefficients(basis, j)
    assert sign_aligned_error(got, REFERENCE_BASIS[(len(u), j)]) <= 1e-8


def test_orthonormal_form_differs_from_dual_for_mixed_cubic(dirichlet_exact):
    """The two mixed cubic dual polynomials are not mutually orthogonal."""
    dual = build_basis(dirichlet_exact, (1, 2), 3, "dual")
    assert psi_inner(dual, (1, 2), dual, (2, 1)) == pytest.approx(307 / 481, rel=1e-12)
    ortho = build_basis(dirichlet_exact, (1, 2), 3, "orthonormal")
    assert psi_inner(ortho, (1, 2), ortho, (2, 1)) == pytest.approx(0.0, abs=1e-14)


def test_sign_convention(dirichlet_exact):
    for form in ("orthonormal", "dual"):
        b = build_basis(dirichlet_exact, (1, 2), 4, form)
        for j in b.indices():
            assert b.P[j].coefficient(j) > 0


def test_standardisation_of_degree_one(dirichlet_exact):
    b = build_basis(dirichlet_exact, (1,), 1)
    assert b.norm2[(1,)] * 0 == 0
    assert psi_inner(b, (1,), b, (1,)) == pytest.approx(1.0, abs=1e-15)


def test_degree_one_cross_subset_value(dirichlet_exact):
    """E[Psi_{1,1} Psi_{2,1}] = (7/3)(1 - 4/4 - 4/4 + 16 * 3/56) = -1/3."""
    b1 = build_basis(dirichlet_exact, (1,), 1)
    b2 = build_basis(dirichlet_exact, (2,), 1)
    raw = dirichlet_exact.expect(b1.P[(1,)] * b2.P[(1,)])
    assert raw * raw / (b1.norm2[(1,)] * b2.norm2[(1,)]) == Fraction(1, 9)
    assert raw < 0
    assert psi_inner(b1, (1,), b2, (1,)) == pytest.approx(-1 / 3, rel=1e-14)


@pytest.mark.parametrize("max_degree", range(1, 7))
def test_exact_zero_structure(dirichlet_exact, max_degree):
    """On the exact path the orthogonality relations hold with equality."""
    bases = {u: build_basis(dirichlet_exact, u, max_degree) for u in enumerate_subsets(3, 3)}
    items = [(u, j) for u in bases for j in bases[u].indices()]
    X = dirichlet_exact
    for u, j in items:
        assert X.expect(bases[u].P[j]) == 0
        assert X.expect(bases[u].P[j] ** 2) == bases[u].norm2[j]
    for (u, j), (v, k) in itertools.combinations(items, 2):
        nested = set(u) < set(v) or set(v) < set(u)
        if sum(j) != sum(k) or nested or u == v:
            assert X.expect(bases[u].P[j] * bases[v].P[k]) == 0, ((u, j), (v, k))


@pytest.mark.parametrize("measure_name", ["dirichlet_float", "dirichlet4"])
def test_double_path_orthonormality(request, measure_name):
    X = request.getfixturevalue(measure_name)
    X = X.as_float() if X.exact else X
    D = 5 if X.dim == 3 else 4
    for u in enumerate_subsets(X.dim, X.dim):
        b = build_basis(X, u, D)
        _, _, M = second_moment_matrix(b, b)
        if M.size:
            assert np.max(np.abs(M - np.eye(len(M)))) <= 1e-8


def exact_gram_error(measure_exact, u, D):
    """Orthonormality error of the double-path basis, scored in rationals.

    The float coefficients are read as the rationals they store and paired
    with the exact moments, so nothing in the score shares the rounding of
    the construction.
    """
    b = build_basis(measure_exact.as_float(), u, D)
    stream = monomial_stream(len(u), D)
    G = moment_gram(measure_exact.marginal(u), stream)
    C = np.array([[Fraction(float(b.psi[j].coefficient(m))) for m in stream] for j in b.indices()], dtype=object)
    M = C @ G @ C.T
    return max(abs(float(M[a, c]) - (a == c)) for a in range(len(C)) for c in range(len(C)))


@pytest.mark.parametrize(
    "u, D",
    [((1,), 8), ((1, 2), 8), ((1, 2, 3), 6), ((1, 2, 3), 7)]
    + [pytest.param((1, 2, 3), 8, marks=pytest.mark.slow)],
)
def test_double_path_against_exact_moments(dirichlet_exact, u, D):
    # the Gram condition number reaches 1e13 at degree 8; refinement keeps the error near 1e-12
    assert exact_gram_error(dirichlet_exact, u, D) <= 1e-10


@pytest.mark.slow
def test_double_path_four_variables_degree_six():
    assert exact_gram_error(Dirichlet.from_kappa((1, 1, 1, 1, 1)), (1, 2, 3, 4), 6) <= 1e-10


def test_dual_form_is_biorthogonal_to_monomials(dirichlet_exact):
    u = (1, 3)
    b = build_basis(dirichlet_exact, u, 4, "dual")
    for j in b.indices():
        for k in enumerate_up_to_degree(2, sum(j)):
            val = dirichlet_exact.expect(b.P[j] * Polynomial.monomial(k, u))
            assert val == (1 if k == j else 0)
        assert dirichlet_exact.expect(b.P[j] ** 2) == b.norm2[j] == b.P[j].coefficient(j)


def test_forms_span_the_same_space(dirichlet_exact):
    a = build_basis(dirichlet_exact, (1, 2), 4, "orthonormal")
    b = build_basis(dirichlet_exact, (1, 2), 4, "dual")
    for l in range(2, 5):
        A = np.array([[float(a.P[j].coefficient(m)) for m in enumerate_up_to_degree(2, l)] for j in a.indices(l)])
        B = np.array([[float(b.P[j].coefficient(m)) for m in enumerate_up_to_degree(2, l)] for j in b.indices(l)])
        assert np.linalg.matrix_rank(np.vstack([A, B]), tol=1e-9 * np.abs(A).max()) == len(A)


@pytest.mark.parametrize("u", [(1,), (2, 3), (1, 2, 3)])
@pytest.mark.parametrize("m", [3, 5])
def test_span_reproduces_monomials(dirichlet_exact, u, m):
    """Every monomial in x_u of degree <= m lies in the span of the bases of all v within u."""
    cols = enumerate_up_to_degree(len(u), m)
    rows = [np.eye(len(cols))[0]]
    for r in range(1, len(u) + 1):
        for v in itertools.combinations(u, r):
            b = build_basis(dirichlet_exact, v, m)
            for j in b.indices():
                p = b.psi[j].promote(u)
                rows.append([float(p.coefficient(k)) for k in cols])
    A = np.array(rows)
    assert A.shape[0] == A.shape[1]
    for idx in range(len(cols)):
        target = np.eye(len(cols))[idx]
        coef = np.linalg.solve(A.T, target)
        assert np.max(np.abs(coef @ A - target)) <= 1e-8


@pytest.mark.parametrize("D", [3, 5])
def test_annihilation_residuals(dirichlet_exact, D):
    worst = 0.0
    for u in enumerate_subsets(3, 3):
        b = build_basis(dirichlet_exact, u, D)
        for j in b.indices():
            for i in u:
                worst = max(worst, annihilation_residual(b, j, i))
    assert worst <= 1e-8


def test_annihilation_singleton_is_zero_mean(dirichlet_exact):
    b = build_basis(dirichlet_exact, (1,), 2)
    assert annihilation_residual(b, (1,), 1) <= 1e-10


def test_annihilation_by_conditional_quadrature(dirichlet_exact):
    """Integrate Psi_{(1,2),(1,1)} f_{12} over x1 at a grid of x2 values.

    For fixed x2, x1 = (1 - x2) t with t ~ Beta(alpha_1, alpha_3 + alpha_4), so
    the x1-integral is proportional to a one-dimensional Gauss-Jacobi sum.
    """
    b = build_basis(dirichlet_exact, (1, 2), 2)
    psi = b.psi[(1, 1)]
    a1, rest = 1.5, 3.0
    t, w = special.roots_jacobi(20, rest - 1.0, a1 - 1.0)
    t, w = (1 + t) / 2, w / w.sum()
    for x2 in np.linspace(0.05, 0.95, 10):
        pts = np.column_stack([(1 - x2) * t, np.full_like(t, x2)])
        assert abs(w @ psi.evaluate_many(pts)) <= 1e-10


def test_annihilation_independent_product(independent3):
    b = build_basis(independent3, (1, 3), 4)
    for j in b.indices():
        assert annihilation_residual(b, j, 1) <= 1e-12
        assert annihilation_residual(b, j, 3) <= 1e-12


def _hermite(n, mu, sd):
    he = special.hermitenorm(n).coeffs[::-1]
    # He_n((x - mu)/sd) / sqrt(n!)
    x = Polynomial.variable(1)
    z = (x - mu) / sd
    out = Polynomial.constant(0, (1,))
    for k, c in enumerate(he):
        out = out + z**k * float(c)
    return out / math.sqrt(math.factorial(n))


@pytest.mark.parametrize("n", range(1, 6))
def test_gaussian_gives_hermite(n):
    X = IndependentProduct((Marginal1D("gaussian", (1, 2)),))
    b = build_basis(X, (1,), n)
    got = exact_psi_coefficients(b, (n,))
    ref = {k: float(c) for k, c in _hermite(n, 1, 2).terms.items()}
    assert sign_aligned_error(got, ref) <= 1e-10


@pytest.mark.parametrize("n", range(1, 6))
def test_uniform_gives_shifted_legendre(n):
    X = IndependentProduct((Marginal1D("uniform", (0, 1)),))
    b = build_basis(X, (1,), n)
    coeffs = special.sh_legendre(n).coeffs[::-1] * math.sqrt(2 * n + 1)
    ref = {(k,): float(c) for k, c in enumerate(coeffs) if c}
    assert sign_aligned_error(exact_psi_coefficients(b, (n,)), ref) <= 1e-10


def test_independent_product_reduction(independent3):
    """Multivariate polynomials are products of the univariate ones."""
    D = 5
    uni = {i: build_basis(independent3, (i,), D) for i in (1, 2, 3)}
    for u in enumerate_subsets(3, 3):
        if len(u) < 2:
            continue
        b = build_basis(independent3, u, D)
        for l in range(len(u), D + 1):
            for j in enumerate_interior_degree(len(u), l):
                prod = Polynomial.constant(1)
                for i, k in zip(u, j):
                    prod = prod * uni[i].P[(k,)] * (1.0 / math.sqrt(uni[i].norm2[(k,)]))
                prod = prod.promote(u)
                ref = {e: float(c) for e, c in prod.terms.items()}
                assert sign_aligned_error(exact_psi_coefficients(b, j), ref) <= 1e-10


def test_degree_below_cardinality_is_empty(dirichlet_exact):
    b = build_basis(dirichlet_exact, (1, 2, 3), 2)
    assert len(b) == 0
    assert b.indices() == []


def test_degree_zero_constant():
    X = Dirichlet.from_kappa((1, 1))
    b = build_basis(X, (1,), 0)
    assert len(b) == 0


def test_monomial_stream_puts_boundary_first():
    stream = monomial_stream(2, 3)
    assert stream[:3] == [(0, 0), (1, 0), (0, 1)]
    deg2 = [j for j in stream if sum(j) == 2]
    assert deg2 == [(2, 0), (0, 2), (1, 1)]
    assert [j for j in stream if sum(j) == 3] == [(3, 0), (0, 3), (2, 1), (1, 2)]


def _two_point(exact):
    moments = {str(k): Fraction(1, 2) if exact else 0.5 for k in range(1, 9)}
    return MomentTable(1, 8, moments)


@pytest.mark.parametrize("exact", [True, False])
def test_singular_gram_names_degree(exact):
    with pytest.raises(BasisConstructionError) as info:
        build_basis(_two_point(exact), (1,), 3)
    assert info.value.degree == 2
    assert "degree 2" in str(info.value)


def test_indefinite_gram_fails():
    bad = MomentTable(1, 4, {"1": "1/2", "2": "1/5", "3": "1/4", "4": "1/5"})
    with pytest.raises(BasisConstructionError):
        build_basis(bad, (1,), 2)


def test_condition_records(dirichlet_float):
    b = build_basis(dirichlet_float, (1, 2), 4)
    assert [g.degree for g in b.gram] == [1, 2, 3, 4]
    assert all(g.condition >= 1 for g in b.gram)


@pytest.mark.parametrize("kwargs", [{"u": (0,)}, {"u": (1, 1)}, {"u": (4,)}, {"u": (1,), "form": "nope"}, {"u": ()}])
def test_bad_arguments(dirichlet_exact, kwargs):
    with pytest.raises(ValueError):
        build_basis(dirichlet_exact, max_degree=2, **kwargs)


def test_marginal_measure_resolves_to_parent(dirichlet_exact):
    a = build_basis(dirichlet_exact.marginal((1, 2)), (1,), 2)
    b = build_basis(dirichlet_exact, (1,), 2)
    assert a is b


def test_second_moment_matrix_rejects_other_measure(dirichlet_exact, dirichlet4):
    a = build_basis(dirichlet_exact, (1,), 2)
    with pytest.raises(ValueError):
        second_moment_matrix(a, a, dirichlet4)
