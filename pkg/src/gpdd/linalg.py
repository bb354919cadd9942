"""Small dense kernels shared by the basis builders and the block solver.

Matrices are numpy arrays: ``float64`` on the double path, ``object`` arrays
of ``Fraction`` on the exact path. The same loops run on both.

The double path also carries a few double-double kernels (Dekker products and
Knuth sums). Moment Gram matrices on the simplex reach condition numbers near
1e13 by degree 8, so a single Gram-Schmidt pass in plain doubles leaves
orthonormality errors around 1e-5. One correction pass whose Gram product is
accumulated in double-double, fed with moments split as ``hi + lo``, brings
that back to about 1e-12.
"""

from __future__ import annotations

import warnings
from fractions import Fraction

import numpy as np
import scipy.linalg


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


def zeros(n: int, exact: bool, m: int | None = None):
    shape = (n,) if m is None else (n, m)
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def gram_schmidt(G, exact: bool, reorthogonalize: bool = True):
    """Orthogonalise the unit vectors e_0, e_1, ... in the inner product ``<a, b> = a^T G b``.

    Returns ``(Q, norms)`` with row ``k`` of ``Q`` the coefficient vector of
    the k-th orthogonal element (unit coefficient on e_k, zeros after it) and
    ``norms[k]`` its squared norm. Float runs use modified Gram-Schmidt with
    one re-orthogonalisation pass; exact runs need a single classical pass.

    A non-positive squared norm is reported by position via
    :class:`NotPositiveDefiniteError` (``.index`` attribute).
    """
    n = G.shape[0]
    Q = zeros(n, exact, n)
    W = zeros(n, exact, n)
    norms = zeros(n, exact)
    for k in range(n):
        if exact:
            v = zeros(n, exact)
            v[k] = Fraction(1)
            for i in range(k):
                coef = W[i, k] / norms[i]
                if coef:
                    v[: i + 1] -= coef * Q[i, : i + 1]
        else:
            v = np.zeros(n)
            v[k] = 1.0
            for _ in range(2 if reorthogonalize else 1):
                for i in range(k):
                    v[: i + 1] -= (v @ W[i]) / norms[i] * Q[i, : i + 1]
        w = G @ v
        nv = v @ w
        if not nv > 0 or (not exact and nv <= 1e-15 * abs(G[k, k])):
            err = NotPositiveDefiniteError(f"Gram matrix is not positive definite at position {k}")
            err.index = k
            raise err
        Q[k] = v
        W[k] = w
        norms[k] = nv
    return Q, norms


_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Error-free product: ``a * b == p + e`` exactly (elementwise on arrays)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def two_sum(a, b):
    """Error-free sum: ``a + b == s + e`` exactly (elementwise on arrays)."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def dd_matmul(A, B_hi, B_lo=None):
    """``A @ (B_hi + B_lo)`` accumulated in double-double; returns ``(hi, lo)``."""
    A = np.asarray(A, dtype=float)
    B_hi = np.asarray(B_hi, dtype=float)
    s = np.zeros((A.shape[0], B_hi.shape[1]))
    e = np.zeros_like(s)
    for p in range(A.shape[1]):
        ph, pl = two_prod(A[:, p, None], B_hi[None, p, :])
        s, err = two_sum(s, ph)
        e += err + pl
    if B_lo is not None:
        e += A @ np.asarray(B_lo, dtype=float)
    return two_sum(s, e)


def gram_product(C, G_hi, G_lo=None):
    """``C (G_hi + G_lo) C^T`` to roughly unit roundoff of the result."""
    T_hi, T_lo = dd_matmul(G_hi, C.T)
    if G_lo is not None:
        T_hi, T_lo = two_sum(T_hi, T_lo + np.asarray(G_lo, dtype=float) @ C.T)
    M_hi, M_lo = dd_matmul(C, T_hi, T_lo)
    return M_hi, M_lo


def refine_orthonormal(C, G_hi, G_lo=None, passes: int = 1):
    """Re-orthonormalise the rows of ``C`` against ``G_hi + G_lo``.

    Each pass factors the accurately computed ``M = C G C^T = L L^T`` and
    replaces ``C`` by ``L^{-1} C``. ``L`` is lower triangular, so row ``k``
    still only involves rows ``0..k`` of the input and the triangular
    structure of ``C`` is kept.
    """
    n = len(C)
    for _ in range(passes):
        M_hi, M_lo = gram_product(C, G_hi, G_lo)
        E = (M_hi - np.eye(n)) + M_lo
        try:
            L = np.linalg.cholesky(np.eye(n) + (E + E.T) / 2)
        except np.linalg.LinAlgError as err:
            raise NotPositiveDefiniteError("refinement Gram matrix is not positive definite") from err
        C = scipy.linalg.solve_triangular(L, C, lower=True)
    return C


def ldl_solve_exact(A, b):
    """Solve a symmetric system exactly via LDL^T; falls back to pivoted elimination."""
    n = len(b)
    L = np.empty((n, n), dtype=object)
    L.fill(Fraction(0))
    D = [Fraction(0)] * n
    ok = True
    for j in range(n):
        d = A[j, j] - sum(L[j, k] ** 2 * D[k] for k in range(j))
        if d <= 0:
            ok = False
            break
        D[j] = d
        L[j, j] = Fraction(1)
        for i in range(j + 1, n):
            L[i, j] = (A[i, j] - sum(L[i, k] * L[j, k] * D[k] for k in range(j))) / d
    if ok:
        z = list(b)
        for i in range(n):
            z[i] = b[i] - sum(L[i, k] * z[k] for k in range(i))
        x = [Fraction(0)] * n
        for i in reversed(range(n)):
            x[i] = z[i] / D[i] - sum(L[k, i] * x[k] for k in range(i + 1, n))
        return np.array(x, dtype=object), "exact-ldl"
    warnings.warn("block matrix is not positive definite; using pivoted elimination", RuntimeWarning, stacklevel=3)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise np.linalg.LinAlgError(f"singular block matrix (column {c})")
        M[c], M[p] = M[p], M[c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    x = [Fraction(0)] * n
    for i in reversed(range(n)):
        x[i] = (M[i][n] - sum(M[i][k] * x[k] for k in range(i + 1, n))) / M[i][i]
    return np.array(x, dtype=object), "exact-pivoted"


def spd_solve(J, rhs):
    """Cholesky solve with a symmetric-indefinite fallback and a warning."""
    try:
        c = scipy.linalg.cho_factor(J, lower=True, check_finite=True)
        return scipy.linalg.cho_solve(c, rhs), "cholesky"
    except np.linalg.LinAlgError:
        warnings.warn("block matrix failed Cholesky; using symmetric-indefinite solve", RuntimeWarning, stacklevel=3)
        return scipy.linalg.solve(J, rhs, assume_a="sym"), "ldl"
