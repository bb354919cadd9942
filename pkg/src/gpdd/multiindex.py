"""Multi-index and variable-subset bookkeeping.

Multi-indices are plain tuples of non-negative ints. Subsets of variables are
strictly increasing tuples of 1-based variable labels, so ``(1, 3)`` means
``{x1, x3}`` and ``()`` is the empty subset.

Every enumeration here uses graded lexicographic order: lower total degree
first, and within a degree the exponent tuples in descending lexicographic
order, e.g. ``(2, 0), (1, 1), (0, 2)``.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterator

MultiIndex = tuple[int, ...]
SubsetId = tuple[int, ...]


def degree(index: MultiIndex) -> int:
    return sum(index)


def is_interior(index: MultiIndex) -> bool:
    """True when every exponent is at least one."""
    return all(k >= 1 for k in index)


def _compositions(dim: int, total: int) -> Iterator[MultiIndex]:
    if dim == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(dim - 1, total - first):
            yield (first,) + rest


def enumerate_full_degree(dim: int, degree: int) -> list[MultiIndex]:
    """All indices in ``N_0^dim`` of total ``degree``, graded-lex order.

    The count is ``comb(dim + degree - 1, degree)``.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    return list(_compositions(dim, degree))


def enumerate_interior_degree(dim: int, degree: int) -> list[MultiIndex]:
    """All indices in ``N^dim`` (every exponent >= 1) of total ``degree``.

    Empty when ``degree < dim``. Otherwise there are ``comb(degree-1, dim-1)``.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if degree < dim:
        return []
    return [tuple(k + 1 for k in j) for j in _compositions(dim, degree - dim)]


def enumerate_up_to_degree(dim: int, max_degree: int) -> list[MultiIndex]:
    """Graded-lex stream of all indices in ``N_0^dim`` with degree <= max_degree."""
    out: list[MultiIndex] = []
    for d in range(max_degree + 1):
        out.extend(enumerate_full_degree(dim, d))
    return out


def enumerate_subsets(N: int, max_cardinality: int) -> list[SubsetId]:
    """Non-empty subsets of ``{1..N}`` with at most ``max_cardinality`` members.

    Ordered by cardinality, then lexicographically by members.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 1 <= max_cardinality <= N:
        raise ValueError(f"max_cardinality must be in [1, {N}], got {max_cardinality}")
    out: list[SubsetId] = []
    for s in range(1, max_cardinality + 1):
        out.extend(combinations(range(1, N + 1), s))
    return out


def check_subset(u: SubsetId, N: int | None = None) -> SubsetId:
    u = tuple(int(i) for i in u)
    if any(b <= a for a, b in zip(u, u[1:])):
        raise ValueError(f"subset members must be strictly increasing: {u}")
    if u and u[0] < 1:
        raise ValueError(f"subset members are 1-based labels: {u}")
    if N is not None and u and u[-1] > N:
        raise ValueError(f"subset {u} not contained in {{1..{N}}}")
    return u


def count_gpdd_coefficients(N: int, S: int, m: int) -> int:
    """Number of coefficients of the S-variate, m-th order truncation, mean included."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 0 <= S <= N:
        raise ValueError(f"S must be in [0, {N}], got {S}")
    if m < S or m < 0:
        raise ValueError(f"m must be >= S, got m={m}, S={S}")
    return 1 + sum(comb(N, s) * comb(m, s) for s in range(1, S + 1))


def count_degree_block(N: int, l: int) -> int:
    """Number of (subset, interior index) pairs of total degree ``l`` over N variables."""
    if N < 1 or l < 1:
        raise ValueError(f"need N >= 1 and l >= 1, got N={N}, l={l}")
    return sum(comb(N, s) * comb(l - 1, s - 1) for s in range(1, min(N, l) + 1))


def count_gpce_coefficients(N: int, p: int) -> int:
    """Number of total-degree-p chaos coefficients, ``(N+p)! / (N! p!)``."""
    if N < 1 or p < 0:
        raise ValueError(f"need N >= 1 and p >= 0, got N={N}, p={p}")
    return comb(N + p, N)


def embed(u: SubsetId, index: MultiIndex, scope: SubsetId) -> MultiIndex:
    """Spread an index over ``u`` into an index over the larger ``scope``."""
    pos = {v: k for k, v in enumerate(scope)}
    out = [0] * len(scope)
    for v, k in zip(u, index):
        out[pos[v]] = k
    return tuple(out)
