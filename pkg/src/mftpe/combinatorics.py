"""Exact counting and lexicographic enumeration of bounded pixel vectors.

``psi(d, s, n)`` counts vectors in [0, d]^n with element sum ``s``. The
constrained sets used by the substitution step are enumerated in the same
(i, j) loop order as the rank functions, so a vector's rank is simply its
index in the returned tuple.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import accumulate
from typing import Dict, List, Sequence, Tuple

Vector = Tuple[int, ...]


class PsiTable:
    """Memoised Ψ_d(s, n) rows for one ``d``.

    Rows are built on demand from the two-branch recurrence (prefix sums
    over the previous row); a lock guards row construction so instances can
    be shared between threads.
    """

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self._rows: Dict[int, List[int]] = {1: [1] * (d + 1)}
        self._lock = threading.Lock()

    def row(self, n: int) -> List[int]:
        """Ψ_d(s, n) for s = 0 .. d*n."""
        if n < 1:
            raise ValueError("n must be >= 1")
        row = self._rows.get(n)
        if row is not None:
            return row
        with self._lock:
            top = max(k for k in self._rows if k <= n)
            prev = self._rows[top]
            for k in range(top + 1, n + 1):
                prev = self._rows.get(k) or self._next_row(prev, k)
                self._rows[k] = prev
            return self._rows[n]

    def _next_row(self, prev: List[int], n: int) -> List[int]:
        # entry s sums prev[max(0, s-d) .. min(s, len(prev)-1)]
        d, top = self.d, len(prev) - 1
        prefix = list(accumulate(prev, initial=0))
        return [prefix[min(s, top) + 1] - prefix[max(s - d, 0)] for s in range(d * n + 1)]

    def __call__(self, s: int, n: int) -> int:
        if n < 1:
            raise ValueError("n must be >= 1")
        if s < 0 or s > self.d * n:
            return 0
        return self.row(n)[s]


_tables: Dict[int, PsiTable] = {}
_tables_lock = threading.Lock()


def psi_table(d: int) -> PsiTable:
    table = _tables.get(d)
    if table is None:
        with _tables_lock:
            table = _tables.setdefault(d, PsiTable(d))
    return table


def psi(d: int, s: int, n: int) -> int:
    """Number of vectors in [0, d]^n whose elements sum to ``s``."""
    return psi_table(d)(s, n)


# --------------------------------------------------------------------------
# Enumerations
# --------------------------------------------------------------------------

def enumerate_sum(d: int, s: int, n: int) -> List[Vector]:
    """All vectors of [0, d]^n with sum ``s`` in lexicographic order."""
    if n == 1:
        return [(s,)] if 0 <= s <= d else []
    table = psi_table(d)
    out = []
    for i in range(max(0, s - d * (n - 1)), min(s, d) + 1):
        if table(s - i, n - 1):
            out.extend((i,) + rest for rest in enumerate_sum(d, s - i, n - 1))
    return out


def enumerate_sum_product(d: int, s: int, p: int, n: int = 3) -> List[Vector]:
    """Triples with sum ``s`` and product ``p``, in (i, j) loop order."""
    if n != 3:
        raise ValueError("sum/product sets are defined for n = 3 only")
    out = []
    top = min(s + 1, d + 1)
    for i in range(top):
        for j in range(top):
            k = s - i - j
            if 0 <= k <= d and i * j * k == p:
                out.append((i, j, k))
    return out


def enumerate_sum_weighted(d: int, s: int, v: int, weights: Sequence[int], n: int = 3) -> List[Vector]:
    """Triples with sum ``s`` and weighted sum ``w1*i + w2*j + w3*k == v``."""
    if n != 3:
        raise ValueError("sum/weighted sets are defined for n = 3 only")
    w1, w2, w3 = weights
    out = []
    top = min(s + 1, d + 1)
    for i in range(top):
        for j in range(top):
            k = s - i - j
            if 0 <= k <= d and i * w1 + j * w2 + k * w3 == v:
                out.append((i, j, k))
    return out


def count_sum_range_window(s: int, block_min: int, block_max: int) -> Tuple[int, int, int]:
    """Bounds (alpha, beta) of the first-pixel window for a pair with sum ``s``.

    Returns ``(alpha, beta, size)`` with ``size = max(0, beta - alpha + 1)``.
    """
    if block_min > block_max:
        raise ValueError("block_min must not exceed block_max")
    alpha = max(block_min + 1, s - block_max + 1)
    beta = min(s - block_min - 1, block_max - 1)
    return alpha, beta, max(0, beta - alpha + 1)


# --------------------------------------------------------------------------
# Constrained sets with O(1) rank / unrank
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedSet:
    members: Tuple[Vector, ...]
    _index: Dict[Vector, int] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(self.members)})

    def __len__(self):
        return len(self.members)

    def __contains__(self, vec):
        return tuple(vec) in self._index

    def rank(self, vec) -> int:
        return self._index[tuple(vec)]

    def unrank(self, r: int) -> Vector:
        return self.members[r]


@lru_cache(maxsize=65536)
def sum_set(d: int, s: int, n: int) -> ConstrainedSet:
    return ConstrainedSet(tuple(enumerate_sum(d, s, n)))


@lru_cache(maxsize=65536)
def sum_product_set(d: int, s: int, p: int) -> ConstrainedSet:
    return ConstrainedSet(tuple(enumerate_sum_product(d, s, p)))


@lru_cache(maxsize=65536)
def sum_weighted_set(d: int, s: int, v: int, weights: Tuple[int, int, int]) -> ConstrainedSet:
    return ConstrainedSet(tuple(enumerate_sum_weighted(d, s, v, weights)))


def psi_sum_product(d: int, s: int, p: int) -> int:
    return len(sum_product_set(d, s, p))


def psi_sum_weighted(d: int, s: int, v: int, weights) -> int:
    return len(sum_weighted_set(d, s, v, tuple(weights)))
