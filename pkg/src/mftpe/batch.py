"""Vectorised substitution over many pixel groups at once.

Each profile gets closed-form (or segment-sorted) rank/unrank so a whole
round of groups is handled with a handful of numpy passes. Results are
bit-identical to :func:`mftpe.rank_cipher.substitute_group` applied group by
group; subkeys arrive as ``(G, 2)`` uint64 arrays holding the low and high
64-bit halves of each 128-bit subkey.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import ArityMismatch, MissingBlockContext
from .profiles import Factor, FactorProfile

_GEO_CHUNK = 16384


def keys_from_ints(values: Sequence[int]) -> np.ndarray:
    """Pack Python ints (< 2**128) into the ``(G, 2)`` uint64 subkey layout."""
    mask = (1 << 64) - 1
    out = np.empty((len(values), 2), dtype=np.uint64)
    for i, v in enumerate(values):
        v = int(v)
        if v < 0 or v >> 128:
            raise ValueError("subkeys must lie in [0, 2**128)")
        out[i, 0] = v & mask
        out[i, 1] = v >> 64
    return out


def reduce_keys(keys: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    """128-bit subkey modulo a per-group modulus (each modulus < 2**31)."""
    m = np.asarray(modulus, dtype=np.uint64)
    lo = keys[:, 0] % m
    hi = keys[:, 1] % m
    r32 = np.uint64(1 << 32) % m
    r64 = (r32 * r32) % m
    return ((hi * r64 + lo) % m).astype(np.int64)


def _shift(rank, size, keys, sign):
    return (rank + sign * reduce_keys(keys, size)) % size


# --------------------------------------------------------------------------
# sum-only
# --------------------------------------------------------------------------

def _sum2(g, keys, sign, d):
    a = g[:, 0]
    s = a + g[:, 1]
    lo = np.maximum(0, s - d)
    size = np.minimum(s, d) - lo + 1
    a2 = lo + _shift(a - lo, size, keys, sign)
    return np.stack([a2, s - a2], axis=1)


@lru_cache(maxsize=8)
def _sum3_tables(d: int):
    t = np.arange(2 * d + 1)
    psi2 = np.minimum(t, d) - np.maximum(0, t - d) + 1
    s = np.arange(3 * d + 1)[:, None]
    a = np.arange(d + 1)[None, :]
    rem = s - a
    inside = (rem >= 0) & (rem <= 2 * d)
    cols = np.where(inside, psi2[np.clip(rem, 0, 2 * d)], 0)
    cum = np.zeros((3 * d + 1, d + 2), dtype=np.int64)
    np.cumsum(cols, axis=1, out=cum[:, 1:])
    big = int(cum[:, -1].max()) + 1
    flat = (np.arange(3 * d + 1)[:, None] * big + cum).ravel()
    return cum, flat, big


def _sum3_rank(g, d):
    cum, _, _ = _sum3_tables(d)
    a, b = g[:, 0], g[:, 1]
    s = g.sum(axis=1)
    rank = cum[s, a] + b - np.maximum(0, s - a - d)
    return rank, cum[s, d + 1], s


def _sum3_unrank(s, r, d):
    cum, flat, big = _sum3_tables(d)
    idx = np.searchsorted(flat, s * big + r, side="right") - 1
    a = idx - s * (d + 2)
    b = np.maximum(0, s - a - d) + r - cum[s, a]
    return np.stack([a, b, s - a - b], axis=1)


def _sum3(g, keys, sign, d):
    rank, size, s = _sum3_rank(g, d)
    return _sum3_unrank(s, _shift(rank, size, keys, sign), d)


# --------------------------------------------------------------------------
# sum + geometric mean (product)
# --------------------------------------------------------------------------

def _geo_zero(g, keys, sign, d):
    """Product-zero groups: triples containing a 0, handled in closed form."""
    a, b = g[:, 0], g[:, 1]
    s = g.sum(axis=1)
    j_lo = np.maximum(0, s - d)
    n0 = np.minimum(s, d) - j_lo + 1            # i = 0 row: (0, j, s - j)
    i_lo = np.maximum(1, s - d)
    i_hi = np.minimum(s, d)
    rows = np.maximum(0, i_hi - i_lo + 1)
    size = n0 + 2 * rows - ((s >= 1) & (s <= d))  # (s, 0, 0) appears once
    rank = np.where(a == 0, b - j_lo, n0 + 2 * (a - i_lo) + (b != 0))
    r = _shift(rank, size, keys, sign)
    q = r - n0
    i = i_lo + q // 2
    second = (q % 2) == 1
    first_row = r < n0
    na = np.where(first_row, 0, i)
    nb = np.where(first_row, j_lo + r, np.where(second, s - i, 0))
    return np.stack([na, nb, s - na - nb], axis=1)


def _isqrt(x):
    r = np.sqrt(x.astype(np.float64)).astype(np.int64)
    r += (r + 1) * (r + 1) <= x
    r -= r * r > x
    return r


_BISECT_STEPS = 12


def _min_element_bounds(s, p):
    """Real interval holding the smallest element x of any {x <= y <= z}.

    On [0, s/3] both x(s-x)^2 and x^2(s-2x) increase; real roots y, z need
    x(s-x)^2 >= 4p and y >= x needs x^2(s-2x) <= p. Bisection brackets each
    crossing to within (s/3) / 2**_BISECT_STEPS.
    """
    sf = s.astype(np.float64)
    pf = p.astype(np.float64)
    top = sf / 3.0
    a1, b1 = np.zeros_like(sf), top.copy()      # first x with x(s-x)^2 >= 4p
    a2, b2 = np.zeros_like(sf), top.copy()      # last x with x^2(s-2x) <= p
    for _ in range(_BISECT_STEPS):
        m1 = 0.5 * (a1 + b1)
        up = m1 * (sf - m1) ** 2 >= 4.0 * pf
        b1 = np.where(up, m1, b1)
        a1 = np.where(up, a1, m1)
        m2 = 0.5 * (a2 + b2)
        ok = m2 * m2 * (sf - 2.0 * m2) <= pf
        a2 = np.where(ok, m2, a2)
        b2 = np.where(ok, b2, m2)
    return np.floor(a1).astype(np.int64) - 1, np.ceil(b2).astype(np.int64) + 1


def _geo_positive(g, keys, sign, d):
    """Product-positive groups: enumerate the few multisets {x <= y <= z}.

    x is the smallest element, so x divides p and y, z are the integer roots
    of u^2 - (s - x) u + p / x; candidates for x are limited to the bracket
    from :func:`_min_element_bounds`.
    """
    G = len(g)
    base = d + 1
    span = base ** 3
    s = g.sum(axis=1)
    p = g[:, 0] * g[:, 1] * g[:, 2]
    lo, hi = _min_element_bounds(s, p)
    x_lo = np.maximum(np.maximum(1, s - 2 * d), lo)
    x_hi = np.minimum(np.minimum(d, s // 3), hi)
    width = int((x_hi - x_lo).max()) + 1
    X = x_lo[:, None] + np.arange(width)[None, :]
    mask = (X <= x_hi[:, None]) & (p[:, None] % X == 0)
    gi, col = np.nonzero(mask)
    x = X[gi, col]
    t = s[gi] - x
    disc = t * t - 4 * (p[gi] // x)
    root = _isqrt(np.maximum(disc, 0))
    y = (t - root) // 2
    z = (t + root) // 2
    ok = (disc >= 0) & (root * root == disc) & ((t - root) % 2 == 0) & (y >= x) & (z <= d)
    gi, x, y, z = gi[ok], x[ok], y[ok], z[ok]

    xy, yz = x != y, y != z
    perms = [
        (x, y, z, np.ones_like(xy)),
        (x, z, y, yz),
        (y, x, z, xy),
        (y, z, x, xy),
        (z, x, y, yz),
        (z, y, x, xy & yz),
    ]
    off = gi * span
    members = np.concatenate([(off + (i * base + j) * base + k)[keep] for i, j, k, keep in perms])
    members.sort()

    owners = np.arange(G, dtype=np.int64) * span
    start = np.searchsorted(members, owners)
    size = np.searchsorted(members, owners + span) - start
    code = (g[:, 0] * base + g[:, 1]) * base + g[:, 2]
    rank = np.searchsorted(members, owners + code) - start
    out = members[start + _shift(rank, size, keys, sign)] - owners
    return np.stack([out // (base * base), (out // base) % base, out % base], axis=1)


def _geomean(g, keys, sign, d):
    out = np.empty_like(g)
    zero = (g == 0).any(axis=1)
    if zero.any():
        out[zero] = _geo_zero(g[zero], keys[zero], sign, d)
    pos = np.nonzero(~zero)[0]
    for lo in range(0, len(pos), _GEO_CHUNK):
        idx = pos[lo:lo + _GEO_CHUNK]
        out[idx] = _geo_positive(g[idx], keys[idx], sign, d)
    return out


# --------------------------------------------------------------------------
# sum + weighted mean
# --------------------------------------------------------------------------

def line_direction(weights) -> Optional[tuple]:
    """Primitive lattice direction of {sum fixed, weighted sum fixed}.

    Oriented so the first non-zero component is positive (lexicographic
    order along the line). ``None`` when all weights are equal, in which case
    the weighted constraint is implied by the sum.
    """
    w1, w2, w3 = weights
    v = (w3 - w2, w1 - w3, w2 - w1)
    g = math.gcd(math.gcd(abs(v[0]), abs(v[1])), abs(v[2]))
    if g == 0:
        return None
    v = tuple(c // g for c in v)
    lead = next(c for c in v if c)
    return v if lead > 0 else tuple(-c for c in v)


def _t_bounds(x, e, d):
    if e > 0:
        return -(x // e), (d - x) // e
    if e < 0:
        return -((d - x) // -e), x // -e
    return None


def _weighted(g, keys, sign, d, weights):
    direction = line_direction(weights)
    if direction is None:
        return _sum3(g, keys, sign, d)
    t_lo = np.full(len(g), -(1 << 40), dtype=np.int64)
    t_hi = np.full(len(g), 1 << 40, dtype=np.int64)
    for col, e in enumerate(direction):
        bounds = _t_bounds(g[:, col], e, d)
        if bounds is not None:
            t_lo = np.maximum(t_lo, bounds[0])
            t_hi = np.minimum(t_hi, bounds[1])
    size = t_hi - t_lo + 1
    t = t_lo + _shift(-t_lo, size, keys, sign)
    return g + t[:, None] * np.asarray(direction, dtype=np.int64)[None, :]


# --------------------------------------------------------------------------
# sum + range
# --------------------------------------------------------------------------

def _range(g, keys, sign, d, block_min, block_max):
    a, b = g[:, 0], g[:, 1]
    lo = np.asarray(block_min, dtype=np.int64)
    hi = np.asarray(block_max, dtype=np.int64)
    swap = (a == lo) | (a == hi) | (b == lo) | (b == hi)
    s = a + b
    alpha = np.maximum(lo + 1, s - hi + 1)
    beta = np.minimum(s - lo - 1, hi - 1)
    size = np.where(swap, 1, beta - alpha + 1)
    a2 = np.where(swap, b, (a - alpha + sign * reduce_keys(keys, size)) % size + alpha)
    return np.stack([a2, s - a2], axis=1)


# --------------------------------------------------------------------------

def substitute_batch(groups, profile: FactorProfile, keys: np.ndarray,
                     block_min=None, block_max=None, d: int = 255,
                     inverse: bool = False) -> np.ndarray:
    """Substitute (or, with ``inverse=True``, undo) every row of ``groups``.

    ``block_min``/``block_max`` give each group's block extremes and are
    required for sum-range.
    """
    g = np.asarray(groups, dtype=np.int64)
    if g.ndim != 2 or g.shape[1] != profile.n:
        raise ArityMismatch(f"{profile.name} expects (G, {profile.n}) groups, got {g.shape}")
    if len(g) == 0:
        return g.copy()
    keys = np.asarray(keys, dtype=np.uint64).reshape(len(g), 2)
    sign = -1 if inverse else 1
    f = profile.factor
    if f is Factor.SUM_ONLY:
        return (_sum2 if profile.n == 2 else _sum3)(g, keys, sign, d)
    if f is Factor.SUM_GEOMEAN:
        return _geomean(g, keys, sign, d)
    if f is Factor.SUM_WEIGHTED:
        if profile.weights is None:
            raise ValueError("sum-weighted substitution needs resolved weights")
        return _weighted(g, keys, sign, d, profile.weights)
    if block_min is None or block_max is None:
        raise MissingBlockContext("sum-range substitution needs block extremes")
    return _range(g, keys, sign, d, block_min, block_max)
