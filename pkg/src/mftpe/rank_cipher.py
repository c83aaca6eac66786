"""Rank -> encipher -> unrank substitution of one pixel group.

This is the scalar reference path: ranks come straight from the canonical
enumerations in :mod:`mftpe.combinatorics`. The engine uses the vectorised
equivalents in :mod:`mftpe.batch`, which are tested against these.
"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

from .combinatorics import (
    count_sum_range_window,
    sum_product_set,
    sum_set,
    sum_weighted_set,
)
from .errors import ArityMismatch, MissingBlockContext
from .profiles import Factor, FactorProfile

BlockContext = Tuple[int, int]  # (block_min, block_max)


def constrained_set(group: Sequence[int], profile: FactorProfile, d: int = 255):
    """The constrained set containing ``group`` under a modular profile."""
    g = tuple(int(v) for v in group)
    s = sum(g)
    if profile.factor is Factor.SUM_ONLY:
        return sum_set(d, s, profile.n)
    if profile.factor is Factor.SUM_GEOMEAN:
        return sum_product_set(d, s, g[0] * g[1] * g[2])
    if profile.factor is Factor.SUM_WEIGHTED:
        w = _weights(profile)
        return sum_weighted_set(d, s, sum(a * b for a, b in zip(w, g)), w)
    raise ValueError("sum-range has no enumerated constrained set")


def _weights(profile: FactorProfile):
    if profile.weights is None:
        raise ValueError("sum-weighted substitution needs resolved weights")
    return profile.weights


def _check(group, profile, d):
    g = tuple(int(v) for v in group)
    if len(g) != profile.n:
        raise ArityMismatch(f"{profile.name} expects groups of {profile.n}, got {len(g)}")
    if any(v < 0 or v > d for v in g):
        raise ValueError(f"pixel values must lie in [0, {d}]: {g}")
    return g


def _range_step(g, block_ctx, k: int, sign: int):
    if block_ctx is None:
        raise MissingBlockContext("sum-range substitution needs the block (min, max)")
    lo, hi = block_ctx
    a, b = g
    if a in (lo, hi) or b in (lo, hi):
        return (b, a)
    s = a + b
    alpha, _, size = count_sum_range_window(s, lo, hi)
    a2 = (a - alpha + sign * k) % size + alpha
    return (a2, s - a2)


def substitute_group(group: Sequence[int], profile: FactorProfile,
                     block_ctx: Optional[BlockContext] = None, k: int = 0,
                     d: int = 255) -> tuple:
    """Encipher one group, keeping the profile's factors fixed.

    ``k`` is the (arbitrarily large) subkey; it is reduced modulo the size
    of the group's constrained set, or of its α..β window for sum-range.
    """
    g = _check(group, profile, d)
    if profile.factor is Factor.SUM_RANGE:
        return _range_step(g, block_ctx, k, +1)
    cset = constrained_set(g, profile, d)
    return cset.unrank((cset.rank(g) + k) % len(cset))


def desubstitute_group(group: Sequence[int], profile: FactorProfile,
                       block_ctx: Optional[BlockContext] = None, k: int = 0,
                       d: int = 255) -> tuple:
    """Inverse of :func:`substitute_group` for the same profile, context and key."""
    g = _check(group, profile, d)
    if profile.factor is Factor.SUM_RANGE:
        return _range_step(g, block_ctx, k, -1)
    cset = constrained_set(g, profile, d)
    return cset.unrank((cset.rank(g) - k) % len(cset))
