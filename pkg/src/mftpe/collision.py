"""Thumbnail-collision probabilities: closed forms, exhaustive oracles, set-size totals.

Closed forms are evaluated as exact rationals when the denominator is small
enough and in log space otherwise. Where the published notation is ambiguous
(``A^2`` / ``A^3`` over a Psi value) both readings are available:

* ``"power"``: ``Psi**k``, which agrees with exhaustive enumeration;
* ``"permutation"``: the falling factorial ``Psi * (Psi - 1) * ...``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .combinatorics import count_sum_range_window, psi_sum_product, psi_sum_weighted, psi_table
from .errors import InstanceTooLarge, ProbabilityOverUnity
from .image import Image, _check_block_size, group_pixels, to_blocks
from .profiles import Factor, FactorProfile

EXACT_BIT_LIMIT = 10 ** 6
ORACLE_STATE_LIMIT = 10 ** 7
READINGS = ("power", "permutation")
EQ_READINGS = ("shared-denominator", "all-factors", "per-factor")


@dataclass(frozen=True)
class Probability:
    """A probability held exactly (``exact``) or only as a natural log (``logp``)."""

    exact: Optional[Fraction]
    logp: float

    def __post_init__(self):
        if self.exact is not None and not (0 <= self.exact <= 1):
            raise ProbabilityOverUnity(f"probability {self.exact} outside [0, 1]")

    @classmethod
    def from_fraction(cls, value) -> "Probability":
        value = Fraction(value)
        return cls(value, _log_fraction(value))

    @classmethod
    def from_log(cls, logp: float) -> "Probability":
        if logp > 1e-12:
            raise ProbabilityOverUnity(f"log-probability {logp} > 0")
        return cls(None, min(logp, 0.0))

    @property
    def mode(self) -> str:
        return "exact" if self.exact is not None else "log"

    @property
    def value(self) -> float:
        return float(self.exact) if self.exact is not None else math.exp(self.logp)

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "logp": self.logp, "value": self.value}
        if self.exact is not None:
            out["exact"] = str(self.exact)
        return out

    def __str__(self):
        return str(self.exact) if self.exact is not None else f"exp({self.logp:.6g})"


def _log_fraction(f: Fraction) -> float:
    if f == 0:
        return -math.inf
    return math.log(f.numerator) - math.log(f.denominator)


def _want_exact(denominator_bits: float, exact: Optional[bool]) -> bool:
    return denominator_bits < EXACT_BIT_LIMIT if exact is None else exact


def _arrangement(k: int, power: int, reading: str) -> int:
    if reading == "power":
        return k ** power
    if reading == "permutation":
        return math.perm(k, power)
    raise ValueError(f"unknown reading {reading!r}; choose from {READINGS}")


def _sum_range(d: int, n: int):
    return range(0, d * n + 1)


# --------------------------------------------------------------------------
# Single blocks
# --------------------------------------------------------------------------

def p_block_fixed_vs_random(d: int, n: int, s1: int, exact: Optional[bool] = None) -> Probability:
    """P[sum(B2) = s1] for a uniform block B2 of ``n`` pixels in [0, d]."""
    if not 0 <= s1 <= d * n:
        raise ValueError(f"sum {s1} outside [0, {d * n}]")
    psi = psi_table(d)(s1, n)
    if _want_exact(n * math.log2(d + 1), exact):
        return Probability.from_fraction(Fraction(psi, (d + 1) ** n))
    return Probability.from_log(math.log(psi) - n * math.log(d + 1))


def _pair_count(d: int, n: int, reading: str) -> int:
    """Numerator of the two-random-blocks formula: ``2 + sum_{s=1}^{dn-1} A^2``."""
    row = psi_table(d).row(n)
    return 2 + sum(_arrangement(row[s], 2, reading) for s in range(1, d * n))


def p_block_two_random(d: int, n: int, reading: str = "power",
                       exact: Optional[bool] = None) -> Probability:
    """P[sum(B1) = sum(B2)] for two independent uniform blocks."""
    num = _pair_count(d, n, reading)
    if _want_exact(2 * n * math.log2(d + 1), exact):
        return Probability.from_fraction(Fraction(num, (d + 1) ** (2 * n)))
    return Probability.from_log(math.log(num) - 2 * n * math.log(d + 1))


@dataclass(frozen=True)
class ThreeBlockResult:
    probability: Probability
    closed_form: Dict[str, Fraction]

    def to_dict(self) -> dict:
        return {"probability": self.probability.to_dict(),
                "closed_form_unverified": {k: str(v) for k, v in self.closed_form.items()}}


def p_block_three_any_pair(d: int, n: int) -> ThreeBlockResult:
    """P[at least two of three uniform blocks share a sum].

    Computed as ``3*sum(q^2) - 2*sum(q^3)`` over the sum distribution ``q``.
    The literal three-block formula (cubes over ``(d+1)^(2n)``) is attached
    for both readings; it is not a probability in general.
    """
    row = psi_table(d).row(n)
    total = (d + 1) ** n
    q2 = sum(row[s] ** 2 for s in _sum_range(d, n))
    q3 = sum(row[s] ** 3 for s in _sum_range(d, n))
    p = Fraction(3 * q2, total ** 2) - Fraction(2 * q3, total ** 3)
    literal = {
        r: Fraction(2 + sum(_arrangement(row[s], 3, r) for s in range(1, d * n)), (d + 1) ** (2 * n))
        for r in READINGS
    }
    return ThreeBlockResult(Probability.from_fraction(p), literal)


# --------------------------------------------------------------------------
# Images of m blocks
# --------------------------------------------------------------------------

def _check_sums(sums: Sequence[int], d: int, n: int) -> List[int]:
    sums = [int(s) for s in sums]
    if not sums:
        raise ValueError("need at least one block sum")
    for s in sums:
        if not 0 <= s <= d * n:
            raise ValueError(f"block sum {s} outside [0, {d * n}]")
    return sums


def _image_weight(sums: Sequence[int], d: int, n: int) -> int:
    """``S = prod_i Psi_d(s_i, n)`` for one image."""
    table = psi_table(d)
    return math.prod(table(s, n) for s in sums)


def _log_image_weight(sums: Sequence[int], d: int, n: int) -> float:
    table = psi_table(d)
    return math.fsum(math.log(table(s, n)) for s in sums)


def p_image_fixed_vs_random(sums: Sequence[int], d: int, n: int,
                            exact: Optional[bool] = None) -> Probability:
    """P[Thum(I2) = Thum(I1)] for a given I1 (block sums ``sums``) and uniform I2."""
    sums = _check_sums(sums, d, n)
    m = len(sums)
    if _want_exact(m * n * math.log2(d + 1), exact):
        return Probability.from_fraction(Fraction(_image_weight(sums, d, n), (d + 1) ** (m * n)))
    return Probability.from_log(_log_image_weight(sums, d, n) - m * n * math.log(d + 1))


def p_image_two_random(d: int, n: int, m: int, reading: str = "power",
                       exact: Optional[bool] = None) -> Probability:
    """P[Thum(I1) = Thum(I2)] for two uniform images of ``m`` blocks."""
    if m < 1:
        raise ValueError("m must be >= 1")
    num = _pair_count(d, n, reading)
    if _want_exact(2 * m * n * math.log2(d + 1), exact):
        return Probability.from_fraction(Fraction(num ** m, (d + 1) ** (2 * m * n)))
    return Probability.from_log(m * (math.log(num) - 2 * n * math.log(d + 1)))


def p_image_three(sums1: Sequence[int], sums2: Sequence[int], d: int, n: int) -> Probability:
    """Three-image closed form ``(S1 + S1*S2)/D - S1^2*S2/D^2`` with ``D = (d+1)^(mn)``."""
    sums1, sums2 = _check_sums(sums1, d, n), _check_sums(sums2, d, n)
    if len(sums1) != len(sums2):
        raise ValueError("images must have the same number of blocks")
    m = len(sums1)
    S1, S2 = _image_weight(sums1, d, n), _image_weight(sums2, d, n)
    D = (d + 1) ** (m * n)
    value = Fraction(S1 + S1 * S2, D) - Fraction(S1 * S1 * S2, D * D)
    if not 0 <= value <= 1:
        raise ProbabilityOverUnity(f"three-image formula evaluates to {value}")
    return Probability.from_fraction(value)


def p_image_n(image_sums: Sequence[Sequence[int]], d: int, n: int, count: Optional[int] = None,
              reading: str = "shared-denominator", exact: Optional[bool] = None) -> Probability:
    """``1 - prod_i (1 - x_i)`` over the prefix products of image weights.

    ``count`` is the number of images N (default ``len(image_sums)``). The
    ``reading`` selects which factors enter the product:

    * ``"shared-denominator"``: i = 1..N-1 with ``x_i = S_1...S_i / (d+1)^(mn)``. This is
      the reading that reduces to the two- and three-image closed forms and
      needs the sums of the first N-1 images.
    * ``"all-factors"``: i = 1..N with the same ``x_i``; needs all N images.
    * ``"per-factor"``: i = 1..N-1 with ``x_i = S_1...S_i / (d+1)^(i*mn)``.

    Raises :class:`ProbabilityOverUnity` when some ``x_i`` exceeds one.
    """
    if reading not in EQ_READINGS:
        raise ValueError(f"unknown reading {reading!r}; choose from {EQ_READINGS}")
    N = len(image_sums) if count is None else count
    if N < 2:
        raise ValueError("need at least two images")
    factors = N if reading == "all-factors" else N - 1
    if len(image_sums) < factors:
        raise ValueError(f"reading {reading!r} with N={N} needs sums for {factors} images")
    sums = [_check_sums(s, d, n) for s in image_sums[:factors]]
    m = len(sums[0])
    if any(len(s) != m for s in sums):
        raise ValueError("images must have the same number of blocks")
    mn = m * n

    def denom_exp(i):  # exponent of (d+1) in the i-th factor, i from 1
        return i * mn if reading == "per-factor" else mn

    if _want_exact(factors * mn * math.log2(d + 1), exact):
        prefix, keep = 1, Fraction(1)
        for i, s in enumerate(sums, start=1):
            prefix *= _image_weight(s, d, n)
            x = Fraction(prefix, (d + 1) ** denom_exp(i))
            if x > 1:
                raise ProbabilityOverUnity(f"factor {i} equals {x} > 1")
            keep *= 1 - x
        return Probability.from_fraction(1 - keep)

    log_prefix, terms = 0.0, []
    for i, s in enumerate(sums, start=1):
        log_prefix += _log_image_weight(s, d, n)
        log_x = log_prefix - denom_exp(i) * math.log(d + 1)
        if log_x > 1e-12:
            raise ProbabilityOverUnity(f"factor {i} equals exp({log_x}) > 1")
        x = math.exp(min(log_x, 0.0))
        terms.append(-math.inf if x >= 1.0 else math.log1p(-x))
    acc = math.fsum(terms)
    p = -math.expm1(acc)
    return Probability.from_log(math.log(p) if p > 0 else -math.inf)


# --------------------------------------------------------------------------
# Exhaustive oracle
# --------------------------------------------------------------------------

ORACLE_MODES = ("pair", "triple", "fixed", "fixed-pair")


def _thumbnail_codes(d: int, n: int, m: int) -> np.ndarray:
    """One integer per image in ``[0, d]^(m*n)`` encoding its tuple of block sums."""
    states = np.array(list(itertools.product(range(d + 1), repeat=m * n)), dtype=np.int64)
    sums = states.reshape(-1, m, n).sum(axis=2)
    radix = (d * n + 1) ** np.arange(m, dtype=np.int64)
    return sums @ radix


def _code_of(sums: Sequence[int], d: int, n: int) -> int:
    return sum(int(s) * (d * n + 1) ** i for i, s in enumerate(sums))


def brute_force_collision(d: int, n: int, m: int = 1, mode: str = "pair",
                          sums: Optional[Sequence[int]] = None,
                          sums2: Optional[Sequence[int]] = None) -> Probability:
    """Exact collision probability by enumerating every image tuple.

    Modes:

    * ``pair``: two uniform images, equal thumbnails;
    * ``triple``: three uniform images, some pair with equal thumbnails;
    * ``fixed``: image with block sums ``sums`` against one uniform image;
    * ``fixed-pair``: images with sums ``sums`` and ``sums2`` plus one uniform
      image, some pair with equal thumbnails.
    """
    if mode not in ORACLE_MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {ORACLE_MODES}")
    per_image = (d + 1) ** (m * n)
    random_images = {"pair": 2, "triple": 3, "fixed": 1, "fixed-pair": 1}[mode]
    states = per_image ** random_images
    if states > ORACLE_STATE_LIMIT:
        raise InstanceTooLarge(f"{states} states exceed the oracle limit {ORACLE_STATE_LIMIT}")
    codes = _thumbnail_codes(d, n, m)

    if mode == "pair":
        hits = sum(int(np.count_nonzero(codes == c)) for c in codes)
    elif mode == "triple":
        hits = 0
        for a in codes:
            eq_ab = (codes == a)[:, None]
            eq_ac = (codes == a)[None, :]
            eq_bc = codes[:, None] == codes[None, :]
            hits += int(np.count_nonzero(eq_ab | eq_ac | eq_bc))
    elif mode == "fixed":
        if sums is None or len(sums) != m:
            raise ValueError("fixed mode needs one block sum per block")
        hits = int(np.count_nonzero(codes == _code_of(_check_sums(sums, d, n), d, n)))
    else:
        if sums is None or sums2 is None or len(sums) != m or len(sums2) != m:
            raise ValueError("fixed-pair mode needs block sums for two images")
        c1 = _code_of(_check_sums(sums, d, n), d, n)
        c2 = _code_of(_check_sums(sums2, d, n), d, n)
        hits = per_image if c1 == c2 else int(np.count_nonzero((codes == c1) | (codes == c2)))
    return Probability.from_fraction(Fraction(hits, states))


# --------------------------------------------------------------------------
# Constrained-set size totals
# --------------------------------------------------------------------------

def group_set_size(group: Sequence[int], profile: FactorProfile, block_min: Optional[int] = None,
                   block_max: Optional[int] = None, d: int = 255) -> int:
    """Size of the set a group may be enciphered into under ``profile``.

    For sum-range this is the alpha..beta window evaluated for every pair,
    including pairs holding a block extreme.
    """
    g = tuple(int(v) for v in group)
    s = sum(g)
    if profile.factor is Factor.SUM_ONLY:
        return psi_table(d)(s, len(g))
    if profile.factor is Factor.SUM_GEOMEAN:
        return psi_sum_product(d, s, math.prod(g))
    if profile.factor is Factor.SUM_WEIGHTED:
        if profile.weights is None:
            raise ValueError("sum-weighted set sizes need explicit weights")
        return psi_sum_weighted(d, s, sum(w * v for w, v in zip(profile.weights, g)), profile.weights)
    if block_min is None or block_max is None:
        raise ValueError("sum-range set sizes need the block (min, max)")
    return count_sum_range_window(s, block_min, block_max)[2]


def set_size_total(blocks: Iterable[Sequence[int]], profile: FactorProfile, d: int = 255) -> int:
    """Sum of group set sizes over blocks given as flat pixel sequences."""
    total = 0
    for block in blocks:
        block = [int(v) for v in block]
        groups, _ = group_pixels(block, profile.n)
        lo, hi = min(block), max(block)
        total += sum(group_set_size(g, profile, lo, hi, d) for g in groups)
    return total


def image_set_size_total(image: Image, block_size: int, profile: FactorProfile, d: int = 255) -> int:
    """:func:`set_size_total` over every channel and block of ``image``.

    Sizes for geomean and weighted profiles are enumerated per distinct
    group, so this is meant for small images.
    """
    _check_block_size(image, block_size)
    blocks = to_blocks(image.pixels, block_size)
    return set_size_total((b for ch in blocks for b in ch), profile, d)


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------

def collision_report(d: int, n: int, m: int = 1, mode: str = "pair",
                     sums: Optional[Sequence[int]] = None, sums2: Optional[Sequence[int]] = None,
                     oracle: bool = False) -> dict:
    """Formula values for both notational readings, optionally with the oracle."""
    report = {"inputs": {"d": d, "n": n, "m": m, "mode": mode}}
    if sums is not None:
        report["inputs"]["sums"] = list(sums)
    if sums2 is not None:
        report["inputs"]["sums2"] = list(sums2)

    if mode == "pair":
        formulas = {r: p_image_two_random(d, n, m, r) for r in READINGS}
        primary = formulas["power"]
    elif mode == "fixed":
        if sums is None:
            raise ValueError("fixed mode needs --sums")
        primary = p_image_fixed_vs_random(sums, d, n)
        formulas = {"closed-form": primary}
    elif mode == "triple":
        if m != 1:
            raise ValueError("triple mode is defined for single blocks (m=1)")
        three = p_block_three_any_pair(d, n)
        primary = three.probability
        formulas = {"inclusion-exclusion": primary}
        report["closed_form_unverified"] = {k: str(v) for k, v in three.closed_form.items()}
    elif mode == "fixed-pair":
        if sums is None or sums2 is None:
            raise ValueError("fixed-pair mode needs --sums and --sums2")
        primary = p_image_three(sums, sums2, d, n)
        formulas = {"closed-form": primary}
        for r in ("shared-denominator", "per-factor"):
            try:
                formulas[f"product-{r}"] = p_image_n([sums, sums2], d, n, count=3, reading=r)
            except ProbabilityOverUnity as exc:
                report.setdefault("errors", {})[r] = str(exc)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    report["formula"] = {k: v.to_dict() for k, v in formulas.items()}
    if oracle:
        truth = brute_force_collision(d, n, m, mode, sums, sums2)
        report["oracle"] = truth.to_dict()
        report["agreement"] = {k: (v.exact == truth.exact) for k, v in formulas.items()}
        report["agree"] = primary.exact == truth.exact
    return report
