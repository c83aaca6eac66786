"""Factor profiles: which per-group invariants the substitution step keeps."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import ArityMismatch


class Factor(enum.Enum):
    SUM_ONLY = "sum-only"
    SUM_GEOMEAN = "sum-geomean"
    SUM_RANGE = "sum-range"
    SUM_WEIGHTED = "sum-weighted"


# Envelope profile ids. Sum-only carries its arity in the id.
_PROFILE_IDS = {
    (Factor.SUM_ONLY, 2): 1,
    (Factor.SUM_ONLY, 3): 2,
    (Factor.SUM_GEOMEAN, 3): 3,
    (Factor.SUM_RANGE, 2): 4,
    (Factor.SUM_WEIGHTED, 3): 5,
}
_IDS_TO_PROFILE = {v: k for k, v in _PROFILE_IDS.items()}

MAX_WEIGHT = 8


@dataclass(frozen=True)
class FactorProfile:
    """A substitution profile.

    ``weights`` is only meaningful for ``SUM_WEIGHTED``; ``None`` there means
    "derive from the key and nonce at encryption time".
    """

    factor: Factor
    n: int
    weights: Optional[Tuple[int, int, int]] = None

    def __post_init__(self):
        if (self.factor, self.n) not in _PROFILE_IDS:
            raise ArityMismatch(f"{self.factor.value} does not support group size {self.n}")
        if self.weights is not None:
            if self.factor is not Factor.SUM_WEIGHTED:
                raise ValueError("weights only apply to the sum-weighted profile")
            w = tuple(int(x) for x in self.weights)
            if len(w) != 3 or any(not 1 <= x <= 255 for x in w):
                raise ValueError(f"weights must be three integers in [1, 255], got {self.weights!r}")
            object.__setattr__(self, "weights", w)

    @classmethod
    def sum_only(cls, n: int = 2) -> "FactorProfile":
        return cls(Factor.SUM_ONLY, n)

    @classmethod
    def sum_geomean(cls) -> "FactorProfile":
        return cls(Factor.SUM_GEOMEAN, 3)

    @classmethod
    def sum_range(cls) -> "FactorProfile":
        return cls(Factor.SUM_RANGE, 2)

    @classmethod
    def sum_weighted(cls, weights: Optional[Tuple[int, int, int]] = None) -> "FactorProfile":
        return cls(Factor.SUM_WEIGHTED, 3, weights)

    @property
    def profile_id(self) -> int:
        return _PROFILE_IDS[(self.factor, self.n)]

    @classmethod
    def from_id(cls, profile_id: int, weights=None) -> "FactorProfile":
        try:
            factor, n = _IDS_TO_PROFILE[profile_id]
        except KeyError:
            raise ValueError(f"unknown profile id {profile_id}") from None
        return cls(factor, n, tuple(weights) if weights else None)

    @property
    def name(self) -> str:
        if self.factor is Factor.SUM_ONLY:
            return f"sum-only-{self.n}"
        return self.factor.value

    @classmethod
    def from_name(cls, name: str, weights=None) -> "FactorProfile":
        name = name.strip().lower()
        if name in ("sum-only", "sum-only-2"):
            return cls.sum_only(2)
        if name == "sum-only-3":
            return cls.sum_only(3)
        if name == "sum-geomean":
            return cls.sum_geomean()
        if name == "sum-range":
            return cls.sum_range()
        if name == "sum-weighted":
            return cls.sum_weighted(tuple(weights) if weights else None)
        raise ValueError(f"unknown profile {name!r}")

    def with_weights(self, weights) -> "FactorProfile":
        return FactorProfile(self.factor, self.n, tuple(weights))


PROFILE_NAMES = ("sum-only-2", "sum-only-3", "sum-geomean", "sum-range", "sum-weighted")
