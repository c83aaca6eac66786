"""Self-contained golden values for the combinatorics and set-size totals."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .collision import set_size_total
from .combinatorics import psi
from .profiles import FactorProfile

TWO_BLOCK_IMAGE = (
    (25, 175, 163, 254, 51, 58),
    (18, 199, 87, 85, 204, 173),
)

EXPECTED_TOTALS = {
    "sum-only-2": 930,
    "sum-only-3": 183366,
    "sum-range": 642,
    "sum-geomean": 24,
}
EXPECTED_PSI = ((255, 2, 3), 6)  # (d, s, n) -> value
EXPECTED_RANGE_REDUCTION = 0.309
REDUCTION_TOLERANCE = 0.001


@dataclass(frozen=True)
class GoldenRow:
    name: str
    expected: object
    actual: object
    ok: bool

    def line(self) -> str:
        return f"{self.name:<22} expected {str(self.expected):>10}  got {str(self.actual):>10}  " \
               f"{'PASS' if self.ok else 'FAIL'}"


def golden_rows() -> List[GoldenRow]:
    (d, s, n), want = EXPECTED_PSI
    got = psi(d, s, n)
    rows = [GoldenRow(f"psi({d},{s},{n})", want, got, got == want)]
    totals = {}
    for name, want in EXPECTED_TOTALS.items():
        totals[name] = set_size_total(TWO_BLOCK_IMAGE, FactorProfile.from_name(name))
        rows.append(GoldenRow(f"total {name}", want, totals[name], totals[name] == want))
    reduction = 1 - totals["sum-range"] / totals["sum-only-2"]
    rows.append(GoldenRow("range reduction", f"{EXPECTED_RANGE_REDUCTION:.1%}", f"{reduction:.2%}",
                          abs(reduction - EXPECTED_RANGE_REDUCTION) <= REDUCTION_TOLERANCE))
    return rows


def golden_report() -> dict:
    rows = golden_rows()
    return {"rows": [{"name": r.name, "expected": r.expected, "actual": r.actual, "ok": r.ok}
                     for r in rows],
            "pass": all(r.ok for r in rows)}
