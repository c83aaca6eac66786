"""Statistical and robustness measurements on plaintext/ciphertext images."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import DegenerateVariance, DimensionMismatch
from .image import Image, encode_png

DIRECTIONS = {"horizontal": (0, 1), "vertical": (1, 0), "diagonal": (1, 1)}
DEFAULT_PAIRS = 5000
DEFAULT_SEED = 2024


def histogram(image: Image) -> np.ndarray:
    """Per-channel 256-bin counts, shape ``(C, 256)``."""
    px = image.pixels
    return np.stack([np.bincount(px[:, :, c].ravel(), minlength=256) for c in range(image.channels)])


def write_histogram_csv(image: Image, path) -> None:
    hist = histogram(image)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value"] + [f"channel{c}" for c in range(len(hist))])
        for v in range(256):
            writer.writerow([v] + [int(h[v]) for h in hist])


def correlation(image: Image, direction: str = "horizontal", pairs: int = DEFAULT_PAIRS,
                seed: int = DEFAULT_SEED) -> float:
    """Pearson r over uniformly sampled adjacent pixel pairs (all channels pooled)."""
    if pairs < 100:
        raise ValueError("need at least 100 pairs")
    dy, dx = DIRECTIONS[direction]
    H, W, C = image.shape
    if H <= dy or W <= dx:
        raise DimensionMismatch("image too small for the requested direction")
    rng = np.random.default_rng(seed)
    y = rng.integers(0, H - dy, pairs)
    x = rng.integers(0, W - dx, pairs)
    c = rng.integers(0, C, pairs)
    px = image.pixels
    u = px[y, x, c].astype(np.float64)
    v = px[y + dy, x + dx, c].astype(np.float64)
    if u.std() == 0 or v.std() == 0:
        raise DegenerateVariance("correlation undefined for constant samples")
    r = float(np.corrcoef(u, v)[0, 1])
    return max(-1.0, min(1.0, r))


@dataclass
class CorrelationReport:
    coefficients: Dict[str, Optional[float]]
    pairs: int
    seed: int

    def to_dict(self):
        return asdict(self)


def correlation_report(image: Image, pairs: int = DEFAULT_PAIRS, seed: int = DEFAULT_SEED) -> CorrelationReport:
    coeffs = {}
    for name in DIRECTIONS:
        try:
            coeffs[name] = correlation(image, name, pairs, seed)
        except DegenerateVariance:
            coeffs[name] = None
    return CorrelationReport(coeffs, pairs, seed)


# --------------------------------------------------------------------------
# Noise
# --------------------------------------------------------------------------

NOISE_KINDS = ("gaussian", "salt-pepper", "multiplicative")


@dataclass(frozen=True)
class NoiseSpec:
    """``amount`` is sigma (gaussian), density (salt-pepper) or variance (multiplicative)."""

    kind: str
    amount: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.amount < 0:
            raise ValueError("noise amount must be non-negative")
        if self.kind == "salt-pepper" and self.amount > 1:
            raise ValueError("salt-and-pepper density must lie in [0, 1]")


def add_noise(image: Image, spec: NoiseSpec) -> Image:
    rng = np.random.default_rng(spec.seed)
    px = image.pixels.astype(np.float64)
    if spec.kind == "gaussian":
        out = px + rng.normal(0.0, spec.amount, px.shape) if spec.amount else px
    elif spec.kind == "salt-pepper":
        hit = rng.random(px.shape) < spec.amount
        salt = rng.random(px.shape) < 0.5
        out = np.where(hit, np.where(salt, 255.0, 0.0), px)
    else:
        # zero-mean uniform u with Var(u) = amount: u ~ U[-a, a], a = sqrt(3 * amount)
        half = math.sqrt(3.0 * spec.amount)
        out = px * (1.0 + rng.uniform(-half, half, px.shape)) if spec.amount else px
    return Image(np.clip(np.rint(out), 0, 255).astype(np.uint8))


# --------------------------------------------------------------------------
# Quality / storage / timing
# --------------------------------------------------------------------------

def psnr(a: Image, b: Image) -> float:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def storage_expansion(plain: Image, cipher: Image) -> float:
    """PNG size of the ciphertext over PNG size of the plaintext (same settings)."""
    return len(encode_png(cipher)) / len(encode_png(plain))


@dataclass
class TimingStats:
    mean_ms: float
    max_ms: float
    min_ms: float
    runs: int
    samples_ms: list = field(default_factory=list)


def time_call(fn, runs: int = 3) -> TimingStats:
    samples = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1000.0)
    return TimingStats(sum(samples) / runs, max(samples), min(samples), runs, samples)
