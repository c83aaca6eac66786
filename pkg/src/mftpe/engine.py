"""Multi-round partition -> substitute -> permute cipher and its envelope format."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from typing import Callable, List

import numpy as np

from .batch import substitute_batch
from .errors import BlockTooSmall, EmptyImage, MalformedEnvelope, ParamMismatch, UnsupportedImage
from .image import Image, _check_block_size, decode_png, encode_png, from_blocks, to_blocks
from .keystream import KEY_BYTES, NONCE_BYTES, Keystream
from .profiles import Factor, FactorProfile, MAX_WEIGHT

D = 255
MAGIC = b"MFTP"
VERSION = 1
_HEADER = struct.Struct("<4sBBHH16sB")

DEFAULT_BLOCK_SIZE = 16
DEFAULT_ROUNDS = 3


@dataclass(frozen=True)
class CipherParams:
    key: bytes = field(repr=False)
    nonce: bytes
    profile: FactorProfile = field(default_factory=FactorProfile.sum_range)
    block_size: int = DEFAULT_BLOCK_SIZE
    rounds: int = DEFAULT_ROUNDS

    def __post_init__(self):
        if len(self.key) != KEY_BYTES:
            raise ValueError(f"key must be {KEY_BYTES} bytes")
        if len(self.nonce) != NONCE_BYTES:
            raise ValueError(f"nonce must be {NONCE_BYTES} bytes")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.block_size < 2:
            raise BlockTooSmall(f"block size must be >= 2, got {self.block_size}")
        if self.block_size > 0xFFFF or self.rounds > 0xFFFF:
            raise ValueError("block size and rounds must fit in 16 bits")


def resolve_profile(profile: FactorProfile, keystream: Keystream) -> FactorProfile:
    """Fill in key/nonce-derived weights for sum-weighted profiles."""
    if profile.factor is Factor.SUM_WEIGHTED and profile.weights is None:
        return profile.with_weights(keystream.weights(MAX_WEIGHT))
    return profile


# --------------------------------------------------------------------------
# Keyed Fisher-Yates
# --------------------------------------------------------------------------

_TWO32 = 1 << 32


def fisher_yates_draws(next_word: Callable[[], int], n: int) -> List[int]:
    """Swap targets j_i for i = n-1 .. 1, each uniform on [0, i] by rejection."""
    draws = []
    for i in range(n - 1, 0, -1):
        bound = i + 1
        limit = _TWO32 - _TWO32 % bound
        while True:
            w = next_word()
            if w < limit:
                draws.append(w % bound)
                break
    return draws


def apply_fisher_yates(values, draws) -> list:
    out = list(values)
    n = len(out)
    for t, j in enumerate(draws):
        i = n - 1 - t
        out[i], out[j] = out[j], out[i]
    return out


def _scalar_draws(ks: Keystream, round_index: int, channel: int, block: int, n: int) -> List[int]:
    buf: List[int] = []
    pos = [0]

    def next_word():
        if pos[0] == len(buf):
            buf.extend(ks.words(round_index, [channel], [block], len(buf), 64)[0].tolist())
        w = buf[pos[0]]
        pos[0] += 1
        return w

    return fisher_yates_draws(next_word, n)


def permutation_indices(ks: Keystream, round_index: int, channels, blocks, n: int) -> np.ndarray:
    """Fisher-Yates source indices for each (channel, block): ``out = x[perm]``."""
    channels = np.asarray(channels, dtype=np.int64)
    blocks = np.asarray(blocks, dtype=np.int64)
    k = len(blocks)
    perm = np.tile(np.arange(n, dtype=np.int64), (k, 1))
    if n < 2:
        return perm
    words = ks.words(round_index, channels, blocks, 0, n - 1).astype(np.int64)
    bounds = n - np.arange(n - 1, dtype=np.int64)
    limits = _TWO32 - _TWO32 % bounds
    draws = words % bounds
    rejected = np.nonzero((words >= limits).any(axis=1))[0]
    for row in rejected:  # rare: redo the affected stream sequentially
        draws[row] = _scalar_draws(ks, round_index, int(channels[row]), int(blocks[row]), n)
    # swap on the flattened array; columns of flat_i/flat_j index step t
    offsets = np.arange(k, dtype=np.int64)[:, None] * n
    flat_j = np.ascontiguousarray((draws + offsets).T)
    flat_i = np.ascontiguousarray((np.arange(n - 1, 0, -1)[None, :] + offsets).T)
    flat = perm.reshape(-1)
    for ii, jj in zip(flat_i, flat_j):
        a = flat[ii]
        flat[ii] = flat[jj]
        flat[jj] = a
    return perm


def permute_block(block, ks: Keystream, round_index: int, channel: int, index: int) -> np.ndarray:
    """Keyed Fisher-Yates shuffle of one block (any shape, row-major order)."""
    arr = np.asarray(block)
    flat = arr.reshape(-1)
    perm = permutation_indices(ks, round_index, [channel], [index], flat.size)[0]
    return flat[perm].reshape(arr.shape)


def inverse_permute_block(block, ks: Keystream, round_index: int, channel: int, index: int) -> np.ndarray:
    arr = np.asarray(block)
    flat = arr.reshape(-1)
    perm = permutation_indices(ks, round_index, [channel], [index], flat.size)[0]
    out = np.empty_like(flat)
    out[perm] = flat
    return out.reshape(arr.shape)


# --------------------------------------------------------------------------
# Rounds
# --------------------------------------------------------------------------

def _substitute(x: np.ndarray, ks: Keystream, profile: FactorProfile, round_index: int,
                inverse: bool, d: int) -> None:
    C, nb, N = x.shape
    n = profile.n
    g = N // n
    if g == 0:
        return
    body = x[:, :, : g * n]
    groups = body.reshape(-1, n)
    keys = ks.subkeys(round_index, C, nb, g).reshape(-1, 2)
    lo = hi = None
    if profile.factor is Factor.SUM_RANGE:
        lo = np.repeat(x.min(axis=2).ravel(), g)
        hi = np.repeat(x.max(axis=2).ravel(), g)
    out = substitute_batch(groups, profile, keys, lo, hi, d=d, inverse=inverse)
    x[:, :, : g * n] = out.reshape(C, nb, g * n)


def _block_ids(C: int, nb: int):
    return np.repeat(np.arange(C), nb), np.tile(np.arange(nb), C)


def encrypt_round(blocks: np.ndarray, ks: Keystream, profile: FactorProfile,
                  round_index: int, d: int = D) -> np.ndarray:
    """One substitution + permutation pass over a ``(C, nb, N)`` block array."""
    x = np.array(blocks, dtype=np.int64)
    C, nb, N = x.shape
    _substitute(x, ks, profile, round_index, False, d)
    ch, bl = _block_ids(C, nb)
    perm = permutation_indices(ks, round_index, ch, bl, N)
    return np.take_along_axis(x.reshape(C * nb, N), perm, axis=1).reshape(C, nb, N)


def decrypt_round(blocks: np.ndarray, ks: Keystream, profile: FactorProfile,
                  round_index: int, d: int = D) -> np.ndarray:
    """Inverse of :func:`encrypt_round`: un-permute, then un-substitute."""
    x = np.asarray(blocks, dtype=np.int64)
    C, nb, N = x.shape
    ch, bl = _block_ids(C, nb)
    perm = permutation_indices(ks, round_index, ch, bl, N)
    y = np.empty((C * nb, N), dtype=np.int64)
    np.put_along_axis(y, perm, x.reshape(C * nb, N), axis=1)
    y = y.reshape(C, nb, N)
    _substitute(y, ks, profile, round_index, True, d)
    return y


# --------------------------------------------------------------------------
# Envelope
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Envelope:
    """Ciphertext image plus the public parameters needed to decrypt it."""

    profile: FactorProfile
    block_size: int
    rounds: int
    nonce: bytes
    image: Image

    @property
    def weights(self) -> tuple:
        return self.profile.weights or ()

    def to_bytes(self) -> bytes:
        w = self.weights
        head = _HEADER.pack(MAGIC, VERSION, self.profile.profile_id, self.block_size,
                            self.rounds, self.nonce, len(w))
        return head + bytes(w) + encode_png(self.image)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Envelope":
        if len(data) < _HEADER.size:
            raise MalformedEnvelope("truncated header")
        magic, version, pid, B, R, nonce, wcount = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise MalformedEnvelope(f"bad magic {magic!r}")
        if version != VERSION:
            raise MalformedEnvelope(f"unsupported version {version}")
        off = _HEADER.size
        weights = tuple(data[off:off + wcount])
        if len(weights) != wcount:
            raise MalformedEnvelope("truncated weights")
        try:
            profile = FactorProfile.from_id(pid, weights or None)
        except ValueError as exc:
            raise MalformedEnvelope(str(exc)) from exc
        if profile.factor is Factor.SUM_WEIGHTED and wcount != 3:
            raise MalformedEnvelope("sum-weighted envelope must carry three weights")
        if profile.factor is not Factor.SUM_WEIGHTED and wcount:
            raise MalformedEnvelope("weights present for a profile that has none")
        if B < 2 or R < 1:
            raise MalformedEnvelope(f"invalid block size {B} or rounds {R}")
        try:
            image = decode_png(data[off + wcount:])
        except UnsupportedImage as exc:
            raise MalformedEnvelope(str(exc)) from exc
        if image.width % B or image.height % B:
            raise ParamMismatch(
                f"declared block size {B} does not divide payload {image.width}x{image.height}")
        return cls(profile, B, R, nonce, image)

    def with_image(self, image: Image) -> "Envelope":
        return replace(self, image=image)


def encrypt(image: Image, params: CipherParams, d: int = D) -> Envelope:
    if image.width == 0 or image.height == 0:
        raise EmptyImage("image has no pixels")
    _check_block_size(image, params.block_size)
    ks = Keystream(params.key, params.nonce)
    profile = resolve_profile(params.profile, ks)
    B = params.block_size
    x = to_blocks(image.pixels, B).astype(np.int64)
    for r in range(1, params.rounds + 1):
        x = encrypt_round(x, ks, profile, r, d)
    cipher = Image(from_blocks(x.astype(np.uint8), B, image.width, image.height))
    return Envelope(profile, B, params.rounds, bytes(params.nonce), cipher)


def decrypt(envelope: Envelope, key: bytes, d: int = D) -> Image:
    img = envelope.image
    B = envelope.block_size
    if img.width % B or img.height % B:
        raise ParamMismatch(f"block size {B} does not divide {img.width}x{img.height}")
    if envelope.profile.factor is Factor.SUM_WEIGHTED and envelope.profile.weights is None:
        raise MalformedEnvelope("sum-weighted envelope without weights")
    ks = Keystream(key, envelope.nonce)
    x = to_blocks(img.pixels, B).astype(np.int64)
    for r in range(envelope.rounds, 0, -1):
        x = decrypt_round(x, ks, envelope.profile, r, d)
    return Image(from_blocks(x.astype(np.uint8), B, img.width, img.height))


def encrypt_bytes(image: Image, params: CipherParams) -> bytes:
    return encrypt(image, params).to_bytes()


def decrypt_bytes(data: bytes, key: bytes) -> Image:
    return decrypt(Envelope.from_bytes(data), key)
