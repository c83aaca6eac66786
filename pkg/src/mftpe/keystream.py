"""Keyed pseudorandom stream with explicit domain separation.

Construction: ``k_n = HMAC-SHA256(key, LABEL || nonce)`` and each 16-byte
output block is ``AES-256_{k_n}(ctx)`` where ``ctx`` packs, big-endian,

    round (u32) | channel (u8) | purpose (u8) | 0x0000 | block (u32) | counter (u32)

so every (round, channel, purpose, block, counter) tuple maps to a distinct
PRF input. Outputs are position-addressed; nothing depends on the order in
which blocks are processed.
"""
from __future__ import annotations

import hashlib
import hmac

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

LABEL = b"MFTPE-v1/keystream"
KEY_BYTES = 32
NONCE_BYTES = 16

PURPOSE_SUB = 1
PURPOSE_PERM = 2
PURPOSE_WEIGHTS = 3


def derive_nonce_key(key: bytes, nonce: bytes) -> bytes:
    if len(key) != KEY_BYTES:
        raise ValueError(f"key must be {KEY_BYTES} bytes, got {len(key)}")
    if len(nonce) != NONCE_BYTES:
        raise ValueError(f"nonce must be {NONCE_BYTES} bytes, got {len(nonce)}")
    return hmac.new(key, LABEL + nonce, hashlib.sha256).digest()


def counter_blocks(round_index, channel, purpose, block, counter) -> np.ndarray:
    """Pack broadcastable index arrays into ``(k, 16)`` uint8 PRF inputs."""
    r, c, p, b, n = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.uint64) for v in (round_index, channel, purpose, block, counter)))
    out = np.zeros(r.shape + (16,), dtype=np.uint8)
    out[..., 0:4] = r.astype(">u4")[..., None].view(np.uint8)
    out[..., 4] = c
    out[..., 5] = p
    out[..., 8:12] = b.astype(">u4")[..., None].view(np.uint8)
    out[..., 12:16] = n.astype(">u4")[..., None].view(np.uint8)
    return out.reshape(-1, 16)


class Keystream:
    """PRF over (round, channel, purpose, block, counter) for one key/nonce."""

    def __init__(self, key: bytes, nonce: bytes):
        self.nonce = bytes(nonce)
        self._cipher = Cipher(algorithms.AES(derive_nonce_key(bytes(key), self.nonce)), modes.ECB())

    @classmethod
    def for_testing(cls, seed: int) -> "Keystream":
        """Deterministic stream from an integer seed (known-answer tests only)."""
        material = hashlib.sha256(b"MFTPE-test-seed" + int(seed).to_bytes(8, "big")).digest()
        return cls(material, hashlib.sha256(material).digest()[:NONCE_BYTES])

    def raw(self, round_index, channel, purpose, block, counter) -> np.ndarray:
        """PRF output blocks as a ``(k, 16)`` uint8 array."""
        ctx = counter_blocks(round_index, channel, purpose, block, counter)
        enc = self._cipher.encryptor()
        out = enc.update(ctx.tobytes()) + enc.finalize()
        return np.frombuffer(out, dtype=np.uint8).reshape(-1, 16)

    def subkeys(self, round_index: int, channels: int, blocks: int, groups: int) -> np.ndarray:
        """128-bit subkeys for every (channel, block, group) as ``(C, nb, g, 2)`` uint64."""
        c = np.arange(channels)[:, None, None]
        b = np.arange(blocks)[None, :, None]
        g = np.arange(groups)[None, None, :]
        raw = self.raw(round_index, c, PURPOSE_SUB, b, g)
        return raw.view("<u8").reshape(channels, blocks, groups, 2)

    def words(self, round_index: int, channel, block, start: int, count: int) -> np.ndarray:
        """32-bit little-endian words ``start .. start+count-1`` of each (channel, block) stream.

        ``channel`` and ``block`` are equal-length 1-D arrays; the result has
        shape ``(len(block), count)``.
        """
        channel = np.asarray(channel, dtype=np.uint64)[:, None]
        block = np.asarray(block, dtype=np.uint64)[:, None]
        first, last = start // 4, (start + count - 1) // 4
        ctr = np.arange(first, last + 1, dtype=np.uint64)[None, :]
        raw = self.raw(round_index, channel, PURPOSE_PERM, block, ctr)
        w = raw.view("<u4").reshape(len(block), -1)
        skip = start - 4 * first
        return w[:, skip:skip + count]

    def weights(self, max_weight: int = 8) -> tuple:
        """Three public weights in [1, max_weight]; max_weight must divide 256."""
        if 256 % max_weight:
            raise ValueError("max_weight must divide 256")
        raw = self.raw(0, 0, PURPOSE_WEIGHTS, 0, 0)[0]
        return tuple(int(v) % max_weight + 1 for v in raw[:3])
