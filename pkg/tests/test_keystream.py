import hashlib
import hmac
import struct

import numpy as np
import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from mftpe.keystream import (
    LABEL,
    PURPOSE_PERM,
    PURPOSE_SUB,
    PURPOSE_WEIGHTS,
    Keystream,
    counter_blocks,
    derive_nonce_key,
)

KAT_NONCE_KEY = "36e05d1eb0c32057282fe97d562b10df5c3bc3fe6b32c295c8c7896ca5e5f5f5"
KAT_BLOCK = "6a3cf9e47a91f4d2f7f947582b98ef30"  # round 1, channel 2, SUB, block 7, counter 5
KAT_TEST_SEED_0 = "274a47265754032162a4bcb236417d32"


def reference_block(key, nonce, round_index, channel, purpose, block, counter):
    kn = hmac.new(key, LABEL + nonce, hashlib.sha256).digest()
    ctx = struct.pack(">IBBHII", round_index, channel, purpose, 0, block, counter)
    enc = Cipher(algorithms.AES(kn), modes.ECB()).encryptor()
    return enc.update(ctx) + enc.finalize()


class TestKnownAnswers:
    def test_aes256_fips197(self):
        key = bytes(range(32))
        pt = bytes.fromhex("00112233445566778899aabbccddeeff")
        enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
        assert (enc.update(pt) + enc.finalize()).hex() == "8ea2b7ca516745bfeafc49904b496089"

    def test_nonce_key(self, key, nonce):
        assert derive_nonce_key(key, nonce).hex() == KAT_NONCE_KEY

    def test_block(self, key, nonce):
        out = Keystream(key, nonce).raw(1, 2, PURPOSE_SUB, 7, 5)
        assert out.shape == (1, 16)
        assert out[0].tobytes().hex() == KAT_BLOCK
        assert reference_block(key, nonce, 1, 2, PURPOSE_SUB, 7, 5).hex() == KAT_BLOCK

    def test_test_mode(self):
        a = Keystream.for_testing(0).raw(0, 0, 0, 0, 0)[0].tobytes().hex()
        assert a == KAT_TEST_SEED_0
        assert Keystream.for_testing(1).raw(0, 0, 0, 0, 0)[0].tobytes().hex() != a

    def test_weights(self, key, nonce):
        assert Keystream(key, nonce).weights() == (4, 3, 6)


class TestLayout:
    def test_counter_blocks(self):
        ctx = counter_blocks(0x01020304, 5, 6, 0x0A0B0C0D, 0x11121314)
        assert ctx[0].tobytes() == bytes.fromhex("01020304" "05" "06" "0000" "0a0b0c0d" "11121314")

    def test_broadcast(self):
        ctx = counter_blocks(1, np.arange(3)[:, None], 2, 0, np.arange(4)[None, :])
        assert ctx.shape == (12, 16)
        assert len({row.tobytes() for row in ctx}) == 12

    @pytest.mark.parametrize("bad_key, bad_nonce", [(bytes(31), bytes(16)), (bytes(32), bytes(15))])
    def test_lengths(self, bad_key, bad_nonce):
        with pytest.raises(ValueError):
            derive_nonce_key(bad_key, bad_nonce)


class TestStreams:
    def test_subkeys_match_reference(self, key, nonce):
        ks = Keystream(key, nonce)
        sub = ks.subkeys(2, 3, 4, 5)
        assert sub.shape == (3, 4, 5, 2) and sub.dtype == np.uint64
        raw = reference_block(key, nonce, 2, 1, PURPOSE_SUB, 3, 4)
        lo, hi = struct.unpack("<QQ", raw)
        assert sub[1, 3, 4].tolist() == [lo, hi]

    def test_subkeys_index_addressed(self, key, nonce):
        ks = Keystream(key, nonce)
        small, big = ks.subkeys(1, 1, 2, 3), ks.subkeys(1, 3, 10, 7)
        assert np.array_equal(small, big[:1, :2, :3])

    def test_words_slices_agree(self, key, nonce):
        ks = Keystream(key, nonce)
        full = ks.words(1, [0, 2], [5, 9], 0, 40)
        part = ks.words(1, [0, 2], [5, 9], 13, 11)
        assert np.array_equal(part, full[:, 13:24])
        raw = reference_block(key, nonce, 1, 2, PURPOSE_PERM, 9, 3)
        assert full[1, 12:16].tolist() == list(struct.unpack("<4I", raw))

    def test_purposes_are_separated(self, key, nonce):
        ks = Keystream(key, nonce)
        outs = {ks.raw(1, 0, p, 0, 0)[0].tobytes() for p in (PURPOSE_SUB, PURPOSE_PERM, PURPOSE_WEIGHTS)}
        assert len(outs) == 3

    def test_nonce_changes_everything(self, key, nonce):
        other = bytes(16)
        assert not np.array_equal(Keystream(key, nonce).subkeys(1, 1, 1, 8),
                                  Keystream(key, other).subkeys(1, 1, 1, 8))

    def test_weights_range(self):
        for seed in range(50):
            w = Keystream.for_testing(seed).weights()
            assert len(w) == 3 and all(1 <= x <= 8 for x in w)
        with pytest.raises(ValueError):
            Keystream.for_testing(0).weights(7)
