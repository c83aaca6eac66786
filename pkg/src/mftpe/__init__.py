"""Multi-factor thumbnail-preserving image encryption."""
from .collision import (
    Probability,
    brute_force_collision,
    image_set_size_total,
    p_block_fixed_vs_random,
    p_block_three_any_pair,
    p_block_two_random,
    p_image_fixed_vs_random,
    p_image_n,
    p_image_three,
    p_image_two_random,
    set_size_total,
)
from .combinatorics import psi
from .engine import CipherParams, Envelope, decrypt, decrypt_bytes, encrypt, encrypt_bytes
from .errors import MFTPEError
from .image import Image, extended_thumbnail, read_png, sample_image, thumbnail, write_png
from .profiles import Factor, FactorProfile

__all__ = [
    "CipherParams", "Envelope", "Factor", "FactorProfile", "Image", "MFTPEError", "Probability",
    "brute_force_collision", "decrypt", "decrypt_bytes", "encrypt", "encrypt_bytes",
    "extended_thumbnail", "image_set_size_total", "p_block_fixed_vs_random", "p_block_three_any_pair",
    "p_block_two_random", "p_image_fixed_vs_random", "p_image_n", "p_image_three",
    "p_image_two_random", "psi", "read_png", "sample_image", "set_size_total", "thumbnail", "write_png",
]
__version__ = "0.1.0"
