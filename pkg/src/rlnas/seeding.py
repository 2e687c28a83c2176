"""Stable seed derivation from structured keys."""

from __future__ import annotations

import hashlib


def derive_seed(*parts):
    """64-bit seed from the repr of ``parts`` (stable across processes and runs)."""
    key = "|".join(repr(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def derive_uniform(*parts):
    """Deterministic float in [0, 1) keyed by ``parts``."""
    return derive_seed(*parts) / 2.0 ** 64
