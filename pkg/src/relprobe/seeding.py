"""Deterministic per-task seed derivation.

Every generation or training task derives its RNG seed from the study's
master seed and a stable string key, so parallel scheduling order can
never change any output.
"""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, *key_parts) -> int:
    key = "\x1f".join([str(int(master_seed))] + [str(p) for p in key_parts])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
