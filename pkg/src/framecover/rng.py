"""Splittable, counter-based random streams.

Every random draw in the package flows from a single 64-bit seed through
Philox streams keyed by (seed, label path).  Same seed and labels, same
bits, on every platform and in any execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream"]

_MASK64 = (1 << 64) - 1


def _label_hash(labels: tuple[str, ...]) -> int:
    digest = hashlib.sha256("/".join(labels).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, *labels: str) -> np.random.Generator:
    """Independent generator for the given seed and label path.

    Labels name the consumer ("sphere", "cover", ...) so that adding a new
    draw site never perturbs the streams of existing ones.
    """
    key = np.array([seed & _MASK64, _label_hash(labels)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
