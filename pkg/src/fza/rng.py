"""Seeded substreams for the randomized solvers.

A substream is addressed by the master seed plus a tuple of labels (class
index, offset, fragment id, ...). Identical addresses reproduce identical
draw sequences regardless of evaluation order, so candidate generation can be
reshuffled or parallelized without changing results.
"""

from __future__ import annotations

import hashlib
import random


def substream(seed: int, *labels) -> random.Random:
    """Independent RNG derived from (seed, labels) via SHA-256."""
    material = repr((int(seed), labels)).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))
