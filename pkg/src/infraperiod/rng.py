"""Counter-based random streams keyed by (seed, tag, trial index)."""

from __future__ import annotations

import hashlib

import numpy as np


def _tag_word(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "little")


def make_rng(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for one (seed, module tag, trial) triple.

    Streams do not depend on the order in which other streams were drawn, so parallel or
    reordered runs reproduce the same values.
    """
    ss = np.random.SeedSequence([int(seed) & (2**63 - 1), _tag_word(tag), int(index)])
    return np.random.Generator(np.random.Philox(ss))
