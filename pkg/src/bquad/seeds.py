"""Per-purpose seed derivation.

Experiments share one top-level seed but consume randomness for several
unrelated purposes (initial designs, test-function coefficients, random
samplers, ML restarts).  To keep every purpose on an independent,
reproducible stream we derive a substream as

    rng_for(seed, tag) = default_rng(SeedSequence([seed, crc32(tag)]))

so that adding a consumer never perturbs the draws of the others.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, tag: str, index: int | None = None) -> np.random.SeedSequence:
    key = [int(seed), zlib.crc32(tag.encode("utf-8"))]
    if index is not None:
        key.append(int(index))
    return np.random.SeedSequence(key)


def rng_for(seed: int, tag: str, index: int | None = None) -> np.random.Generator:
    """Independent generator for (seed, purpose-tag[, index])."""
    return np.random.default_rng(substream(seed, tag, index))
