"""Deterministic seed derivation.

Every run, depth candidate and boosting iteration gets its own random
stream derived from a single master seed, so adding runs or enlarging the
ensemble never reshuffles randomness that was already consumed elsewhere.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, index: int) -> int:
    """Derive a child seed from (seed, index) with the splitmix64 mixer.

    Statistically independent for distinct (seed, index) pairs, and cheap
    enough to call once per run/depth candidate.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """Independent generator for one boosting iteration of one run."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(iteration,)))
