"""Deterministic seed derivation.

All randomness in the package flows through numpy's Philox generator, which is
counter based and therefore reproducible across platforms and numpy versions.
Derived streams are keyed by integer tuples through SeedSequence, so instance
``i`` of an ensemble gets the same draws no matter how work is scheduled.
"""

from __future__ import annotations

import numpy as np


def derive_seed(*keys: int) -> int:
    """Collapse an integer key path into a single 64-bit seed."""
    ss = np.random.SeedSequence(list(keys))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(keys))))
