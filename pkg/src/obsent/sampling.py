"""Deterministic phase sampling shared by the sweep and quench drivers.

The random phases for a given (seed, L, delta) come from a dedicated
``numpy`` substream keyed on the values themselves (the bit pattern of
delta, not its position in any sweep grid), so rearranging or splitting a
parameter grid can never change the realizations of an individual grid
point, and parallel workers need no shared RNG state.
"""

from __future__ import annotations

import math

import numpy as np


def phase_stream(seed: int, L: int, delta: float) -> np.random.Generator:
    """Generator seeded by (seed, L, bit pattern of delta)."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    delta_bits = int(np.float64(delta).view(np.uint64))
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(L), delta_bits]))


def phase_sequence(seed: int, L: int, delta: float, n_phi: int) -> np.ndarray:
    """First n_phi potential phases, uniform on [0, 2*pi)."""
    if n_phi < 1:
        raise ValueError(f"n_phi must be >= 1, got {n_phi}")
    return phase_stream(seed, L, delta).uniform(0.0, 2.0 * math.pi, n_phi)
