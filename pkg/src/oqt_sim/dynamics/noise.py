"""Seeded Wiener increment streams, one per trajectory."""

from __future__ import annotations

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from oqt_sim.errors import ContractViolation


class WienerSource:
    """Independent standard Wiener increments for one trajectory.

    The stream is a flat sequence of standard normals keyed by
    ``(seed, stream_id)``; every draw consumes it in order, so the values a
    trajectory sees do not depend on how its draws are blocked. Within one
    step the channels are laid out as the caller documents them.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ContractViolation("seed and stream_id must be non-negative integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._rng = Generator(PCG64(SeedSequence(self.seed, spawn_key=(self.stream_id,))))
        self.draws = 0

    def block(self, n_steps: int, n_channels: int, dt: float) -> np.ndarray:
        """Increments for ``n_steps`` consecutive steps, shape ``(n_steps, n_channels)``."""
        if n_channels == 0 or n_steps == 0:
            return np.zeros((n_steps, n_channels), dtype=np.float64)
        self.draws += n_steps * n_channels
        return self._rng.standard_normal((n_steps, n_channels)) * np.sqrt(dt)

    def increments(self, n_channels: int, dt: float) -> np.ndarray:
        """Increments for a single step."""
        return self.block(1, n_channels, dt)[0]

    def __repr__(self) -> str:
        return f"WienerSource(seed={self.seed}, stream_id={self.stream_id}, draws={self.draws})"
