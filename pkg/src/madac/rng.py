"""Seeded random streams.

Every stochastic component draws from an :class:`RngStream`, a thin wrapper
around numpy's PCG64 generator. Sub-streams are derived with
``SeedSequence.spawn`` so children never overlap with their parent or with
each other.
"""

from __future__ import annotations

import logging
import secrets

import numpy as np

logger = logging.getLogger(__name__)

ALGORITHM = "PCG64"


class RngStream:
    """A reproducible random stream with deterministic child spawning."""

    def __init__(self, seed: int | None = None, *, _seq: np.random.SeedSequence | None = None):
        if _seq is None:
            if seed is None:
                seed = secrets.randbits(63)
                logger.info("no seed given, drew seed %d from OS entropy", seed)
            _seq = np.random.SeedSequence(int(seed))
        self._seq = _seq
        self.seed = seed if seed is not None else _seq.entropy
        self.generator = np.random.Generator(np.random.PCG64(_seq))

    @property
    def algorithm(self) -> str:
        return ALGORITHM

    @property
    def spawn_count(self) -> int:
        return self._seq.n_children_spawned

    def spawn(self, n: int = 1) -> list[RngStream]:
        return [RngStream(_seq=child) for child in self._seq.spawn(n)]

    def child(self) -> RngStream:
        return self.spawn(1)[0]

    def integer_seed(self) -> int:
        """Draw a 63-bit seed, for components that take a plain integer."""
        return int(self.generator.integers(0, 2**63 - 1))

    # Convenience pass-throughs used throughout the engine.
    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def choice(self, a, size=None, replace=True):
        return self.generator.choice(a, size=size, replace=replace)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def get_state(self) -> dict:
        return self.generator.bit_generator.state

    def set_state(self, state: dict) -> None:
        self.generator.bit_generator.state = state


def as_stream(seed: int | RngStream | None) -> RngStream:
    if isinstance(seed, RngStream):
        return seed
    return RngStream(seed)
