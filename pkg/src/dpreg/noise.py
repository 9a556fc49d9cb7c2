"""Seeded randomness, Laplace sampling, and a budget audit ledger.

All mechanism randomness flows through :class:`RandomStream` so that a run is
fully determined by ``(seed, stream_index)``. Laplace draws use the explicit
inverse CDF (one uniform per draw) and normals use Box-Muller, so the draw
sequence is stable across numpy versions; only the underlying uniform bit
stream is delegated to PCG64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LaplaceScale:
    """Validated scale parameter b of a centered Laplace distribution."""

    b: float

    def __post_init__(self):
        if not (self.b > 0) or not math.isfinite(self.b):
            raise ValueError(f"Laplace scale must be positive and finite, got {self.b}")


class RandomStream:
    """Deterministic random source identified by (seed, stream_index).

    Equal (seed, stream_index) pairs replay the same draw sequence;
    distinct stream indices under one seed give statistically independent
    substreams, so each Monte Carlo iteration can own its own stream.
    """

    def __init__(self, seed: int, stream_index: int = 0):
        if seed < 0 or stream_index < 0:
            raise ValueError("seed and stream_index must be non-negative integers")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_index,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.seed}, stream_index={self.stream_index})"

    def uniform(self, size=None):
        """Uniform draws on [0, 1); scalar float when size is None."""
        return self._gen.random(size)

    def laplace(self, scale, size=None):
        """Centered Laplace draws via the inverse CDF, one uniform each.

        ``scale`` may be a float or a :class:`LaplaceScale`.
        """
        b = _scale_value(scale)
        u = self._gen.random(size)
        # F^{-1}(u) = -b * sign(u - 1/2) * ln(1 - 2|u - 1/2|), computed with
        # log1p so values of u near 1/2 lose no precision.
        out = -b * np.sign(u - 0.5) * np.log1p(-2.0 * np.abs(u - 0.5))
        return float(out) if size is None else out

    def normal(self, size=None):
        """Standard normal draws via Box-Muller (two uniforms per draw)."""
        u1 = self._gen.random(size)
        u2 = self._gen.random(size)
        out = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        return float(out) if size is None else out

    def permutation(self, n: int) -> np.ndarray:
        """Uniformly random permutation of range(n)."""
        return self._gen.permutation(n)


class ZeroNoiseStream(RandomStream):
    """Stream whose Laplace draws are exactly zero.

    Used to check that mechanisms reduce to their non-private estimators
    when the noise is switched off; scale validation is kept so misuse
    still surfaces.
    """

    def __init__(self, seed: int = 0, stream_index: int = 0):
        super().__init__(seed, stream_index)

    def laplace(self, scale, size=None):
        _scale_value(scale)
        return 0.0 if size is None else np.zeros(size)


def _scale_value(scale) -> float:
    if isinstance(scale, LaplaceScale):
        return scale.b
    b = float(scale)
    if not (b > 0) or not math.isfinite(b):
        raise ValueError(f"Laplace scale must be positive and finite, got {scale!r}")
    return b


def laplace_sample(stream: RandomStream, scale) -> float:
    """One centered Laplace draw from ``stream`` at the given scale."""
    return float(stream.laplace(scale))


@dataclass(frozen=True)
class NoiseEvent:
    """One privacy-budget expenditure: which release, how much, what noise."""

    label: str
    epsilon: float
    scale: float | None = None


@dataclass
class NoiseLedger:
    """Audit trail of the budget consumed by one mechanism invocation.

    Mechanisms append one event per released query group; the sum of the
    ``epsilon`` fields equals the total budget spent, which the tests audit.
    """

    events: list[NoiseEvent] = field(default_factory=list)

    def record(self, label: str, epsilon: float, scale: float | None = None) -> None:
        self.events.append(NoiseEvent(label, epsilon, scale))

    def total_epsilon(self) -> float:
        return math.fsum(e.epsilon for e in self.events)
