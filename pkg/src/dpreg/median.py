"""Exponential-mechanism private median over a clipped range.

The mechanism clips the values to [clip_lo, clip_hi], splits that range into
the intervals between consecutive sorted values (range endpoints included as
sentinels), scores each interval by how balanced the counts on either side of
it are, and samples an interval with probability proportional to
``length * exp(epsilon * utility / 2)``, then a uniform point inside it.
The rank utility has add/remove sensitivity 1, so the release is epsilon-DP.
"""

from __future__ import annotations

import warnings

import numpy as np

from .noise import RandomStream


class DegenerateInputWarning(UserWarning):
    """Emitted when a mechanism answers degenerate input with a fallback."""


def _check_args(epsilon: float, clip_lo: float, clip_hi: float) -> None:
    if not (epsilon > 0):
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not (clip_lo < clip_hi):
        raise ValueError(f"clip range must satisfy clip_lo < clip_hi, got [{clip_lo}, {clip_hi}]")


def median_interval_probs(values, epsilon: float, clip_lo: float, clip_hi: float):
    """Interval edges and selection probabilities of the median mechanism.

    Returns ``(edges, probs)`` where ``edges`` has m + 2 entries (clip_lo,
    the m clipped sorted values, clip_hi) and ``probs[i]`` is the probability
    of picking the interval ``[edges[i], edges[i + 1]]``. Interval i has i
    values below it and m - i at or above, giving rank utility
    ``-|i - m/2|``; zero-length intervals (tied values) get zero mass.
    Weights are normalized in log space with max-subtraction, so large
    ``epsilon * m`` products cannot overflow.
    """
    _check_args(epsilon, clip_lo, clip_hi)
    v = np.sort(np.clip(np.asarray(values, dtype=np.float64), clip_lo, clip_hi))
    m = v.size
    edges = np.concatenate(([clip_lo], v, [clip_hi]))
    lengths = np.diff(edges)
    utilities = -np.abs(np.arange(m + 1, dtype=np.float64) - m / 2.0)
    with np.errstate(divide="ignore"):  # log(0) -> -inf marks zero-length intervals
        log_w = np.log(lengths) + 0.5 * epsilon * utilities
    log_w -= log_w.max()
    w = np.exp(log_w)
    return edges, w / w.sum()


def dp_median(
    values,
    epsilon: float,
    clip_lo: float,
    clip_hi: float,
    stream: RandomStream,
    size_hint: float | None = None,
) -> float:
    """epsilon-DP median of ``values`` within [clip_lo, clip_hi].

    Consumes exactly two uniforms per call: one to pick an interval from
    :func:`median_interval_probs`, one for the point inside it, so replaying
    a stream replays the output. Empty input returns the midpoint of the
    clip range, emits a :class:`DegenerateInputWarning`, and draws nothing.

    ``size_hint`` is accepted so callers can forward a privatized size
    estimate alongside the values; the rank utility does not use it.
    """
    del size_hint
    _check_args(epsilon, clip_lo, clip_hi)
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        warnings.warn(
            "dp_median called with no values; returning the clip-range midpoint",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return 0.5 * (clip_lo + clip_hi)
    edges, probs = median_interval_probs(values, epsilon, clip_lo, clip_hi)
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, stream.uniform(), side="right"))
    idx = min(idx, probs.size - 1)  # guard the u ~= 1 rounding edge
    lo, hi = edges[idx], edges[idx + 1]
    return float(lo + (hi - lo) * stream.uniform())
