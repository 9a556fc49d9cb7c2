"""Bounded datasets: validated records in the unit square and rescaling.

Every mechanism in this package assumes records live in [0, 1]^2; that bound
is what makes the per-record sensitivity analysis true. ``Dataset`` enforces
it once at construction, and ``normalize`` maps raw data with known bounds
into the unit square.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np


class Record(NamedTuple):
    """One (x, y) observation; both coordinates must lie in [0, 1]."""

    x: float
    y: float


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned box containing the raw data, used for rescaling."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise ValueError(
                f"x bounds must satisfy x_min < x_max, got [{self.x_min}, {self.x_max}]"
            )
        if not (self.y_min < self.y_max):
            raise ValueError(
                f"y bounds must satisfy y_min < y_max, got [{self.y_min}, {self.y_max}]"
            )

    @property
    def x_span(self) -> float:
        return self.x_max - self.x_min

    @property
    def y_span(self) -> float:
        return self.y_max - self.y_min


class Dataset:
    """Immutable collection of records in the unit square.

    Sufficient sums are computed lazily and cached on the instance (see the
    ``cache`` dict used by the statistics modules), so fitting several
    mechanisms to one dataset pays for each sum once. The coordinate arrays
    are marked read-only to keep the cache honest.
    """

    __slots__ = ("x", "y", "cache")

    def __init__(self, x, y):
        x = np.ascontiguousarray(x, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise ValueError(
                f"x and y must be 1-d arrays of equal length, got shapes {x.shape} and {y.shape}"
            )
        _check_unit_interval(x, "x")
        _check_unit_interval(y, "y")
        x.setflags(write=False)
        y.setflags(write=False)
        self.x = x
        self.y = y
        self.cache: dict = {}

    @classmethod
    def from_records(cls, records: Iterable[tuple]) -> "Dataset":
        pairs = np.asarray(list(records), dtype=np.float64)
        if pairs.size == 0:
            return cls(np.empty(0), np.empty(0))
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError(f"records must be (x, y) pairs, got array shape {pairs.shape}")
        return cls(pairs[:, 0], pairs[:, 1])

    def __len__(self) -> int:
        return self.x.size

    def __iter__(self):
        for xi, yi in zip(self.x, self.y):
            yield Record(float(xi), float(yi))

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)})"


def as_dataset(data) -> Dataset:
    """Coerce records, pairs, or a (n, 2) array into a ``Dataset``."""
    if isinstance(data, Dataset):
        return data
    return Dataset.from_records(data)


def _check_unit_interval(values: np.ndarray, name: str) -> None:
    if values.size == 0:
        return
    bad = ~((values >= 0.0) & (values <= 1.0))  # also catches NaN
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(
            f"record {i}: {name}={values[i]!r} outside [0, 1]; "
            "rescale with normalize() and explicit bounds first"
        )


def normalize(data, bounds: Bounds) -> Dataset:
    """Affinely map raw (x, y) pairs from ``bounds`` into the unit square.

    Raises ValueError naming the first offending record if any point falls
    outside the declared bounds.
    """
    raw = np.asarray(list(data) if not isinstance(data, np.ndarray) else data, dtype=np.float64)
    if raw.size == 0:
        return Dataset(np.empty(0), np.empty(0))
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ValueError(f"records must be (x, y) pairs, got array shape {raw.shape}")
    x, y = raw[:, 0], raw[:, 1]
    for name, v, lo, hi in (
        ("x", x, bounds.x_min, bounds.x_max),
        ("y", y, bounds.y_min, bounds.y_max),
    ):
        bad = ~((v >= lo) & (v <= hi))
        if bad.any():
            i = int(np.argmax(bad))
            raise ValueError(
                f"record {i}: {name}={v[i]!r} outside declared bounds [{lo}, {hi}]"
            )
    return Dataset((x - bounds.x_min) / bounds.x_span, (y - bounds.y_min) / bounds.y_span)
