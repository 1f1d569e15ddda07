"""Time grids for drivers and traces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times starting at 0.

    The grid carries the Loewner (half-plane-capacity) time axis; the hull
    grown up to grid time t has capacity 2t.
    """

    times: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InputError("a time grid needs at least two knots")
        if t[0] != 0.0:
            raise InputError(f"grid must start at 0, got {t[0]}")
        if not np.all(np.diff(t) > 0):
            raise InputError("grid times must be strictly increasing")
        if not np.all(np.isfinite(t)):
            raise InputError("grid times must be finite")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    def __repr__(self):
        return f"TimeGrid(n={len(self)}, t_end={self.t_end:g}, max_dt={self.max_spacing:g})"

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def n_cells(self) -> int:
        return self.times.size - 1

    @property
    def max_spacing(self) -> float:
        return float(np.max(np.diff(self.times)))

    @property
    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.times)))

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.times[:-1] + self.times[1:])

    def with_midpoints(self) -> np.ndarray:
        """Knots and cell midpoints, sorted; the sampling set for sup-type scans."""
        return np.sort(np.concatenate([self.times, self.midpoints()]))

    def index_of(self, t: float, tol: float = 1e-12) -> int:
        """Index of the knot equal to t, or raise."""
        i = int(np.searchsorted(self.times, t))
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(self) and abs(self.times[j] - t) <= tol * max(1.0, abs(t)):
                return j
        raise InputError(f"t={t} is not a grid knot")

    def refined(self, k: int) -> "TimeGrid":
        """Insert k-1 equally spaced knots into every cell."""
        if k < 1:
            raise InputError("refinement factor must be >= 1")
        if k == 1:
            return self
        t = self.times
        pieces = [np.linspace(t[i], t[i + 1], k, endpoint=False) for i in range(len(t) - 1)]
        return TimeGrid(np.concatenate(pieces + [t[-1:]]))


def uniform_grid(n: int, t_end: float = 1.0) -> TimeGrid:
    """Uniform grid with n cells on [0, t_end]."""
    if n < 1:
        raise InputError("need at least one cell")
    if t_end <= 0:
        raise InputError("t_end must be positive")
    return TimeGrid(np.linspace(0.0, t_end, n + 1))


def union_grid(*time_arrays, tol: float = 1e-12) -> TimeGrid:
    """Merge several knot sets into one grid, fusing near-duplicates."""
    t = np.sort(np.concatenate([np.asarray(a, dtype=float).ravel() for a in time_arrays]))
    keep = np.concatenate([[True], np.diff(t) > tol * max(1.0, t[-1])])
    return TimeGrid(t[keep])
