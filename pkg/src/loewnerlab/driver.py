"""Driving functions: construction, sampling, and regularity diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .grid import TimeGrid, uniform_grid

PIECEWISE_CONSTANT = "piecewise-constant"
PIECEWISE_LINEAR = "piecewise-linear"
PIECEWISE_SQRT = "piecewise-sqrt"
INTERPOLATIONS = (PIECEWISE_CONSTANT, PIECEWISE_LINEAR, PIECEWISE_SQRT)


@dataclass(frozen=True)
class Driver:
    """A real driving function sampled on a time grid.

    Values between knots follow the interpolation rule: constant on each
    cell, linear, or the forward square-root shape a + b*sqrt(t - t_k).
    """

    grid: TimeGrid
    values: np.ndarray = field(repr=False)
    interpolation: str = PIECEWISE_LINEAR

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.times.shape:
            raise InputError(
                f"value count {v.size} does not match grid size {len(self.grid)}"
            )
        if not np.all(np.isfinite(v)):
            raise InputError("driver values must be finite")
        if v[0] != 0.0:
            raise InputError(f"driver must start at 0 (normalization), got {v[0]}")
        if self.interpolation not in INTERPOLATIONS:
            raise InputError(f"unknown interpolation rule {self.interpolation!r}")
        object.__setattr__(self, "values", v)

    def __repr__(self):
        return (
            f"Driver(n={len(self.grid)}, t_end={self.t_end:g}, "
            f"rule={self.interpolation!r}, sup={np.max(np.abs(self.values)):.4g})"
        )

    @property
    def t_end(self) -> float:
        return self.grid.t_end

    def __call__(self, t):
        """Evaluate at scalar or array times in [0, t_end]; exact at knots."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        tt = np.atleast_1d(t_arr)
        slack = 1e-12 * max(1.0, self.t_end)
        if np.any(tt < -slack) or np.any(tt > self.t_end + slack):
            raise InputError("evaluation time outside [0, t_end]")
        tt = np.clip(tt, 0.0, self.t_end)
        knots, vals = self.grid.times, self.values
        if self.interpolation == PIECEWISE_LINEAR:
            out = np.interp(tt, knots, vals)
        else:
            idx = np.clip(np.searchsorted(knots, tt, side="right") - 1, 0, len(knots) - 2)
            if self.interpolation == PIECEWISE_CONSTANT:
                out = vals[idx]
                at_knot = tt >= knots[idx + 1]
                out = np.where(at_knot, vals[idx + 1], out)
            else:
                t0, t1 = knots[idx], knots[idx + 1]
                frac = np.sqrt(np.clip((tt - t0) / (t1 - t0), 0.0, 1.0))
                out = vals[idx] + (vals[idx + 1] - vals[idx]) * frac
        return float(out[0]) if scalar else out

    def sample_points(self) -> np.ndarray:
        """Knots plus cell midpoints; bounds sup-type scans for all three rules."""
        return self.grid.with_midpoints()

    def shifted(self, t0: float) -> "Driver":
        """The restarted driver d(t0 + s) - d(t0) on [0, t_end - t0]; t0 must be a knot."""
        i = self.grid.index_of(t0)
        if i == len(self.grid) - 1:
            raise InputError("cannot restart at the final knot")
        times = self.grid.times[i:] - self.grid.times[i]
        vals = self.values[i:] - self.values[i]
        return Driver(TimeGrid(times), vals, self.interpolation)

    def restricted(self, t1: float) -> "Driver":
        """The driver restricted to [0, t1]; t1 must be a knot."""
        i = self.grid.index_of(t1)
        if i == 0:
            raise InputError("cannot restrict to the single knot t=0")
        return Driver(TimeGrid(self.grid.times[: i + 1]), self.values[: i + 1], self.interpolation)

    def sup_abs(self, upto: float | None = None) -> float:
        """sup |d| over sample points up to the given time (default: everywhere)."""
        pts = self.sample_points()
        if upto is not None:
            pts = pts[pts <= upto + 1e-12]
        if pts.size == 0:
            return 0.0
        return float(np.max(np.abs(self(pts))))


def make_driver(grid, values, interpolation: str = PIECEWISE_LINEAR) -> Driver:
    """Build a Driver from knot times and values, validating the contract."""
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(np.asarray(grid, dtype=float))
    return Driver(grid, np.asarray(values, dtype=float), interpolation)


def zero_driver(n: int = 1, t_end: float = 1.0) -> Driver:
    g = uniform_grid(n, t_end)
    return Driver(g, np.zeros(len(g)))


def sample_brownian_driver(kappa: float, n: int, seed: int, t_end: float = 1.0) -> Driver:
    """sqrt(kappa) times a standard Brownian path on a uniform n-cell grid.

    Increments are i.i.d. centred Gaussians with variance dt; the same seed
    always reproduces the same path.
    """
    if kappa < 0:
        raise InputError("kappa must be nonnegative")
    if n < 1:
        raise InputError("need at least one step")
    g = uniform_grid(n, t_end)
    dt = np.diff(g.times)
    rng = np.random.default_rng(seed)
    incr = rng.standard_normal(n) * np.sqrt(dt)
    vals = np.concatenate([[0.0], np.cumsum(incr)]) * np.sqrt(kappa)
    return Driver(g, vals)


def _pairwise_sup(points: np.ndarray, vals: np.ndarray, window: float, ratio: bool) -> float:
    """Sup of |v(s)-v(t)| (or the 1/2-Hoelder ratio) over pairs with |s-t| <= window."""
    tol = 1e-12 * max(1.0, points[-1])
    best = 0.0
    n = points.size
    for off in range(1, n):
        gaps = points[off:] - points[:-off]
        mask = gaps <= window + tol
        if not mask.any():
            break
        diffs = np.abs(vals[off:] - vals[:-off])[mask]
        if ratio:
            diffs = diffs / np.sqrt(gaps[mask])
        m = diffs.max() if diffs.size else 0.0
        if m > best:
            best = float(m)
    return best


def local_holder_norm(d: Driver, delta: float) -> float:
    """sup |d(s)-d(t)| / sqrt(|s-t|) over sampled pairs with |s-t| <= delta.

    Pairs run over knots and cell midpoints, which bound the true sup for
    the three monotone-per-cell interpolation rules.
    """
    if delta <= 0:
        raise InputError("delta must be positive")
    if delta > d.t_end + 1e-12:
        raise InputError("delta exceeds the driver horizon")
    pts = d.sample_points()
    return _pairwise_sup(pts, d(pts), delta, ratio=True)


def oscillation(d: Driver, window: float) -> float:
    """Modulus of continuity osc(window; d) = sup |d(s)-d(t)| over |s-t| <= window."""
    if window <= 0:
        raise InputError("window must be positive")
    pts = d.sample_points()
    return _pairwise_sup(pts, d(pts), min(window, d.t_end), ratio=False)


@dataclass(frozen=True)
class HolderProfile:
    """Window-resolved 1/2-Hoelder norms and oscillation of a driver."""

    deltas: np.ndarray
    norms: np.ndarray
    osc: np.ndarray
    threshold: float
    flagged: bool  # class-D at this resolution: smallest-window norm below threshold


def class_d_profile(d: Driver, deltas, threshold: float = 0.5) -> HolderProfile:
    """Scan local Hoelder norms over a decreasing window ladder.

    A driver has locally vanishing 1/2-Hoelder norm exactly when these
    norms can be made arbitrarily small; at finite resolution we flag the
    driver when the smallest-window norm drops below the threshold.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise InputError("need at least one window size")
    if np.any(deltas <= 0) or np.any(np.diff(deltas) >= 0):
        raise InputError("windows must be positive and strictly decreasing")
    norms = np.array([local_holder_norm(d, dl) for dl in deltas])
    oscs = np.array([oscillation(d, dl) for dl in deltas])
    return HolderProfile(deltas, norms, oscs, threshold, bool(norms[-1] < threshold))


def phi(u: float, d: Driver) -> float:
    """2*osc(u; d) + 2*sqrt(u), the geometric closeness modulus of the driver.

    Callers bound the distance between restarted-trace arguments by
    phi(2*dt) plus five times their driver-gap budget.
    """
    if u <= 0:
        raise InputError("window must be positive")
    if u > d.t_end + 1e-12:
        raise InputError("window exceeds the driver horizon")
    return 2.0 * oscillation(d, u) + 2.0 * np.sqrt(u)
