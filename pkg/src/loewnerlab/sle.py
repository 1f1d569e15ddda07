"""SLE_kappa sampling and the restarted-trace quantities behind the certifier."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Trace, compute_trace, restarted_trace
from .driver import Driver, sample_brownian_driver
from .errors import InputError
from .grid import TimeGrid, uniform_grid

# imaginary parts below this floor count as boundary touching
IM_FLOOR = 1e-9


@dataclass
class SlePath:
    """One sampled SLE path: driver, trace, and cached restarted traces."""

    kappa: float
    seed: int
    driver: Driver
    trace: Trace
    restarted: dict = field(default_factory=dict, repr=False)

    def restarted_at(self, t0: float, t_span: float) -> Trace:
        """Trace of the driver restarted at knot t0, over local time [0, t_span]."""
        key = (round(float(t0), 12), round(float(t_span), 12))
        if key not in self.restarted:
            self.restarted[key] = restarted_trace(self.driver, t0, t_span=t_span)
        return self.restarted[key]


def sample_sle(kappa: float, n: int, seed: int, out_grid: TimeGrid | None = None,
               t_end: float = 1.0) -> SlePath:
    """Sample one SLE_kappa trace, deterministic in the seed."""
    if kappa < 0:
        raise InputError("kappa must be nonnegative")
    driver = sample_brownian_driver(kappa, n, seed, t_end=t_end)
    if out_grid is None:
        out_grid = driver.grid
    trace = compute_trace(driver, out_grid=out_grid)
    return SlePath(float(kappa), int(seed), driver, trace)


def min_imag_restarted(p: SlePath, t0: float, t1: float, t2: float) -> float:
    """Grid minimum of Im of the restarted trace over absolute times [t1, t2].

    Values below the floor tolerance are reported as 0 (boundary touching).
    """
    if not (t0 <= t1 < t2):
        raise InputError("need t0 <= t1 < t2")
    tr = p.restarted_at(t0, t2 - t0)
    return window_min_imag(tr, t1 - t0, t2 - t0)


def window_min_imag(tr: Trace, s1: float, s2: float) -> float:
    """Min Im of a trace over local times [s1, s2], floored at 0."""
    if s2 > tr.grid.t_end + 1e-9:
        raise InputError("window extends beyond the computed trace")
    sel = (tr.times >= s1 - 1e-12) & (tr.times <= s2 + 1e-12)
    if not sel.any():
        raise InputError("window contains no trace samples")
    m = float(np.min(tr.points.imag[sel]))
    return 0.0 if m < IM_FLOOR else m


def epsilon_schedule(c_values, a: float, eps_bar: float) -> np.ndarray:
    """Backward tolerance recursion eps_k = min(eps_{k+1}/2, a*c_k).

    The base case is eps_n = min(eps_bar/2, a*c_n).  The halving makes the
    partial sums geometric, so eps_1 + ... + eps_k <= 2*eps_k holds for
    every k, and eps_k <= min(eps_bar/2, a*c_k) throughout.
    """
    c = np.asarray(c_values, dtype=float)
    if c.size == 0:
        raise InputError("need at least one c value")
    if np.any(c <= 0):
        raise InputError("all c values must be positive")
    if a <= 0 or eps_bar <= 0:
        raise InputError("a and eps_bar must be positive")
    eps = np.empty_like(c)
    eps[-1] = min(0.5 * eps_bar, a * c[-1])
    for k in range(c.size - 2, -1, -1):
        eps[k] = min(0.5 * eps[k + 1], a * c[k])
    return eps


def batch_sle_traces(kappa: float, n_cells: int, n_samples: int, seed: int,
                     t_end: float = 1.0, y0: float | None = None):
    """Vectorized trace synthesis for many independent SLE samples.

    Returns (times, points) with points of shape (n_samples, n_cells + 1).
    Each sample reproduces compute_trace of the corresponding driver (same
    midpoint vertical cells, same tip extrapolation).  Per-sample seeds are
    spawned deterministically from the master seed.
    """
    if n_samples < 1:
        raise InputError("need at least one sample")
    grid = uniform_grid(n_cells, t_end)
    dt = t_end / n_cells
    if y0 is None:
        y0 = np.sqrt(dt) / 16.0
    seeds = np.random.SeedSequence(seed).spawn(n_samples)
    incr = np.empty((n_samples, n_cells))
    for s in range(n_samples):
        rng = np.random.default_rng(seeds[s])
        incr[s] = rng.standard_normal(n_cells) * np.sqrt(dt) * np.sqrt(kappa)

    half = 0.5 * incr  # midpoint pivot: pre = post = dlam / 2
    W = np.empty((n_samples, n_cells + 1, 2), dtype=complex)
    W[:, :, 0] = 1j * y0
    W[:, :, 1] = 0.5j * y0
    for j in range(n_cells, 0, -1):
        blk = W[:, j:, :]
        v = blk + half[:, j - 1, None, None]
        v = v.real + 1j * np.maximum(v.imag, 0.0)
        blk = v * np.sqrt(1.0 - 4.0 * dt / v**2) + half[:, j - 1, None, None]
        W[:, j:, :] = blk
    p1, p2 = W[:, :, 0], W[:, :, 1]
    pts = (4.0 * p2 - p1) / 3.0
    pts[:, 0] = 0.0
    im = pts.imag
    pts = pts.real + 1j * np.where(im < 1e-12, 0.0, im)
    return grid.times, pts
