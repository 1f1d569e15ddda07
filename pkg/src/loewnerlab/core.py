"""Trace synthesis from drivers via exact elementary slit-map composition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .driver import PIECEWISE_SQRT, Driver
from .errors import InputError
from .grid import TimeGrid, union_grid
from .slitmap import SlitMapChain, apply_cell, split_vertical_cell, tilted_cell

_IM_FLOOR = 1e-12


@dataclass(frozen=True)
class Trace:
    """A half-plane curve sampled at capacity times: hcap(curve[0,t]) = 2t."""

    grid: TimeGrid
    points: np.ndarray = field(repr=False)
    err_est: np.ndarray | None = field(default=None, repr=False)
    y0: float | None = None
    driver_ref: str | None = None

    def __post_init__(self):
        p = np.asarray(self.points, dtype=complex)
        if p.shape != self.grid.times.shape:
            raise InputError("point count does not match the grid")
        if abs(p[0]) > 1e-9:
            raise InputError("a trace must start at 0")
        object.__setattr__(self, "points", p)

    def __repr__(self):
        return f"Trace(n={len(self.grid)}, t_end={self.grid.t_end:g})"

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def resampled(self, grid: TimeGrid) -> "Trace":
        """Linear resampling onto another grid (within the original horizon)."""
        if grid.t_end > self.grid.t_end + 1e-12:
            raise InputError("target grid exceeds the trace horizon")
        re = np.interp(grid.times, self.times, self.points.real)
        im = np.interp(grid.times, self.times, self.points.imag)
        return Trace(grid, re + 1j * im, y0=self.y0, driver_ref=self.driver_ref)


def build_cells(d: Driver, knots: np.ndarray, tilted: bool | None = None) -> list:
    """One elementary cell per knot interval, following the driver's rule.

    Square-root interpolated drivers get exact tilted cells by default;
    everything else gets vertical cells pinned at cell-midpoint values.
    """
    if tilted is None:
        tilted = d.interpolation == PIECEWISE_SQRT
    vals = d(knots)
    mids = d(0.5 * (knots[:-1] + knots[1:]))
    cells = []
    for k in range(knots.size - 1):
        dt = knots[k + 1] - knots[k]
        if tilted:
            cells.append(tilted_cell(dt, vals[k + 1] - vals[k]))
        else:
            cells.append(split_vertical_cell(dt, vals[k], mids[k], vals[k + 1]))
    return cells


def chain_from_driver(d: Driver, t: float | None = None, tilted: bool | None = None) -> SlitMapChain:
    """The centred inverse-map chain of the driver up to time t (default t_end)."""
    if t is None:
        t = d.t_end
    knots = d.grid.times[d.grid.times <= t + 1e-12]
    if abs(knots[-1] - t) > 1e-12 * max(1.0, t):
        knots = np.append(knots, t)
    return SlitMapChain(build_cells(d, knots, tilted))


def _synthesize(cells, out_cell_counts, y0, extrapolate):
    """Run the newest-innermost composition for many partial chains at once.

    out_cell_counts[k] is how many leading cells the k-th output uses; the
    cost is one vectorized map application per cell over the still-active
    outputs.
    """
    counts = np.asarray(out_cell_counts)
    m = counts.size
    W = np.empty((m, 2), dtype=complex)
    W[:, 0] = 1j * y0
    W[:, 1] = 0.5j * y0
    for j in range(len(cells), 0, -1):
        b = int(np.searchsorted(counts, j, side="left"))
        if b >= m:
            continue
        W[b:] = apply_cell(cells[j - 1], W[b:])
    p1, p2 = W[:, 0], W[:, 1]
    est = (4.0 / 3.0) * np.abs(p2 - p1) + 1e-15
    pts = (4.0 * p2 - p1) / 3.0 if extrapolate else p1.copy()
    zero = counts == 0
    pts[zero] = 0.0
    est[zero] = 0.0
    im = pts.imag
    pts = pts.real + 1j * np.where(im < _IM_FLOOR, 0.0, im)
    return pts, est


def compute_trace(d: Driver, out_grid: TimeGrid | None = None, y0: float | None = None,
                  tilted: bool | None = None, extrapolate: bool = True) -> Trace:
    """Synthesize the Loewner trace of a driver at the requested capacity times.

    For each output time the centred chain is evaluated at i*y0 and i*y0/2
    and Richardson-extrapolated toward the tip (the offset error is
    quadratic in y0 because the innermost map is analytic at 0).  Points
    whose imaginary part falls below the numerical floor are clamped to
    the real axis.
    """
    if out_grid is None:
        out_grid = d.grid
    elif not isinstance(out_grid, TimeGrid):
        out_grid = TimeGrid(np.asarray(out_grid, dtype=float))
    if out_grid.t_end > d.t_end + 1e-12:
        raise InputError("output grid exceeds the driver horizon")

    work = union_grid(d.grid.times[d.grid.times <= out_grid.t_end + 1e-12], out_grid.times)
    cells = build_cells(d, work.times, tilted)
    if y0 is None:
        y0 = np.sqrt(work.min_spacing) / 16.0
    counts = np.searchsorted(work.times, out_grid.times + 1e-12 * max(1.0, work.t_end)) - 1
    counts = np.clip(counts, 0, len(cells))
    pts, est = _synthesize(cells, counts, y0, extrapolate)
    return Trace(out_grid, pts, err_est=est, y0=float(y0))


def restarted_trace(d: Driver, t0: float, out_grid: TimeGrid | None = None,
                    t_span: float | None = None, **kw) -> Trace:
    """Trace of the shifted recentred driver d(t0 + s) - d(t0).

    The result is indexed by local capacity time s = t - t0 starting at 0.
    Composing it with the chain of d up to t0 reproduces the global trace.
    """
    shifted = d.shifted(t0) if t0 > 0 else d
    if out_grid is None and t_span is not None:
        times = shifted.grid.times[shifted.grid.times <= t_span + 1e-12]
        if times.size < 2:
            raise InputError("window shorter than the driver resolution")
        out_grid = TimeGrid(times)
    return compute_trace(shifted, out_grid=out_grid, **kw)


def hull_bounds_check(tr: Trace, d: Driver, tol: float = 1e-6):
    """Check |Re| <= running sup |driver| and Im <= 2*sqrt(t) on every point.

    Returns (ok, margins) where margins reports the worst signed violation
    of each bound (positive means violated by that amount).
    """
    pts = d.sample_points()
    vals = np.abs(d(pts))
    run_sup = np.maximum.accumulate(vals)
    idx = np.clip(np.searchsorted(pts, tr.times + 1e-12), 1, pts.size) - 1
    re_bound = run_sup[idx]
    re_excess = np.abs(tr.points.real) - re_bound
    im_excess = tr.points.imag - 2.0 * np.sqrt(np.maximum(tr.times, 0.0))
    margins = {
        "re_margin": float(np.max(re_excess)),
        "re_argmax_t": float(tr.times[int(np.argmax(re_excess))]),
        "im_margin": float(np.max(im_excess)),
        "im_argmax_t": float(tr.times[int(np.argmax(im_excess))]),
    }
    ok = margins["re_margin"] <= tol and margins["im_margin"] <= tol
    return bool(ok), margins


def delta_modulus(d: Driver, epsilon: float, probe_box, n_probe: int = 64,
                  times: np.ndarray | None = None) -> float:
    """Empirical uniform-continuity modulus delta(epsilon) of the inverse maps.

    Probes the uncentred maps f_t on a point lattice over probe_box =
    (re_min, re_max, im_min, im_max) at the sampled times and returns the
    largest probed pair distance h such that every sampled pair within h
    has image gap at most epsilon, for every sampled t.  Conservative on
    the probed data and nondecreasing in epsilon by construction.
    """
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    if n_probe < 2:
        raise InputError("probe budget too small")
    re0, re1, im0, im1 = map(float, probe_box)
    if im0 < 0 or im1 <= im0 or re1 <= re0:
        raise InputError("probe box must be a rectangle in the closed upper half-plane")
    if times is None:
        times = d.grid.times
    times = np.asarray(times, dtype=float)

    xs = np.linspace(re0, re1, n_probe)
    ys = np.linspace(im0, im1, n_probe)
    z = (xs[None, :] + 1j * ys[:, None]).ravel()
    iu, ju = np.triu_indices(z.size, k=1)
    pair_dist = np.abs(z[iu] - z[ju])
    worst_gap = np.zeros_like(pair_dist)

    for t in times:
        if t <= 0:
            images = z.copy()
        else:
            images = _eval_uncentred(chain_from_driver(d, t), z, d(t))
        np.maximum(worst_gap, np.abs(images[iu] - images[ju]), out=worst_gap)

    bad = worst_gap > epsilon
    if not bad.any():
        return float(pair_dist.max())
    first_bad = pair_dist[bad].min()
    ok_dists = pair_dist[pair_dist < first_bad]
    return float(ok_dists.max()) if ok_dists.size else 0.0


def _eval_uncentred(chain: SlitMapChain, z: np.ndarray, driver_end: float) -> np.ndarray:
    """f_t(z) = centred chain evaluated at z - driver(t)."""
    w = np.asarray(z, dtype=complex) - driver_end
    for cell in reversed(chain.cells):
        w = apply_cell(cell, w)
    return w
