"""Inverse problem: recover a driving function from a half-plane curve."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import Trace
from .driver import Driver
from .errors import InputError, SelfIntersectionError
from .grid import TimeGrid
from .slitmap import _upper

_FLAT_TOL = 1e-12


@dataclass(frozen=True)
class RawCurve:
    """An ordered point sequence in the closed upper half-plane, starting on R."""

    points: np.ndarray = field(repr=False)
    simple_flag: bool = True  # caller's assertion; the zipper still verifies numerically

    def __post_init__(self):
        p = np.asarray(self.points, dtype=complex)
        if p.size < 2:
            raise InputError("a curve needs at least two points")
        if abs(p[0].imag) > 1e-9:
            raise InputError("curve must start on the real line")
        if np.any(p.imag < -1e-9):
            raise InputError("curve points must lie in the closed upper half-plane")
        if np.any(np.abs(np.diff(p)) == 0):
            raise InputError("consecutive curve points must be distinct")
        p = p.real + 1j * np.maximum(p.imag, 0.0)
        object.__setattr__(self, "points", p)

    def __repr__(self):
        return f"RawCurve(n={self.points.size})"

    def subdivided(self, max_len: float) -> "RawCurve":
        """Insert points so no segment is longer than max_len."""
        if max_len <= 0:
            raise InputError("max_len must be positive")
        out = [self.points[0]]
        for a, b in zip(self.points[:-1], self.points[1:]):
            k = max(1, int(np.ceil(abs(b - a) / max_len)))
            for j in range(1, k + 1):
                out.append(a + (b - a) * j / k)
        return RawCurve(np.asarray(out))


def _unzip_vertical(u: float, v: float, z: np.ndarray) -> np.ndarray:
    """Forward welding map for a vertical slit of height v rooted at u.

    z -> u + sqrt((z-u)^2 + v^2) with the branch cut exactly on the slit,
    mapping H minus the slit onto H with hydrodynamic normalization.
    """
    zeta = _upper(z) - u
    ratio = np.where(zeta == 0, 0j, (v / np.where(zeta == 0, 1.0, zeta)) ** 2)
    out = np.where(zeta == 0, 0j, zeta * np.sqrt(1.0 + ratio))
    out = np.where(zeta == 1j * v, 0j, out)
    return out + u


def _weld(pts: np.ndarray, im_tol: float, skip_below: float):
    """Shared welding loop: returns (times, values, kept vertex indices)."""
    start = pts[0].real
    images = np.array(pts[1:] - start, dtype=complex)
    times = [0.0]
    values = [0.0]
    kept = [0]
    t = 0.0
    for k in range(images.size):
        w = images[k]
        u, v = float(w.real), float(w.imag)
        if v < -im_tol:
            raise SelfIntersectionError(
                f"vertex {k + 1} maps below the real line (im={v:.3e}): "
                "curve intersects itself or the boundary")
        t_next = t + 0.25 * v * v
        if v <= _FLAT_TOL or v < skip_below or t_next <= t:
            if skip_below > 0.0:
                continue
            raise SelfIntersectionError(
                f"vertex {k + 1} lands on the real line: tip touches R prematurely")
        t = t_next
        times.append(t)
        values.append(u)
        kept.append(k + 1)
        if k + 1 < images.size:
            images[k + 1:] = _unzip_vertical(u, v, images[k + 1:])
    return np.asarray(times), np.asarray(values), np.asarray(kept, dtype=int)


def zip_curve(c: RawCurve, im_tol: float = 1e-9, skip_below: float = 0.0):
    """Discrete zipper: weld the curve down vertex by vertex.

    Returns (driver, capacity_times).  Each vertex contributes one
    vertical-slit cell whose capacity increment is (image height)^2 / 4 and
    whose driver value is the real part of the vertex image under the maps
    accumulated so far.

    With skip_below > 0, vertices whose image height falls under the floor
    are passed over instead of welded: such points sit so deep in fjords of
    the already-welded hull that their capacity contribution (height^2/4)
    and driver displacement stay below the floor itself.  The default floor
    of 0 keeps the strict behaviour of rejecting curves that touch the real
    line.
    """
    times, values, _ = _weld(c.points, im_tol, skip_below)
    grid = TimeGrid(times)
    return Driver(grid, values, "piecewise-linear"), grid.times.copy()


def hcap(c: RawCurve, skip_below: float = 0.0) -> float:
    """Half-plane capacity of the welded curve: the sum of 2*dt over zipper cells."""
    times, _, _ = _weld(c.points, 1e-9, skip_below)
    return 2.0 * float(times[-1])


def reparam_by_hcap(c: RawCurve, out_grid: TimeGrid, skip_below: float = 0.0) -> Trace:
    """Resample the curve at points where accumulated capacity equals 2t.

    Positions between welded vertices are interpolated along the chord,
    weighted by the capacity fraction.
    """
    times, _, kept = _weld(c.points, 1e-9, skip_below)
    if out_grid.t_end > times[-1] + 1e-12:
        raise InputError(
            f"requested capacity time {out_grid.t_end:g} exceeds the curve total {times[-1]:g}")
    pts = c.points[kept]
    t = np.clip(out_grid.times, 0.0, times[-1])
    idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2)
    t0, t1 = times[idx], times[idx + 1]
    frac = (t - t0) / (t1 - t0)
    pos = pts[idx] + frac * (pts[idx + 1] - pts[idx])
    pos = pos - pts[0].real  # trace normalization: start at 0
    im = pos.imag
    pos = pos.real + 1j * np.where(im < 0, 0.0, im)
    return Trace(out_grid, pos)


def hcap_continuity_check(c1: RawCurve, c2: RawCurve, delta: float,
                          max_pixels: int = 4_000_000, skip_below: float = 0.0):
    """Mutual delta-neighbourhood fill containment plus the capacity gap.

    Rasterizes both curves at resolution delta/8, dilates by delta, fills
    pockets (components of the complement not connected to infinity inside
    the half-plane), and tests set containment both ways.  Returns
    (contained_mutually, hcap_gap).
    """
    if delta <= 0:
        raise InputError("delta must be positive")
    res = delta / 8.0
    all_pts = np.concatenate([c1.points, c2.points])
    margin = 2.0 * delta + 4.0 * res
    x0, x1 = all_pts.real.min() - margin, all_pts.real.max() + margin
    y1 = all_pts.imag.max() + margin
    nx = int(np.ceil((x1 - x0) / res)) + 1
    ny = int(np.ceil(y1 / res)) + 1
    if nx * ny > max_pixels:
        raise InputError(
            f"raster of {nx}x{ny} pixels exceeds the budget; "
            "delta is too small for the curve extent")

    def raster(c):
        mask = np.zeros((ny, nx), dtype=bool)
        for a, b in zip(c.points[:-1], c.points[1:]):
            k = max(2, int(np.ceil(abs(b - a) / (0.5 * res))) + 1)
            seg = a + (b - a) * np.linspace(0.0, 1.0, k)
            ix = np.clip(np.round((seg.real - x0) / res).astype(int), 0, nx - 1)
            iy = np.clip(np.round(seg.imag / res).astype(int), 0, ny - 1)
            mask[iy, ix] = True
        return mask

    r = int(np.ceil(delta / res))
    yy, xx = np.ogrid[-r:r + 1, -r:r + 1]
    disk = xx * xx + yy * yy <= r * r

    def filled_dilation(mask):
        fat = ndimage.binary_dilation(mask, structure=disk)
        labels, n = ndimage.label(~fat)
        unbounded = set(labels[-1, :]) | set(labels[:, 0]) | set(labels[:, -1])
        unbounded.discard(0)
        fill = fat.copy()
        for lab in range(1, n + 1):
            if lab not in unbounded:
                fill |= labels == lab
        return fill

    m1, m2 = raster(c1), raster(c2)
    contained = bool(np.all(filled_dilation(m2)[m1]) and np.all(filled_dilation(m1)[m2]))
    gap = abs(hcap(c1, skip_below) - hcap(c2, skip_below))
    return contained, float(gap)
