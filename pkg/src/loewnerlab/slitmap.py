"""Elementary centred slit maps and their compositions.

A chain represents the centred inverse Loewner map of a driver that is
discretized cell by cell.  Each cell carries a capacity increment dt
(hull capacity 2*dt) and a driver increment dlam.  A vertical cell is

    w  ->  post + sqrt((w + pre)^2 - 4*dt),        pre + post = dlam,

the exact map for a driver held constant across the cell; a tilted cell is

    w  ->  (w + xm)^(1-alpha) * (w - xp)^alpha,

the exact map for a square-root shaped driver across the cell, which
removes a straight slit at angle alpha*pi.  Composing cells newest-first
(the latest cell applied innermost) yields the centred map at the chain's
final time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

VERTICAL = "vertical"
TILTED = "tilted"


def _upper(w: np.ndarray) -> np.ndarray:
    """Force boundary points onto the upper side of the cut (+0.0 imag)."""
    w = np.asarray(w, dtype=complex)
    return w.real + 1j * np.where(w.imag <= 0.0, 0.0, w.imag)


def slit_sqrt(w, dt: float):
    """sqrt(w^2 - 4*dt) with the branch mapping H onto H minus a vertical slit.

    Fixes infinity with derivative 1; the branch cut sits exactly on the
    removed segment [-2*sqrt(dt), 2*sqrt(dt)] of the real line, so the
    continuous boundary extension from H is single valued (both branch
    points map to the slit base 0, the segment interior onto the slit).
    """
    w = _upper(w)
    s2 = 4.0 * dt
    out = np.where(w == 0, 2j * np.sqrt(dt), w * np.sqrt(1.0 - s2 / np.where(w == 0, 1.0, w) ** 2))
    return out


@dataclass(frozen=True)
class SlitCell:
    kind: str
    dt: float
    dlam: float
    pre: float = 0.0   # translation applied before the vertical slit map
    post: float = 0.0  # translation applied after; pre + post == dlam
    alpha: float = 0.5
    xm: float = 0.0
    xp: float = 0.0


def vertical_cell(dt: float, dlam: float, pivot: float = 0.5) -> SlitCell:
    """Cell treating the driver as constant at a point inside the cell.

    pivot=0.5 evaluates the driver at the cell midpoint (pre = post =
    dlam/2 for linear drivers); pivot=1.0 reproduces the classic
    right-endpoint scheme.
    """
    if not np.isfinite(dt) or dt <= 0:
        raise InputError(f"capacity increment must be positive and finite, got {dt}")
    if not np.isfinite(dlam):
        raise InputError("driver increment must be finite")
    return SlitCell(VERTICAL, float(dt), float(dlam), pre=float(pivot * dlam),
                    post=float((1.0 - pivot) * dlam))


def split_vertical_cell(dt: float, value_start: float, value_mid: float, value_end: float) -> SlitCell:
    """Vertical cell with the constant driver level taken at an arbitrary mid value."""
    if not np.isfinite(dt) or dt <= 0:
        raise InputError(f"capacity increment must be positive and finite, got {dt}")
    pre = value_end - value_mid
    post = value_mid - value_start
    if not (np.isfinite(pre) and np.isfinite(post)):
        raise InputError("driver increment must be finite")
    return SlitCell(VERTICAL, float(dt), float(pre + post), pre=float(pre), post=float(post))


def tilted_cell(dt: float, dlam: float) -> SlitCell:
    """Cell matching the exact straight-slit map for a sqrt-shaped driver.

    The slope parameter c = dlam / sqrt(dt) fixes the slit angle alpha*pi via
    c = 2(1-2*alpha)/sqrt(alpha(1-alpha)); the prong offsets follow from the
    capacity and driver increments.
    """
    if not np.isfinite(dt) or dt <= 0:
        raise InputError(f"capacity increment must be positive and finite, got {dt}")
    if not np.isfinite(dlam):
        raise InputError("driver increment must be finite")
    c = dlam / np.sqrt(dt)
    u = c / np.sqrt(c * c + 16.0)
    alpha = 0.5 * (1.0 - u)
    xm = 2.0 * np.sqrt(dt * (1.0 - alpha) / alpha)
    xp = 2.0 * np.sqrt(dt * alpha / (1.0 - alpha))
    return SlitCell(TILTED, float(dt), float(dlam), alpha=float(alpha), xm=float(xm), xp=float(xp))


def apply_cell(cell: SlitCell, w):
    """Apply one centred elementary map to points of the closed upper half-plane."""
    w = _upper(w)
    if cell.kind == VERTICAL:
        return slit_sqrt(w + cell.pre, cell.dt) + cell.post
    return np.power(w + cell.xm, 1.0 - cell.alpha) * np.power(_upper(w - cell.xp), cell.alpha)


@dataclass(frozen=True)
class SlitMapChain:
    """Ordered composition of elementary centred maps (newest innermost)."""

    cells: tuple

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))

    def __len__(self):
        return len(self.cells)

    @property
    def total_capacity(self) -> float:
        return 2.0 * sum(c.dt for c in self.cells)

    @property
    def driver_end(self) -> float:
        return sum(c.dlam for c in self.cells)


def eval_chain(chain: SlitMapChain, z):
    """Evaluate the composed centred map at points of the closed upper half-plane.

    Interior points stay interior; real points follow the continuous
    boundary extension.  At an elementary branch point the extension is
    still single valued (the value is the local slit base).
    """
    w = _upper(z)
    for cell in reversed(chain.cells):
        w = apply_cell(cell, w)
    return w if np.ndim(z) else complex(w)
