"""Distances between traces: sup-norm and the reparametrization-invariant metric."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Trace
from .errors import InputError


def sup_distance(a: Trace, b: Trace) -> float:
    """Max pointwise distance over a shared grid; resample first if grids differ."""
    if len(a.grid) != len(b.grid) or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise InputError("traces live on different grids; resample first")
    return float(np.max(np.abs(a.points - b.points)))


@dataclass(frozen=True)
class AlignmentResult:
    """Minimax alignment between two sampled curves over monotone warps."""

    distance: float
    warp: np.ndarray = field(repr=False)  # (L, 2) monotone index pairs

    def __repr__(self):
        return f"AlignmentResult(distance={self.distance:.6g}, steps={len(self.warp)})"


def strong_distance(a: Trace, b: Trace) -> AlignmentResult:
    """Discrete minimax alignment (discrete Frechet distance) with its warp.

    This is an upper bound on the reparametrization-invariant metric
    inf_psi sup_t |a(t) - b(psi(t))| that converges to it under grid
    refinement, and never exceeds the same-grid sup distance.
    """
    p, q = a.points, b.points
    n, m = p.size, q.size
    d = np.abs(p[:, None] - q[None, :])
    D = np.empty_like(d)
    D[0, 0] = d[0, 0]
    for j in range(1, m):
        D[0, j] = max(D[0, j - 1], d[0, j])
    for i in range(1, n):
        Di, Dp = D[i], D[i - 1]
        di = d[i]
        Di[0] = max(Dp[0], di[0])
        for j in range(1, m):
            best = Dp[j]
            if Dp[j - 1] < best:
                best = Dp[j - 1]
            if Di[j - 1] < best:
                best = Di[j - 1]
            Di[j] = best if best > di[j] else di[j]
    # backtrack a witnessing monotone warp
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            choices = ((D[i - 1, j - 1], i - 1, j - 1), (D[i - 1, j], i - 1, j),
                       (D[i, j - 1], i, j - 1))
            _, i, j = min(choices, key=lambda c: c[0])
        path.append((i, j))
    warp = np.asarray(path[::-1], dtype=int)
    return AlignmentResult(float(D[-1, -1]), warp)
