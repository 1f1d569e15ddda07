"""Static SVG figures rendered next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.collections import EllipseCollection
import numpy as np


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return path


def plot_trace(path, traces, labels=None, epsilon=None, title=None) -> Path:
    """Overlay one or more traces; optionally shade an epsilon-tube around the first."""
    fig, ax = plt.subplots(figsize=(5, 4))
    traces = list(traces)
    labels = labels or [f"trace {i}" for i in range(len(traces))]
    if epsilon:
        ref = traces[0].points
        step = max(1, ref.size // 80)
        centers = ref[::step]
        offsets = np.c_[centers.real, centers.imag]
        tube = EllipseCollection(widths=2 * epsilon, heights=2 * epsilon, angles=0,
                                 units="x", offsets=offsets, transOffset=ax.transData,
                                 facecolor="tab:blue", alpha=0.08, edgecolor="none")
        ax.add_collection(tube)
    for tr, lab in zip(traces, labels):
        ax.plot(tr.points.real, tr.points.imag, lw=1.0, label=lab)
    ax.axhline(0.0, color="0.6", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="best")
    return _save(fig, path)


def plot_driver(path, drivers, labels=None, title=None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    drivers = list(drivers)
    labels = labels or [f"driver {i}" for i in range(len(drivers))]
    for d, lab in zip(drivers, labels):
        tt = np.linspace(0.0, d.t_end, 800)
        ax.plot(tt, d(tt), lw=1.0, label=lab)
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="best")
    return _save(fig, path)


def plot_schedule(path, report) -> Path:
    """Per-knot tolerance schedule and measured gaps of a certificate."""
    fig, ax = plt.subplots(figsize=(6, 3))
    ks = [c.k for c in report.conditions]
    eps = [c.eps for c in report.conditions]
    gaps = [c.gap for c in report.conditions]
    ax.bar(ks, eps, width=0.8, color="tab:blue", alpha=0.5, label="eps_k")
    ax.plot(ks, gaps, "k.", ms=4, label="measured gap")
    ax.set_yscale("log")
    ax.set_xlabel("cell k")
    ax.set_ylabel("tolerance")
    ax.set_title(f"certificate schedule (certified={report.certified})")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_distance_decay(path, xs, ys, xlabel, ylabel, title=None) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 3))
    ax.loglog(xs, ys, "o-", lw=1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)
