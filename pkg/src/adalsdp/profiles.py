"""Performance profiles: cumulative distributions of per-instance time
ratios against the best solver on each instance.

Given a times matrix T (instances x solvers) with failures marked, the
ratio of solver s on instance p is r_ps = T_ps / min_s' T_ps' over the
non-failed entries of row p; failed entries (and every entry of an
all-failed row) get r = infinity and are never counted by any curve,
though the row still contributes to the instance count.  The curve of
solver s is the step function

    rho_s(tau) = |{p : r_ps <= tau}| / (number of instances)

evaluated at that solver's distinct finite ratios.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


@dataclass(frozen=True)
class ProfileCurve:
    label: str
    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints",
                           tuple((float(t), float(r)) for t, r in self.breakpoints))
        last_t, last_r = -np.inf, 0.0
        for t, r in self.breakpoints:
            if not (t >= 1.0 and np.isfinite(t)):
                raise ValueError("breakpoint ratios must be finite and >= 1")
            if t <= last_t or r < last_r or not 0.0 <= r <= 1.0:
                raise ValueError("breakpoints must be strictly increasing in "
                                 "tau with non-decreasing rho in [0, 1]")
            last_t, last_r = t, r

    @property
    def taus(self) -> np.ndarray:
        return np.array([t for t, _ in self.breakpoints])

    @property
    def rhos(self) -> np.ndarray:
        return np.array([r for _, r in self.breakpoints])

    @property
    def solved_fraction(self) -> float:
        """rho at tau = infinity."""
        return self.breakpoints[-1][1] if self.breakpoints else 0.0

    def rho_at(self, tau: float) -> float:
        out = 0.0
        for t, r in self.breakpoints:
            if t <= tau:
                out = r
            else:
                break
        return out


def compute_ratios(times: np.ndarray,
                   fail_marker: float | None = np.inf) -> np.ndarray:
    """Per-entry performance ratios; failures and all-failed rows -> inf."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 2 or times.shape[0] < 1 or times.shape[1] < 1:
        raise ValueError("times must be a non-empty instances x solvers matrix")
    failed = ~np.isfinite(times)
    if fail_marker is not None and np.isfinite(fail_marker):
        failed |= times == fail_marker
    if np.any(times[~failed] <= 0):
        raise ValueError("non-failed times must be positive")
    ratios = np.full(times.shape, np.inf)
    for p in range(times.shape[0]):
        ok = ~failed[p]
        if not ok.any():
            continue
        best = times[p, ok].min()
        ratios[p, ok] = times[p, ok] / best
    return ratios


def perf_profile(times: np.ndarray, labels: Sequence[str] | None = None,
                 fail_marker: float | None = np.inf) -> list[ProfileCurve]:
    """Build one ProfileCurve per solver column of the times matrix."""
    times = np.asarray(times, dtype=float)
    ratios = compute_ratios(times, fail_marker)
    n_inst, n_solv = times.shape
    if labels is None:
        labels = [f"solver_{s + 1}" for s in range(n_solv)]
    if len(labels) != n_solv:
        raise ValueError("one label per solver column required")
    curves = []
    for s in range(n_solv):
        col = ratios[:, s]
        finite = np.unique(col[np.isfinite(col)])
        pts = tuple((float(t), float(np.count_nonzero(col <= t) / n_inst))
                    for t in finite)
        curves.append(ProfileCurve(label=str(labels[s]), breakpoints=pts))
    return curves


def plot_profiles(curves: Sequence[ProfileCurve], path: str,
                  title: str | None = None,
                  tau_max: float | None = None) -> None:
    """Render the step curves to an image file (format from extension,
    e.g. .svg or .png) with a log-scaled ratio axis."""
    if tau_max is None:
        finite_taus = [t for c in curves for t, _ in c.breakpoints]
        tau_max = max(2.0, 1.1 * max(finite_taus)) if finite_taus else 2.0
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for curve in curves:
        xs = [1.0] + list(curve.taus) + [tau_max]
        ys = [0.0] + list(curve.rhos) + [curve.solved_fraction]
        ax.step(xs, ys, where="post", label=curve.label)
    ax.set_xscale("log")
    ax.set_xlim(1.0, tau_max)
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("time ratio to best solver per instance")
    ax.set_ylabel("fraction of instances solved within ratio")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="lower right")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_convergence(history: Sequence[tuple], path: str,
                     title: str | None = None,
                     bound_points: Sequence[tuple[int, float]] = ()) -> None:
    """Render residual and objective traces of one solve to an image file.

    `history` rows are (iteration, r_P, r_D, sigma, objective, elapsed)
    as produced by the solver; `bound_points` are optional (iteration,
    certified bound) markers.
    """
    if not history:
        raise ValueError("empty history: nothing to plot")
    its = [row[0] for row in history]
    rp = [row[1] for row in history]
    rd = [row[2] for row in history]
    obj = [row[4] for row in history]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.4), sharex=True)
    ax1.semilogy(its, rp, label="primal residual")
    ax1.semilogy(its, rd, label="dual residual")
    ax1.set_ylabel("scaled residual")
    ax1.grid(True, which="both", alpha=0.3)
    ax1.legend()
    ax2.plot(its, obj, label="objective")
    if bound_points:
        ax2.plot([i for i, _ in bound_points], [v for _, v in bound_points],
                 "o--", label="certified bound")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("value")
    ax2.grid(True, alpha=0.3)
    ax2.legend()
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def write_profile_csv(curves: Sequence[ProfileCurve], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["solver", "tau", "rho"])
        for curve in curves:
            for t, r in curve.breakpoints:
                writer.writerow([curve.label, repr(t), repr(r)])


def read_times_csv(path: str, fail_marker: str = "FAIL"
                   ) -> tuple[list[str], list[str], np.ndarray]:
    """Read a times table: header `instance,<label>,...`, one row per
    instance, cells either positive seconds or the fail marker.  Returns
    (instance names, solver labels, times with inf at failures)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2:
        raise ValueError("times CSV needs a header with at least one solver")
    labels = rows[0][1:]
    instances, data = [], []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != len(labels) + 1:
            raise ValueError(f"row for {row[0]!r} has {len(row) - 1} cells, "
                             f"expected {len(labels)}")
        instances.append(row[0])
        data.append([np.inf if cell.strip() == fail_marker else float(cell)
                     for cell in row[1:]])
    if not instances:
        raise ValueError("times CSV has no instance rows")
    return instances, labels, np.array(data)
