"""Prediction-error metrics, the zero-mean Gaussian LSF model, and comparison tables."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateRangeError, InvalidInputError

DEFAULT_BIN_COUNT = 20


def rmse(measured, predicted) -> float:
    m = np.asarray(measured, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if m.size == 0 or m.size != p.size:
        raise InvalidInputError(f"rmse needs equal nonempty sequences, got {m.size} and {p.size}")
    diff = m - p
    return math.sqrt(float(diff @ diff) / diff.size)


@dataclass(frozen=True)
class GaussianFit:
    sigma_db: float
    mu_db: float = 0.0

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        s = self.sigma_db
        return np.exp(-0.5 * (x / s) ** 2) / (s * math.sqrt(2.0 * math.pi))


def fit_zero_mean_gaussian(lsf) -> GaussianFit:
    """Maximum-likelihood sigma with the mean pinned at zero (divides by N)."""
    x = np.asarray(lsf, dtype=np.float64).ravel()
    if x.size == 0:
        raise InvalidInputError("cannot fit a Gaussian to no samples")
    return GaussianFit(math.sqrt(float(x @ x) / x.size))


@dataclass(frozen=True)
class DensityEstimate:
    bin_edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    def integral(self) -> float:
        return float(self.density @ np.diff(self.bin_edges))


def empirical_density(samples, bin_count: int = DEFAULT_BIN_COUNT, value_range=None) -> DensityEstimate:
    """Histogram normalized to unit area.

    Bins are equal-width over ``[min, max]`` (or ``value_range``); the last
    bin is closed on both sides.  Passing a shared ``value_range`` lets a
    measured and a predicted series be compared bin for bin.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if int(bin_count) != bin_count or bin_count < 1:
        raise InvalidInputError("bin_count must be a positive integer")
    if x.size < 2:
        raise InvalidInputError("density estimation needs at least two samples")
    lo, hi = (float(x.min()), float(x.max())) if value_range is None else map(float, value_range)
    if not hi > lo:
        raise DegenerateRangeError("samples span a zero range")
    # a range too narrow for the bin width to be a normal float is as good as zero
    if not (hi - lo) / bin_count >= np.finfo(np.float64).tiny or not np.isfinite(hi - lo):
        raise DegenerateRangeError(f"range [{lo}, {hi}] is too narrow for {bin_count} bins")
    counts, edges = np.histogram(x, bins=int(bin_count), range=(lo, hi))
    density = counts / (counts.sum() * np.diff(edges))
    return DensityEstimate(edges, density, counts)


# --------------------------------------------------------------------------
# run comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonCell:
    kind: str
    hidden_neurons: int
    q: int
    ratio: float
    mean_rmse_pl_db: float | None
    mean_rmse_lsf_db: float | None
    n_runs: int
    n_failed: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "hidden_neurons": self.hidden_neurons,
            "q": self.q,
            "ratio": self.ratio,
            "mean_rmse_pl_db": self.mean_rmse_pl_db,
            "mean_rmse_lsf_db": self.mean_rmse_lsf_db,
            "n_runs": self.n_runs,
            "n_failed": self.n_failed,
        }


@dataclass(frozen=True)
class KindSummary:
    kind: str
    smallest_m: int
    largest_m: int
    rmse_at_smallest_m: float | None
    rmse_at_largest_m: float | None
    more_neurons_lower_rmse: bool | None
    smallest_ratio: float
    largest_ratio: float
    rmse_delta_over_ratio: float | None  # RMSE(smallest r) - RMSE(largest r)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ComparisonTable:
    cells: tuple
    summaries: tuple

    def to_dict(self) -> dict:
        return {
            "cells": [c.to_dict() for c in self.cells],
            "summaries": [s.to_dict() for s in self.summaries],
        }

    def cell(self, kind, hidden_neurons, q) -> ComparisonCell:
        for c in self.cells:
            if (c.kind, c.hidden_neurons, c.q) == (str(kind), hidden_neurons, q):
                return c
        raise KeyError((kind, hidden_neurons, q))

    def render(self, metric: str = "pl") -> str:
        """Plain-text RMSE grid: one block per kind, rows M, columns r."""
        attr = f"mean_rmse_{metric}_db"
        lines = []
        by_kind = defaultdict(list)
        for c in self.cells:
            by_kind[c.kind].append(c)
        for kind in sorted(by_kind):
            cells = by_kind[kind]
            qs = sorted({c.q for c in cells})
            ratios = {c.q: c.ratio for c in cells}
            lines.append(f"{kind}  RMSE of {metric.upper()} prediction (dB)")
            lines.append("   M  " + "".join(f"  r={100 * ratios[q]:5.1f}%" for q in qs))
            for m in sorted({c.hidden_neurons for c in cells}):
                row = f"{m:4d}  "
                for q in qs:
                    val = next((getattr(c, attr) for c in cells if c.hidden_neurons == m and c.q == q), None)
                    row += f"  {val:10.3f}" if val is not None else f"  {'-':>10}"
                lines.append(row)
            lines.append("")
        return "\n".join(lines)


def _mean_or_none(values):
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def compare_runs(runs, metric: str = "pl") -> ComparisonTable:
    """Average RMSE over seeds for every (kind, M, q) and summarize trends per kind."""
    runs = list(runs)
    if not runs:
        raise InvalidInputError("no runs to compare")
    groups = defaultdict(list)
    for run in runs:
        groups[(run.kind, run.hidden_neurons, run.q)].append(run)
    cells = []
    for (kind, m, q), members in sorted(groups.items()):
        ok = [r for r in members if r.error is None]
        cells.append(
            ComparisonCell(
                kind=kind,
                hidden_neurons=m,
                q=q,
                ratio=members[0].ratio,
                mean_rmse_pl_db=_mean_or_none([r.rmse_pl_db for r in ok]),
                mean_rmse_lsf_db=_mean_or_none([r.rmse_lsf_db for r in ok]),
                n_runs=len(members),
                n_failed=len(members) - len(ok),
            )
        )
    attr = f"mean_rmse_{metric}_db"
    summaries = []
    for kind in sorted({c.kind for c in cells}):
        kc = [c for c in cells if c.kind == kind]
        ms = sorted({c.hidden_neurons for c in kc})
        rs = sorted({c.ratio for c in kc})
        at_small_m = _mean_or_none([getattr(c, attr) for c in kc if c.hidden_neurons == ms[0]])
        at_large_m = _mean_or_none([getattr(c, attr) for c in kc if c.hidden_neurons == ms[-1]])
        at_small_r = _mean_or_none([getattr(c, attr) for c in kc if c.ratio == rs[0]])
        at_large_r = _mean_or_none([getattr(c, attr) for c in kc if c.ratio == rs[-1]])
        improves = None
        if len(ms) > 1 and at_small_m is not None and at_large_m is not None:
            improves = at_large_m < at_small_m
        delta = None
        if len(rs) > 1 and at_small_r is not None and at_large_r is not None:
            delta = at_small_r - at_large_r
        summaries.append(
            KindSummary(kind, ms[0], ms[-1], at_small_m, at_large_m, improves, rs[0], rs[-1], delta)
        )
    return ComparisonTable(tuple(cells), tuple(summaries))
