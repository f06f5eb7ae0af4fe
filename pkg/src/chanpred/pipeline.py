"""From sounder transfer functions to smoothed path loss and shadow fading."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import InvalidInputError, SingularFitError

SPEED_OF_LIGHT = 299_792_458.0
WINDOW_WAVELENGTHS = 40.0


@dataclass(frozen=True)
class TransferFunctionRecord:
    """Complex frequency response measured at one Tx-Rx separation."""

    distance_m: float
    response: np.ndarray

    def __post_init__(self):
        response = np.asarray(self.response, dtype=np.complex128).ravel()
        if response.size < 1:
            raise InvalidInputError("transfer function needs at least one tone")
        if not np.all(np.isfinite(response)):
            raise InvalidInputError("transfer function contains non-finite entries")
        object.__setattr__(self, "response", response)

    @property
    def n_f(self) -> int:
        return self.response.size


@dataclass(frozen=True)
class LinkBudget:
    p_t_dbm: float = 43.0
    g_tx_db: float = 0.0
    g_rx_db: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.p_t_dbm, self.g_tx_db, self.g_rx_db)):
            raise InvalidInputError("link budget terms must be finite")

    @property
    def eirp_plus_rx_gain_db(self) -> float:
        return self.p_t_dbm + self.g_tx_db + self.g_rx_db


@dataclass(frozen=True)
class ChannelTrace:
    """Path loss in dB sampled on an equally spaced distance grid."""

    distances_m: np.ndarray
    pl_db: np.ndarray
    carrier_hz: float = 460e6
    spacing_m: float | None = None

    def __post_init__(self):
        d = np.asarray(self.distances_m, dtype=np.float64).ravel()
        pl = np.asarray(self.pl_db, dtype=np.float64).ravel()
        if d.size != pl.size:
            raise InvalidInputError(
                f"distances and path loss differ in length ({d.size} != {pl.size})"
            )
        if d.size < 2:
            raise InvalidInputError("a trace needs at least two samples")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(pl))):
            raise InvalidInputError("trace contains non-finite values")
        steps = np.diff(d)
        if np.any(steps <= 0):
            raise InvalidInputError("distances must be strictly increasing")
        spacing = float(np.mean(steps)) if self.spacing_m is None else float(self.spacing_m)
        if not spacing > 0:
            raise InvalidInputError("spacing must be positive")
        if np.max(np.abs(steps - spacing)) > 1e-9 * spacing:
            raise InvalidInputError("distances are not equally spaced at spacing_m")
        object.__setattr__(self, "distances_m", d)
        object.__setattr__(self, "pl_db", pl)
        object.__setattr__(self, "spacing_m", spacing)
        object.__setattr__(self, "carrier_hz", float(self.carrier_hz))

    def __len__(self):
        return self.pl_db.size

    def with_pl(self, pl_db) -> "ChannelTrace":
        return ChannelTrace(self.distances_m, pl_db, self.carrier_hz, self.spacing_m)

    def subset(self, indices) -> tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(indices, dtype=np.int64)
        return self.distances_m[idx], self.pl_db[idx]


@dataclass(frozen=True)
class LogDistanceModel:
    """PL(d) = intercept_db + 10 * exponent * log10(d / reference_m)."""

    intercept_db: float
    exponent: float
    reference_m: float = 1.0

    def __post_init__(self):
        if not self.reference_m > 0:
            raise InvalidInputError("reference distance must be positive")

    def __call__(self, distances_m):
        d = np.asarray(distances_m, dtype=np.float64)
        return self.intercept_db + 10.0 * self.exponent * np.log10(d / self.reference_m)


@dataclass(frozen=True)
class LsfSeries:
    distances_m: np.ndarray
    x_sigma_db: np.ndarray

    def __post_init__(self):
        if np.shape(self.distances_m) != np.shape(self.x_sigma_db):
            raise InvalidInputError("LSF distances and values differ in length")


def received_power(rec: TransferFunctionRecord) -> float:
    """Mean of |H|^2 over all tones (linear units)."""
    h = rec.response
    if h.size == 0:
        raise InvalidInputError("empty response")
    return float(np.mean(h.real**2 + h.imag**2))


def received_power_dbm(rec: TransferFunctionRecord) -> float:
    p = received_power(rec)
    if not p > 0:
        raise InvalidInputError(f"zero received power at d={rec.distance_m} m")
    return 10.0 * math.log10(p)


def raw_path_loss(budget: LinkBudget, p_r_dbm: float) -> float:
    if not math.isfinite(p_r_dbm):
        raise InvalidInputError("received power must be finite")
    return budget.p_t_dbm + budget.g_tx_db + budget.g_rx_db - p_r_dbm


def trace_from_transfer_functions(
    records, budget: LinkBudget, carrier_hz: float = 460e6
) -> ChannelTrace:
    """Apply the per-position power average and link budget to every record."""
    records = list(records)
    d = np.array([r.distance_m for r in records], dtype=np.float64)
    pl = np.array([raw_path_loss(budget, received_power_dbm(r)) for r in records])
    return ChannelTrace(d, pl, carrier_hz)


def window_length(carrier_hz: float, spacing_m: float) -> int:
    """Samples in a 40-wavelength window, forced odd so it can be centered."""
    if not carrier_hz > 0:
        raise InvalidInputError("carrier frequency must be positive")
    if not spacing_m > 0:
        raise InvalidInputError("spacing must be positive")
    wavelength = SPEED_OF_LIGHT / carrier_hz
    w = max(1, int(round(WINDOW_WAVELENGTHS * wavelength / spacing_m)))
    if w % 2 == 0:
        w += 1
    return w


def sliding_window_average(trace: ChannelTrace) -> ChannelTrace:
    """Centered 40-wavelength running mean; windows shrink at the ends."""
    w = window_length(trace.carrier_hz, trace.spacing_m)
    if w > len(trace):
        raise InvalidInputError(
            f"window of {w} samples exceeds trace length {len(trace)}"
        )
    smoothed = kernels.window_mean(trace.pl_db, (w - 1) // 2)
    return trace.with_pl(smoothed)


def fit_log_distance(trace: ChannelTrace, reference_m: float = 1.0) -> LogDistanceModel:
    """Least-squares intercept and exponent of the log-distance model."""
    return fit_log_distance_points(trace.distances_m, trace.pl_db, reference_m)


def fit_log_distance_points(distances_m, pl_db, reference_m: float = 1.0) -> LogDistanceModel:
    d = np.asarray(distances_m, dtype=np.float64)
    pl = np.asarray(pl_db, dtype=np.float64)
    if d.size != pl.size or d.size < 2:
        raise InvalidInputError("need at least two (distance, PL) pairs of equal length")
    if np.any(d <= 0):
        raise InvalidInputError("distances must be positive for a log-distance fit")
    u = 10.0 * np.log10(d / reference_m)
    # centered closed form: the intercept absorbs the means exactly
    u_mean = u.mean()
    pl_mean = pl.mean()
    du = u - u_mean
    sxx = float(du @ du)
    if not sxx > 1e-12 * max(1.0, u_mean * u_mean) * u.size:
        raise SingularFitError("all distances are equal; exponent is undetermined")
    n = float(du @ (pl - pl_mean)) / sxx
    a = pl_mean - n * u_mean
    return LogDistanceModel(float(a), float(n), reference_m)


def extract_lsf(trace: ChannelTrace, model: LogDistanceModel) -> LsfSeries:
    return LsfSeries(trace.distances_m.copy(), trace.pl_db - model(trace.distances_m))
