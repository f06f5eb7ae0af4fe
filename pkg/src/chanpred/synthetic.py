"""Measurement-like synthetic traces for desk-scale experiments.

The defaults (A=30 dB, n=3.5, sigma=4 dB, 100 m decorrelation) are
plausible sub-GHz railway values chosen for this toolkit.  They are not
measured values and every output that records them labels them synthetic.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
import math

import numpy as np

from .errors import InvalidInputError
from .pipeline import ChannelTrace, LinkBudget, TransferFunctionRecord


@dataclass(frozen=True)
class SyntheticParams:
    n_points: int = 3000
    spacing_m: float = 1.42
    start_m: float = 50.0
    carrier_hz: float = 460e6
    intercept_db: float = 30.0
    exponent: float = 3.5
    shadow_sigma_db: float = 4.0
    decorrelation_m: float = 100.0
    ssf_enabled: bool = True
    n_f: int = 1024
    link: LinkBudget = field(default_factory=LinkBudget)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.link, dict):
            object.__setattr__(self, "link", LinkBudget(**self.link))
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidInputError("n_points must be an integer >= 2")
        if not self.spacing_m > 0:
            raise InvalidInputError("spacing_m must be positive")
        if not self.start_m > 0:
            raise InvalidInputError("start_m must be positive")
        if not self.carrier_hz > 0:
            raise InvalidInputError("carrier_hz must be positive")
        if not self.shadow_sigma_db >= 0:
            raise InvalidInputError("shadow_sigma_db must be non-negative")
        if not self.decorrelation_m > 0:
            raise InvalidInputError("decorrelation_m must be positive")
        if int(self.n_f) != self.n_f or self.n_f < 1:
            raise InvalidInputError("n_f must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidInputError("seed must be a non-negative integer")
        if not all(math.isfinite(x) for x in (self.intercept_db, self.exponent)):
            raise InvalidInputError("model parameters must be finite")

    def distances(self) -> np.ndarray:
        return self.start_m + self.spacing_m * np.arange(self.n_points)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["synthetic_defaults"] = True
        return out


def shadowing(n: int, sigma_db: float, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) sequence with marginal std ``sigma_db`` and lag-1 correlation ``rho``."""
    eps = rng.standard_normal(n)
    s = np.empty(n)
    s[0] = sigma_db * eps[0]
    innov = sigma_db * math.sqrt(max(0.0, 1.0 - rho * rho))
    for i in range(1, n):
        s[i] = rho * s[i - 1] + innov * eps[i]
    return s


def generate_trace(p: SyntheticParams) -> ChannelTrace:
    """Log-distance path loss plus exponentially correlated Gaussian shadowing."""
    d = p.distances()
    rng = np.random.default_rng(p.seed)
    rho = math.exp(-p.spacing_m / p.decorrelation_m)
    pl = p.intercept_db + 10.0 * p.exponent * np.log10(d) + shadowing(d.size, p.shadow_sigma_db, rho, rng)
    return ChannelTrace(d, pl, p.carrier_hz, p.spacing_m)


def generate_transfer_functions(trace: ChannelTrace, p: SyntheticParams) -> list[TransferFunctionRecord]:
    """Per-position tone responses whose mean power matches the trace's path loss.

    With ``ssf_enabled`` every tone is an independent complex Gaussian
    (Rayleigh magnitude, unit-mean exponential power); otherwise every tone
    has exactly the deterministic amplitude and a random phase.  Position
    ``i`` draws from its own substream ``(seed, i)``.
    """
    power_dbm = p.link.eirp_plus_rx_gain_db - trace.pl_db
    amplitude = np.sqrt(10.0 ** (power_dbm / 10.0))
    records = []
    for i, (d, a) in enumerate(zip(trace.distances_m, amplitude)):
        rng = np.random.default_rng([p.seed, i])
        if p.ssf_enabled:
            h = rng.standard_normal(p.n_f) + 1j * rng.standard_normal(p.n_f)
            h *= a / math.sqrt(2.0)
        else:
            h = a * np.exp(2j * np.pi * rng.random(p.n_f))
        records.append(TransferFunctionRecord(float(d), h))
    return records
