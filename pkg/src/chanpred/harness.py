"""Equally spaced train/predict splits, single prediction runs, and sweeps."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import itertools
import json
import time

import numpy as np

from .errors import ChanpredError, DataFormatError, InvalidInputError
from .evaluation import rmse
from .networks import NetworkConfig, NetworkKind, NetworkModel, TrainingSet, predict, train
from .pipeline import ChannelTrace, LogDistanceModel, extract_lsf, fit_log_distance, fit_log_distance_points

RMSE_SCOPES = ("predicted_only", "all_points")
REPORT_FORMAT = "chanpred-sweep/1"


@dataclass(frozen=True)
class SplitSpec:
    q: int
    train_indices: np.ndarray
    predict_indices: np.ndarray

    @property
    def n(self) -> int:
        return self.train_indices.size + self.predict_indices.size

    @property
    def ratio(self) -> float:
        return self.train_indices.size / self.n


def split_equally_spaced(n: int, q: int) -> SplitSpec:
    """Train on every (q+1)-th index from 0, always including the last index."""
    if int(n) != n or n < 2:
        raise InvalidInputError("need at least two samples to split")
    if int(q) != q or q < 0:
        raise InvalidInputError("q must be a non-negative integer")
    if q >= n:
        raise InvalidInputError(f"q={q} leaves no room for training points in n={n}")
    train_idx = np.arange(0, n, q + 1, dtype=np.int64)
    if train_idx[-1] != n - 1:
        train_idx = np.append(train_idx, n - 1)
    mask = np.ones(n, dtype=bool)
    mask[train_idx] = False
    return SplitSpec(int(q), train_idx, np.flatnonzero(mask).astype(np.int64))


@dataclass(frozen=True, eq=False)
class PredictionRun:
    config: NetworkConfig
    q: int
    trace_id: str
    split: SplitSpec | None = None
    predicted_pl_db: np.ndarray | None = None
    predicted_lsf_db: np.ndarray | None = None
    fitted_pl_db: np.ndarray | None = None
    rmse_pl_db: float | None = None
    rmse_lsf_db: float | None = None
    rmse_scope: str = "predicted_only"
    train_seconds: float = 0.0
    model: NetworkModel | None = field(default=None, repr=False)
    train_fit: LogDistanceModel | None = None
    error: str | None = None

    @property
    def kind(self) -> str:
        return self.config.kind.value

    @property
    def hidden_neurons(self) -> int:
        return self.config.hidden_neurons

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def ratio(self) -> float:
        return self.split.ratio if self.split is not None else float("nan")

    def sort_key(self):
        return (self.kind, self.hidden_neurons, self.q, self.seed)

    def summary(self) -> dict:
        """Report entry.  Wall-clock time is kept out so reports are reproducible."""
        return {
            "trace_id": self.trace_id,
            "kind": self.kind,
            "hidden_neurons": self.hidden_neurons,
            "q": self.q,
            "ratio": self.ratio,
            "seed": self.seed,
            "rmse_scope": self.rmse_scope,
            "rmse_pl_db": self.rmse_pl_db,
            "rmse_lsf_db": self.rmse_lsf_db,
            "n_train": None if self.split is None else int(self.split.train_indices.size),
            "n_predicted": None if self.split is None else int(self.split.predict_indices.size),
            "config": self.config.to_dict(),
            "error": self.error,
        }

    def reconstructed_pl_db(self, trace: ChannelTrace) -> np.ndarray:
        """Measured values at training indices, predictions everywhere else."""
        out = trace.pl_db.copy()
        out[self.split.predict_indices] = self.predicted_pl_db
        return out


def run_prediction(
    trace: ChannelTrace,
    q: int,
    cfg: NetworkConfig,
    trace_id: str = "trace",
    rmse_scope: str = "predicted_only",
) -> PredictionRun:
    """Train on the equally spaced subset and predict the withheld points.

    Everything fitted here (network, normalizer, log-distance baseline)
    sees only the training indices.  The measured LSF used as the
    reference is the trace's own LSF, extracted with a fit over all points.
    """
    if rmse_scope not in RMSE_SCOPES:
        raise InvalidInputError(f"rmse_scope must be one of {RMSE_SCOPES}")
    split = split_equally_spaced(len(trace), q)
    if split.predict_indices.size == 0:
        return PredictionRun(cfg, int(q), trace_id, split=split, rmse_scope=rmse_scope,
                             predicted_pl_db=np.empty(0), predicted_lsf_db=np.empty(0))
    d_train, pl_train = trace.subset(split.train_indices)
    d_pred = trace.distances_m[split.predict_indices]

    start = time.perf_counter()
    model = train(TrainingSet(d_train, pl_train), cfg)
    elapsed = time.perf_counter() - start

    pred_pl = predict(model, d_pred)
    fitted_pl = predict(model, d_train)
    baseline = fit_log_distance_points(d_train, pl_train)
    pred_lsf = pred_pl - baseline(d_pred)
    measured_lsf = extract_lsf(trace, fit_log_distance(trace)).x_sigma_db

    if rmse_scope == "predicted_only":
        idx = split.predict_indices
        r_pl = rmse(trace.pl_db[idx], pred_pl)
        r_lsf = rmse(measured_lsf[idx], pred_lsf)
    else:
        output = np.empty(len(trace))
        output[split.train_indices] = fitted_pl
        output[split.predict_indices] = pred_pl
        r_pl = rmse(trace.pl_db, output)
        r_lsf = rmse(measured_lsf, output - baseline(trace.distances_m))

    return PredictionRun(
        config=cfg,
        q=int(q),
        trace_id=trace_id,
        split=split,
        predicted_pl_db=pred_pl,
        predicted_lsf_db=pred_lsf,
        fitted_pl_db=fitted_pl,
        rmse_pl_db=r_pl,
        rmse_lsf_db=r_lsf,
        rmse_scope=rmse_scope,
        train_seconds=elapsed,
        model=model,
        train_fit=baseline,
    )


@dataclass(frozen=True)
class SweepGrid:
    kinds: tuple
    neuron_counts: tuple
    q_values: tuple
    seeds: tuple = (0,)
    learning_rate: float = 1e-6
    error_threshold: float = 1e-5
    max_iterations: int = 1000

    def __post_init__(self):
        kinds = tuple(sorted({NetworkKind.parse(k) for k in self.kinds}, key=lambda k: k.value))
        object.__setattr__(self, "kinds", kinds)
        for name in ("neuron_counts", "q_values", "seeds"):
            vals = tuple(sorted({int(v) for v in getattr(self, name)}))
            object.__setattr__(self, name, vals)
        if not (kinds and self.neuron_counts and self.q_values and self.seeds):
            raise InvalidInputError("every sweep axis needs at least one value")
        if min(self.neuron_counts) < 1 or min(self.q_values) < 1 or min(self.seeds) < 0:
            raise InvalidInputError("neurons and q must be >= 1, seeds >= 0")

    def configs(self):
        for kind, m, q, seed in itertools.product(self.kinds, self.neuron_counts, self.q_values, self.seeds):
            cfg = NetworkConfig(kind, m, self.learning_rate, self.error_threshold, self.max_iterations, seed)
            yield cfg, q

    def to_dict(self) -> dict:
        return {
            "kinds": [k.value for k in self.kinds],
            "neuron_counts": list(self.neuron_counts),
            "q_values": list(self.q_values),
            "seeds": list(self.seeds),
            "learning_rate": self.learning_rate,
            "error_threshold": self.error_threshold,
            "max_iterations": self.max_iterations,
        }


def _run_guarded(trace, q, cfg, trace_id, rmse_scope):
    try:
        return run_prediction(trace, q, cfg, trace_id, rmse_scope)
    except ChanpredError as exc:
        split = None
        try:
            split = split_equally_spaced(len(trace), q)
        except ChanpredError:
            pass
        return PredictionRun(cfg, int(q), trace_id, split=split, rmse_scope=rmse_scope,
                             error=f"{type(exc).__name__}: {exc}")


def sweep(
    trace: ChannelTrace,
    grid: SweepGrid,
    trace_id: str = "trace",
    rmse_scope: str = "predicted_only",
    jobs: int = 1,
) -> list[PredictionRun]:
    """One run per (kind, M, q, seed), sorted by that tuple.

    Failed runs are kept with their ``error`` set.  With ``jobs > 1`` the
    runs execute in worker processes; the result does not depend on it.
    """
    tasks = list(grid.configs())
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_guarded, trace, q, cfg, trace_id, rmse_scope) for cfg, q in tasks]
            runs = [f.result() for f in futures]
    else:
        runs = [_run_guarded(trace, q, cfg, trace_id, rmse_scope) for cfg, q in tasks]
    return sorted(runs, key=PredictionRun.sort_key)


def sweep_report(runs, grid: SweepGrid | None = None, trace_id: str | None = None) -> str:
    """Canonical JSON for a list of runs: sorted keys, sorted runs."""
    runs = sorted(runs, key=PredictionRun.sort_key)
    doc = {
        "format": REPORT_FORMAT,
        "trace_id": trace_id if trace_id is not None else (runs[0].trace_id if runs else None),
        "grid": None if grid is None else grid.to_dict(),
        "runs": [r.summary() for r in runs],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class RunRecord:
    """A report entry read back from disk; enough for ``compare_runs``."""

    kind: str
    hidden_neurons: int
    q: int
    ratio: float
    seed: int
    rmse_pl_db: float | None
    rmse_lsf_db: float | None
    error: str | None = None


def load_report(text: str) -> tuple[dict, list[RunRecord]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"sweep report is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
        raise DataFormatError(f"not a {REPORT_FORMAT} document")
    try:
        records = [
            RunRecord(
                kind=r["kind"],
                hidden_neurons=int(r["hidden_neurons"]),
                q=int(r["q"]),
                ratio=float(r["ratio"]),
                seed=int(r["seed"]),
                rmse_pl_db=r["rmse_pl_db"],
                rmse_lsf_db=r["rmse_lsf_db"],
                error=r.get("error"),
            )
            for r in doc["runs"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed run entry: {exc}") from None
    return doc, records
