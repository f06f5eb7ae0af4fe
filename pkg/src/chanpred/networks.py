"""Single-hidden-layer regressors mapping distance to path loss.

All three network kinds share one forward pass::

    y = F_o( sum_j v_j * F_n(a_j) )

evaluated in a normalized space where distances and path loss are mapped
linearly onto ``[0.1, 0.9]``.  What differs is the hidden activation and
how the weights are obtained:

========  ==============================  ==========  =========================
kind      hidden pre-activation a_j       F_o         training
========  ==============================  ==========  =========================
BPN       w_j * x          (logistic)     logistic    per-sample gradient descent
ELM       w_j * x + b_j    (logistic)     identity    one ridge least-squares solve
RBF       (w_j x - c_j)^2 / (2 s_j^2)     identity    k-means centers + ridge solve
          with F_n = exp(-a), w_j = 1
========  ==============================  ==========  =========================
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
import enum
import json
import math

import numpy as np

from . import kernels
from .errors import (
    DataFormatError,
    InvalidInputError,
    ModelStateError,
    NumericError,
    TrainingDivergedError,
)

RIDGE_LAMBDA = 1e-8
KMEANS_MAX_ITER = 100
BPN_INIT_RANGE = 0.5
# ELM hidden-unit steepness, in units of 1 / (local spacing of the unit anchors)
ELM_STEEPNESS = 2.0
ELM_BIAS_SATURATION = 20.0

MODEL_FORMAT = "chanpred-model/1"


class NetworkKind(str, enum.Enum):
    BPN = "BPN"
    ELM = "ELM"
    RBF = "RBF"

    @classmethod
    def parse(cls, value) -> "NetworkKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise InvalidInputError(f"unknown network kind {value!r}") from None


@dataclass(frozen=True)
class NetworkConfig:
    kind: NetworkKind
    hidden_neurons: int
    learning_rate: float = 1e-6
    error_threshold: float = 1e-5
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NetworkKind.parse(self.kind))
        if int(self.hidden_neurons) != self.hidden_neurons or self.hidden_neurons < 1:
            raise InvalidInputError("hidden_neurons must be a positive integer")
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if not self.error_threshold > 0:
            raise InvalidInputError("error_threshold must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidInputError("seed must be a non-negative integer")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "hidden_neurons": int(self.hidden_neurons),
            "learning_rate": float(self.learning_rate),
            "error_threshold": float(self.error_threshold),
            "max_iterations": int(self.max_iterations),
            "seed": int(self.seed),
        }


@dataclass(frozen=True)
class Normalizer:
    """Affine maps between physical units and the ``[target_lo, target_hi]`` band."""

    in_min: float
    in_max: float
    out_min: float
    out_max: float
    target_lo: float = 0.1
    target_hi: float = 0.9

    def __post_init__(self):
        if not self.in_max > self.in_min:
            raise InvalidInputError("normalizer needs in_max > in_min")
        if not self.out_max > self.out_min:
            raise InvalidInputError("normalizer needs out_max > out_min")
        if not 0.0 <= self.target_lo < self.target_hi <= 1.0:
            raise InvalidInputError("normalized band must satisfy 0 <= lo < hi <= 1")

    @classmethod
    def fit(cls, inputs, targets, target_lo=0.1, target_hi=0.9) -> "Normalizer":
        """Span the observed ranges; a zero range is widened to one unit."""
        in_lo, in_hi = _span(inputs)
        out_lo, out_hi = _span(targets)
        return cls(in_lo, in_hi, out_lo, out_hi, target_lo, target_hi)

    @property
    def band(self) -> float:
        return self.target_hi - self.target_lo

    def normalize_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.target_lo + (x - self.in_min) * (self.band / (self.in_max - self.in_min))

    def denormalize_input(self, u):
        u = np.asarray(u, dtype=np.float64)
        return self.in_min + (u - self.target_lo) * ((self.in_max - self.in_min) / self.band)

    def normalize_output(self, y):
        y = np.asarray(y, dtype=np.float64)
        return self.target_lo + (y - self.out_min) * (self.band / (self.out_max - self.out_min))

    def denormalize_output(self, u):
        u = np.asarray(u, dtype=np.float64)
        return self.out_min + (u - self.target_lo) * ((self.out_max - self.out_min) / self.band)


def _span(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InvalidInputError("cannot normalize an empty series")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


@dataclass(frozen=True)
class TrainingSet:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=np.float64).ravel()
        t = np.asarray(self.targets, dtype=np.float64).ravel()
        if x.size == 0 or x.size != t.size:
            raise InvalidInputError("training inputs and targets must be nonempty and equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
            raise InvalidInputError("training data contains non-finite values")
        if np.any(np.diff(x) <= 0):
            raise InvalidInputError("training inputs must be strictly increasing")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", t)

    def __len__(self):
        return self.inputs.size


@dataclass(frozen=True, eq=False)
class NetworkModel:
    kind: NetworkKind
    input_weights: np.ndarray
    output_weights: np.ndarray
    norm: Normalizer | None
    hidden_biases: np.ndarray | None = None
    centers: np.ndarray | None = None
    widths: np.ndarray | None = None
    epochs: int = 0
    train_loss: float = float("nan")
    loss_history: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", NetworkKind.parse(self.kind))
        w = _as_vec(self.input_weights)
        v = _as_vec(self.output_weights)
        m = w.size
        if m < 1 or v.size != m:
            raise InvalidInputError("input and output weights must both have length M >= 1")
        object.__setattr__(self, "input_weights", w)
        object.__setattr__(self, "output_weights", v)
        bias = np.zeros(m) if self.hidden_biases is None else _as_vec(self.hidden_biases)
        if bias.size != m:
            raise InvalidInputError("hidden_biases must have length M")
        object.__setattr__(self, "hidden_biases", bias)
        if self.kind is NetworkKind.RBF:
            c, s = _as_vec(self.centers), _as_vec(self.widths)
            if c.size != m or s.size != m:
                raise InvalidInputError("RBF centers and widths must have length M")
            if np.any(s <= 0):
                raise InvalidInputError("RBF widths must be strictly positive")
            if np.any(w != 1.0):
                raise InvalidInputError("RBF input weights are fixed to 1")
            object.__setattr__(self, "centers", c)
            object.__setattr__(self, "widths", s)
        if self.loss_history is not None:
            object.__setattr__(self, "loss_history", _as_vec(self.loss_history))

    @property
    def hidden_neurons(self) -> int:
        return self.input_weights.size

    def to_dict(self) -> dict:
        if self.norm is None:
            raise ModelStateError("cannot serialize an untrained model")
        out = {
            "format": MODEL_FORMAT,
            "kind": self.kind.value,
            "hidden_neurons": self.hidden_neurons,
            "input_weights": self.input_weights.tolist(),
            "output_weights": self.output_weights.tolist(),
            "hidden_biases": self.hidden_biases.tolist(),
            "centers": None if self.centers is None else self.centers.tolist(),
            "widths": None if self.widths is None else self.widths.tolist(),
            "normalizer": {f.name: getattr(self.norm, f.name) for f in fields(Normalizer)},
            "epochs": int(self.epochs),
            "train_loss": _finite_or_none(self.train_loss),
        }
        return out

    def __eq__(self, other):
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return self.dumps() == other.dumps()

    __hash__ = None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def loads(cls, text: str) -> "NetworkModel":
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"model record is not valid JSON: {exc}") from None
        return cls.from_dict(rec)

    @classmethod
    def from_dict(cls, rec: dict) -> "NetworkModel":
        if not isinstance(rec, dict) or rec.get("format") != MODEL_FORMAT:
            raise DataFormatError(f"not a {MODEL_FORMAT} record")
        try:
            model = cls(
                kind=rec["kind"],
                input_weights=rec["input_weights"],
                output_weights=rec["output_weights"],
                hidden_biases=rec["hidden_biases"],
                centers=rec["centers"],
                widths=rec["widths"],
                norm=Normalizer(**rec["normalizer"]),
                epochs=rec["epochs"],
                train_loss=float("nan") if rec["train_loss"] is None else rec["train_loss"],
            )
        except (KeyError, TypeError) as exc:
            raise DataFormatError(f"incomplete model record: {exc}") from None
        if model.hidden_neurons != rec["hidden_neurons"]:
            raise DataFormatError("hidden_neurons disagrees with weight lengths")
        return model


def _as_vec(values):
    if values is None:
        raise InvalidInputError("missing weight sequence")
    return np.array(values, dtype=np.float64).ravel()


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def logistic(z):
    z = np.asarray(z, dtype=np.float64)
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


# --------------------------------------------------------------------------
# forward pass
# --------------------------------------------------------------------------


def hidden_response(model: NetworkModel, x_norm):
    """Hidden-layer outputs for normalized inputs, shape (N, M)."""
    x = np.atleast_1d(np.asarray(x_norm, dtype=np.float64))
    pre = np.outer(x, model.input_weights)
    if model.kind is NetworkKind.RBF:
        a = (pre - model.centers) ** 2 / (2.0 * model.widths**2)
        return np.exp(-a)
    return logistic(pre + model.hidden_biases)


def forward_normalized(model: NetworkModel, x_norm):
    s = hidden_response(model, x_norm) @ model.output_weights
    if model.kind is NetworkKind.BPN:
        return logistic(s)
    return s


def predict(model: NetworkModel, distances_m) -> np.ndarray:
    """Predicted path loss (dB) at each distance."""
    if model.norm is None:
        raise ModelStateError("model has not been trained")
    x = model.norm.normalize_input(distances_m)
    return model.norm.denormalize_output(forward_normalized(model, x))


def forward(model: NetworkModel, distance_m: float) -> float:
    return float(predict(model, [distance_m])[0])


# --------------------------------------------------------------------------
# back-propagation network
# --------------------------------------------------------------------------


def bpn_initial_weights(m: int, seed: int):
    rng = np.random.default_rng(seed)
    w = rng.uniform(-BPN_INIT_RANGE, BPN_INIT_RANGE, m)
    v = rng.uniform(-BPN_INIT_RANGE, BPN_INIT_RANGE, m)
    return w, v


def bpn_loss_and_gradient(w, v, x_norm, t_norm):
    """Half sum of squared errors and its gradient with respect to (w, v).

    Returns ``(E, dE/dw, dE/dv)`` in normalized units.  Training applies the
    per-sample terms of this sum one sample at a time.
    """
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    x = np.asarray(x_norm, dtype=np.float64)
    t = np.asarray(t_norm, dtype=np.float64)
    b = logistic(np.outer(x, w))
    y = logistic(b @ v)
    err = y - t
    delta = err * y * (1.0 - y)
    grad_v = b.T @ delta
    grad_w = ((b * (1.0 - b)) * v).T @ (delta * x)
    return 0.5 * float(err @ err), grad_w, grad_v


def train_bpn(data: TrainingSet, cfg: NetworkConfig, normalizer: Normalizer | None = None) -> NetworkModel:
    if cfg.kind is not NetworkKind.BPN:
        raise InvalidInputError(f"train_bpn given a {cfg.kind.value} config")
    if len(data) < 2:
        raise InvalidInputError("back-propagation needs at least two training samples")
    norm = normalizer or Normalizer.fit(data.inputs, data.targets)
    x = norm.normalize_input(data.inputs)
    t = norm.normalize_output(data.targets)
    w0, v0 = bpn_initial_weights(cfg.hidden_neurons, cfg.seed)
    w, v, loss, epochs, history = kernels.bpn_train(
        x, t, w0, v0, float(cfg.learning_rate), float(cfg.error_threshold), int(cfg.max_iterations)
    )
    recorded = history[: epochs + 1]
    if not np.all(np.isfinite(recorded)):
        raise TrainingDivergedError(f"loss became non-finite after {epochs} epochs")
    return NetworkModel(
        kind=NetworkKind.BPN,
        input_weights=w,
        output_weights=v,
        norm=norm,
        epochs=int(epochs),
        train_loss=float(loss),
        loss_history=recorded,
    )


# --------------------------------------------------------------------------
# linear output solve shared by ELM and RBF
# --------------------------------------------------------------------------


def ridge_solve(g, t, lam=RIDGE_LAMBDA):
    """Solve (G^T G + lam I) v = G^T t."""
    g = np.asarray(g, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    gram = g.T @ g
    gram[np.diag_indices_from(gram)] += lam
    rhs = g.T @ t
    try:
        v = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"output-weight solve failed: {exc}") from None
    if not np.all(np.isfinite(v)):
        raise NumericError("output-weight solve produced non-finite weights")
    return v


# --------------------------------------------------------------------------
# extreme learning machine
# --------------------------------------------------------------------------


def _elm_anchors(x):
    """Midpoints between consecutive inputs, plus one half-gap left of the first."""
    if x.size == 1:
        return x - 0.5
    return np.concatenate(([x[0] - 0.5 * (x[1] - x[0])], 0.5 * (x[1:] + x[:-1])))


def elm_hidden_layer(x_norm, m: int, seed: int):
    """Random hidden weights and biases for an ELM on sorted normalized inputs.

    Each unit is a logistic step whose transition sits at an anchor between
    neighbouring inputs.  The anchors are split into ``m`` equal strata and
    one anchor is drawn at random from each, so with ``m == len(x)`` every
    gap gets exactly one unit.  The step steepness is random in
    ``[1, 2] * ELM_STEEPNESS / h_j``, with ``h_j`` the gap to the nearest
    other anchor, so the units stay distinguishable at any density.

    Unit 0 is replaced by a step one full input span left of the data and
    steep enough to be saturated (within ~2e-9 of 1) over it, which gives the
    layer a near-constant column.
    """
    x = np.asarray(x_norm, dtype=np.float64)
    rng = np.random.default_rng(seed)
    anchors = _elm_anchors(x)
    jitter = rng.random(m)
    pick = np.floor((np.arange(m) + jitter) * (anchors.size / m)).astype(np.int64)
    centers = anchors[np.minimum(pick, anchors.size - 1)]
    if m == 1:
        spacing = np.array([max(float(x[-1] - x[0]), 0.5)])
    else:
        gaps = np.diff(centers)
        gaps = np.where(gaps > 0, gaps, np.inf)
        spacing = np.minimum(np.concatenate(([np.inf], gaps)), np.concatenate((gaps, [np.inf])))
        fallback = (x[-1] - x[0]) / max(m, 1) if x[-1] > x[0] else 0.5
        spacing = np.where(np.isfinite(spacing), spacing, fallback)
    u = rng.uniform(1.0, 2.0, m)
    w = u * ELM_STEEPNESS / spacing
    span = float(x[-1] - x[0]) if x[-1] > x[0] else 0.5
    centers[0] = x[0] - span
    w[0] = u[0] * ELM_BIAS_SATURATION / span
    b = -w * centers
    return w, b


def train_elm(data: TrainingSet, cfg: NetworkConfig, normalizer: Normalizer | None = None) -> NetworkModel:
    if cfg.kind is not NetworkKind.ELM:
        raise InvalidInputError(f"train_elm given a {cfg.kind.value} config")
    norm = normalizer or Normalizer.fit(data.inputs, data.targets)
    x = norm.normalize_input(data.inputs)
    t = norm.normalize_output(data.targets)
    w, b = elm_hidden_layer(x, cfg.hidden_neurons, cfg.seed)
    g = logistic(np.outer(x, w) + b)
    v = ridge_solve(g, t)
    resid = g @ v - t
    return NetworkModel(
        kind=NetworkKind.ELM,
        input_weights=w,
        output_weights=v,
        hidden_biases=b,
        norm=norm,
        train_loss=0.5 * float(resid @ resid),
    )


# --------------------------------------------------------------------------
# k-means and the RBF network
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    iterations: int
    distortion_history: np.ndarray

    @property
    def distortion(self) -> float:
        return float(self.distortion_history[-1])


def kmeans(points, k: int, seed: int = 0, init=None, max_iter: int = KMEANS_MAX_ITER) -> KMeansResult:
    """Lloyd's algorithm on scalar data.

    Starts from ``k`` distinct data values drawn uniformly with ``seed``
    (or from ``init`` when given) and iterates until no assignment changes,
    at most ``max_iter`` update steps.  Ties go to the lower center index;
    a cluster that empties is re-seeded at the point farthest from its
    assigned center.
    """
    x = np.asarray(points, dtype=np.float64).ravel()
    if int(k) != k or k < 1:
        raise InvalidInputError("k must be a positive integer")
    distinct = np.unique(x)
    if k > distinct.size:
        raise InvalidInputError(f"k={k} exceeds the {distinct.size} distinct points")
    if init is None:
        rng = np.random.default_rng(seed)
        start = rng.choice(distinct, size=k, replace=False)
    else:
        start = np.asarray(init, dtype=np.float64).ravel()
        if start.size != k:
            raise InvalidInputError("init must hold exactly k centers")
    centers, labels, n_iter, history = kernels.kmeans_lloyd(x, start.copy(), int(max_iter))
    recorded = history[np.isfinite(history)]
    return KMeansResult(np.asarray(centers), np.asarray(labels), int(n_iter), recorded)


def rbf_width(centers) -> float:
    """Common Gaussian width c_max / sqrt(2M)."""
    c = np.asarray(centers, dtype=np.float64)
    m = c.size
    c_max = float(c.max() - c.min()) if m else 0.0
    if c_max > 0:
        return c_max / math.sqrt(2.0 * m)
    if m > 1:
        gaps = np.diff(np.sort(c))
        gaps = gaps[gaps > 0]
        if gaps.size:
            return 0.5 * float(gaps.mean())
    # a single center has no spacing to borrow: use half the normalized band
    return 0.4


def train_rbf(data: TrainingSet, cfg: NetworkConfig, normalizer: Normalizer | None = None) -> NetworkModel:
    if cfg.kind is not NetworkKind.RBF:
        raise InvalidInputError(f"train_rbf given a {cfg.kind.value} config")
    norm = normalizer or Normalizer.fit(data.inputs, data.targets)
    x = norm.normalize_input(data.inputs)
    t = norm.normalize_output(data.targets)
    m = cfg.hidden_neurons
    km = kmeans(x, m, seed=cfg.seed)
    centers = np.sort(km.centers)
    width = rbf_width(centers)
    widths = np.full(m, width)
    g = np.exp(-((x[:, None] - centers[None, :]) ** 2) / (2.0 * width**2))
    v = ridge_solve(g, t)
    resid = g @ v - t
    return NetworkModel(
        kind=NetworkKind.RBF,
        input_weights=np.ones(m),
        output_weights=v,
        centers=centers,
        widths=widths,
        norm=norm,
        epochs=km.iterations,
        train_loss=0.5 * float(resid @ resid),
    )


_TRAINERS = {
    NetworkKind.BPN: train_bpn,
    NetworkKind.ELM: train_elm,
    NetworkKind.RBF: train_rbf,
}


def train(data: TrainingSet, cfg: NetworkConfig, normalizer: Normalizer | None = None) -> NetworkModel:
    return _TRAINERS[cfg.kind](data, cfg, normalizer)


def untrained(model: NetworkModel) -> NetworkModel:
    return replace(model, norm=None)
