"""Inner loops: per-sample back-propagation, windowed means, 1-D Lloyd iterations.

Each kernel exists twice. The ``*_loops`` form is written in plain scalar
Python so numba can compile it; the ``*_numpy`` form is the vectorized
fallback used when ``CHANPRED_DISABLE_NUMBA=1`` is set or numba is missing.
The public names (``bpn_train``, ``window_mean``, ``kmeans_lloyd``) are bound
once at import time.  Both forms follow the same update order, so they agree
to rounding.
"""

import numpy as np

from ._backend import USE_NUMBA, jit


# --------------------------------------------------------------------------
# back-propagation
# --------------------------------------------------------------------------


def _bpn_train_loops(x, t, w, v, eta, threshold, max_epochs):
    m = w.shape[0]
    n = x.shape[0]
    w = w.copy()
    v = v.copy()
    best_w = w.copy()
    best_v = v.copy()
    best = np.inf
    history = np.full(max_epochs + 1, np.nan)
    hidden = np.empty(m)
    epochs = 0
    for epoch in range(max_epochs + 1):
        loss = 0.0
        for i in range(n):
            s = 0.0
            for j in range(m):
                s += v[j] / (1.0 + np.exp(-w[j] * x[i]))
            y = 1.0 / (1.0 + np.exp(-s))
            loss += 0.5 * (t[i] - y) ** 2
        history[epoch] = loss
        if not np.isfinite(loss):
            break
        if loss < best:
            best = loss
            best_w[:] = w
            best_v[:] = v
        if loss < threshold or epoch == max_epochs:
            break
        for i in range(n):
            s = 0.0
            for j in range(m):
                hidden[j] = 1.0 / (1.0 + np.exp(-w[j] * x[i]))
                s += v[j] * hidden[j]
            y = 1.0 / (1.0 + np.exp(-s))
            delta = (y - t[i]) * y * (1.0 - y)
            for j in range(m):
                b = hidden[j]
                grad_w = delta * v[j] * b * (1.0 - b) * x[i]
                v[j] -= eta * delta * b
                w[j] -= eta * grad_w
        epochs = epoch + 1
    return best_w, best_v, best, epochs, history


def _bpn_train_numpy(x, t, w, v, eta, threshold, max_epochs):
    w = np.array(w, dtype=np.float64)
    v = np.array(v, dtype=np.float64)
    best_w = w.copy()
    best_v = v.copy()
    best = np.inf
    history = np.full(max_epochs + 1, np.nan)
    epochs = 0
    with np.errstate(over="ignore"):
        for epoch in range(max_epochs + 1):
            hidden = 1.0 / (1.0 + np.exp(-np.outer(x, w)))
            y = 1.0 / (1.0 + np.exp(-(hidden @ v)))
            loss = float(0.5 * np.sum((t - y) ** 2))
            history[epoch] = loss
            if not np.isfinite(loss):
                break
            if loss < best:
                best = loss
                best_w[:] = w
                best_v[:] = v
            if loss < threshold or epoch == max_epochs:
                break
            for xi, ti in zip(x, t):
                b = 1.0 / (1.0 + np.exp(-w * xi))
                y = 1.0 / (1.0 + np.exp(-(b @ v)))
                delta = (y - ti) * y * (1.0 - y)
                grad_w = delta * v * b * (1.0 - b) * xi
                v -= eta * delta * b
                w -= eta * grad_w
            epochs = epoch + 1
    return best_w, best_v, best, epochs, history


# --------------------------------------------------------------------------
# centered moving average with truncated edges
# --------------------------------------------------------------------------


def _window_mean_loops(values, half):
    n = values.shape[0]
    out = np.empty(n)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        acc = 0.0
        for k in range(lo, hi):
            acc += values[k]
        out[i] = acc / (hi - lo)
    return out


def _window_mean_numpy(values, half):
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    # centering keeps the running sum small, which bounds cancellation error
    offset = values.mean()
    csum = np.concatenate(([0.0], np.cumsum(values - offset)))
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo) + offset


# --------------------------------------------------------------------------
# Lloyd iterations on scalar data
# --------------------------------------------------------------------------


def _kmeans_lloyd_loops(points, centers, max_iter):
    n = points.shape[0]
    k = centers.shape[0]
    centers = centers.copy()
    labels = np.full(n, -1, dtype=np.int64)
    history = np.full(max_iter + 1, np.nan)
    sums = np.empty(k)
    counts = np.empty(k, dtype=np.int64)
    n_iter = 0
    reseeded = False
    for it in range(max_iter + 1):
        changed = reseeded
        reseeded = False
        distortion = 0.0
        for i in range(n):
            best_j = 0
            best_d = (points[i] - centers[0]) ** 2
            for j in range(1, k):
                d = (points[i] - centers[j]) ** 2
                if d < best_d:
                    best_d = d
                    best_j = j
            if labels[i] != best_j:
                labels[i] = best_j
                changed = True
            distortion += best_d
        history[it] = distortion
        if not changed or it == max_iter:
            break
        sums[:] = 0.0
        counts[:] = 0
        for i in range(n):
            sums[labels[i]] += points[i]
            counts[labels[i]] += 1
        for j in range(k):
            if counts[j] > 0:
                centers[j] = sums[j] / counts[j]
        for j in range(k):
            if counts[j] == 0:
                far_i = 0
                far_d = -1.0
                for i in range(n):
                    d = (points[i] - centers[labels[i]]) ** 2
                    if d > far_d:
                        far_d = d
                        far_i = i
                centers[j] = points[far_i]
                labels[far_i] = j
                reseeded = True
        n_iter = it + 1
    return centers, labels, n_iter, history


def _kmeans_lloyd_numpy(points, centers, max_iter):
    points = np.asarray(points, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64)
    n = points.size
    k = centers.size
    labels = np.full(n, -1, dtype=np.int64)
    history = np.full(max_iter + 1, np.nan)
    rows = np.arange(n)
    n_iter = 0
    reseeded = False
    for it in range(max_iter + 1):
        d2 = (points[:, None] - centers[None, :]) ** 2
        new_labels = np.argmin(d2, axis=1)  # first minimum -> lower index wins ties
        # a reseed moves a center without a label change, so always refit once more
        changed = reseeded or bool(np.any(new_labels != labels))
        reseeded = False
        labels = new_labels
        history[it] = d2[rows, labels].sum()
        if not changed or it == max_iter:
            break
        counts = np.bincount(labels, minlength=k)
        sums = np.bincount(labels, weights=points, minlength=k)
        filled = counts > 0
        centers[filled] = sums[filled] / counts[filled]
        for j in np.flatnonzero(~filled):
            far_i = int(np.argmax((points - centers[labels]) ** 2))
            centers[j] = points[far_i]
            labels[far_i] = j
            reseeded = True
        n_iter = it + 1
    return centers, labels, n_iter, history


_bpn_train_jit = jit(_bpn_train_loops)
_window_mean_jit = jit(_window_mean_loops)
_kmeans_lloyd_jit = jit(_kmeans_lloyd_loops)

if USE_NUMBA:
    bpn_train = _bpn_train_jit
    window_mean = _window_mean_jit
    kmeans_lloyd = _kmeans_lloyd_jit
else:
    bpn_train = _bpn_train_numpy
    window_mean = _window_mean_numpy
    kmeans_lloyd = _kmeans_lloyd_numpy
