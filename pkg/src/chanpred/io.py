"""Readers and writers for trace, transfer-function, density and model files.

Trace files are CSV with the header ``distance_m,pl_db`` (prediction
outputs add a ``source`` column holding ``measured`` or ``predicted``).
Transfer functions are either text (``.csv``/``.txt``: header
``distance_m,n_f``, then per row the distance, the tone count and ``2*n_f``
interleaved real/imaginary parts) or binary ``.npz`` with arrays
``distance_m`` and ``response``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InvalidInputError
from .networks import NetworkModel
from .pipeline import ChannelTrace, TransferFunctionRecord

TRACE_HEADER = ("distance_m", "pl_db")
TF_HEADER = ("distance_m", "n_f")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace(path, trace_or_distances, pl_db=None, source=None) -> None:
    if isinstance(trace_or_distances, ChannelTrace):
        d, pl = trace_or_distances.distances_m, trace_or_distances.pl_db
    else:
        d, pl = np.asarray(trace_or_distances), np.asarray(pl_db)
    header = TRACE_HEADER + (("source",) if source is not None else ())
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(d)):
            row = [_fmt(d[i]), _fmt(pl[i])]
            if source is not None:
                row.append(str(source[i]))
            fh.write(",".join(row) + "\n")


def read_trace(path, carrier_hz: float = 460e6) -> ChannelTrace:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header[:2]) != TRACE_HEADER:
                raise DataFormatError(f"{path}: expected header 'distance_m,pl_db'")
            d, pl = [], []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    d.append(float(row[0]))
                    pl.append(float(row[1]))
                except (IndexError, ValueError):
                    raise DataFormatError(f"{path}:{lineno}: malformed row {row!r}") from None
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    try:
        return ChannelTrace(np.array(d), np.array(pl), carrier_hz)
    except InvalidInputError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_transfer_functions(path, records) -> None:
    path = Path(path)
    records = list(records)
    if path.suffix == ".npz":
        n_f = {r.n_f for r in records}
        if len(n_f) != 1:
            raise InvalidInputError("binary format needs a common tone count")
        np.savez(
            path,
            distance_m=np.array([r.distance_m for r in records]),
            response=np.stack([r.response for r in records]),
        )
        return
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TF_HEADER) + "\n")
        for r in records:
            inter = np.empty(2 * r.n_f)
            inter[0::2] = r.response.real
            inter[1::2] = r.response.imag
            fh.write(",".join([_fmt(r.distance_m), str(r.n_f)] + [_fmt(x) for x in inter]) + "\n")


def read_transfer_functions(path) -> list[TransferFunctionRecord]:
    """Load records, rejecting files whose tone count varies between rows."""
    path = Path(path)
    if path.suffix == ".npz":
        try:
            with np.load(path) as z:
                d, h = z["distance_m"], z["response"]
        except (OSError, KeyError, ValueError) as exc:
            raise DataFormatError(f"cannot read {path}: {exc}") from None
        if h.ndim != 2 or h.shape[0] != d.size:
            raise DataFormatError(f"{path}: response must have one row per distance")
        return [TransferFunctionRecord(float(di), hi) for di, hi in zip(d, h)]

    records = []
    n_f_first = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header[:2]) != TF_HEADER:
            raise DataFormatError(f"{path}: expected header 'distance_m,n_f'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                d = float(row[0])
                n_f = int(row[1])
                vals = np.array([float(x) for x in row[2:]])
            except (IndexError, ValueError):
                raise DataFormatError(f"{path}:{lineno}: malformed row") from None
            if n_f < 1 or vals.size != 2 * n_f:
                raise DataFormatError(
                    f"{path}:{lineno}: row declares n_f={n_f} but holds {vals.size} values"
                )
            if n_f_first is None:
                n_f_first = n_f
            elif n_f != n_f_first:
                raise DataFormatError(
                    f"{path}:{lineno}: n_f={n_f} differs from n_f={n_f_first} on earlier rows"
                )
            try:
                records.append(TransferFunctionRecord(d, vals[0::2] + 1j * vals[1::2]))
            except InvalidInputError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise DataFormatError(f"{path}: no transfer-function rows")
    return records


def write_plot_data(path, x, y, header=("x", "y")) -> None:
    """Two whitespace-separated columns with a ``#`` header line."""
    with open(path, "w") as fh:
        fh.write(f"# {header[0]} {header[1]}\n")
        for a, b in zip(x, y):
            fh.write(f"{_fmt(a)} {_fmt(b)}\n")


def write_lsf(path, lsf) -> None:
    with open(path, "w") as fh:
        fh.write("distance_m,x_sigma_db\n")
        for d, x in zip(lsf.distances_m, lsf.x_sigma_db):
            fh.write(f"{_fmt(d)},{_fmt(x)}\n")


def save_model(path, model: NetworkModel) -> None:
    Path(path).write_text(model.dumps() + "\n")


def load_model(path) -> NetworkModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    return NetworkModel.loads(text)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
