"""Command-line front end: ``chanpred {synth,pipeline,predict,sweep,report}``.

Options can also come from a JSON config file (``--config``).  Explicit
flags win over config values, config values win over built-in defaults.
Every command writes ``manifest.json`` whose ``config`` block can be fed
back through ``--config`` to repeat the run.

Exit statuses: 0 success, 1 usage error, 2 data/validation error,
3 numeric/training failure.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
import json
import logging
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__, io
from ._backend import backend_name
from .errors import ChanpredError, DataFormatError, InvalidInputError, NumericError
from .evaluation import DEFAULT_BIN_COUNT, compare_runs, empirical_density
from .harness import RMSE_SCOPES, SweepGrid, load_report, run_prediction, sweep, sweep_report
from .networks import NetworkConfig, NetworkKind
from .pipeline import (
    LinkBudget,
    extract_lsf,
    fit_log_distance,
    sliding_window_average,
    trace_from_transfer_functions,
)
from .synthetic import SyntheticParams, generate_trace, generate_transfer_functions

log = logging.getLogger("chanpred")

OUTPUT_DIR_ENV = "CHANPRED_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _kind_list(text):
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    return [NetworkKind.parse(x).value for x in items if str(x).strip()]


def _kind(text):
    return NetworkKind.parse(text).value


def _bool(text):
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _scope(text):
    if text not in RMSE_SCOPES:
        raise ValueError(f"rmse scope must be one of {', '.join(RMSE_SCOPES)}")
    return text


@dataclass(frozen=True)
class Opt:
    flags: tuple
    dest: str
    type: object
    default: object
    help: str
    flag_action: str | None = None  # "store_true" for switch-style flags


_SYNTH = [
    Opt(("--n",), "n_points", int, 3000, "number of samples"),
    Opt(("--spacing",), "spacing_m", float, 1.42, "sample spacing in meters"),
    Opt(("--start",), "start_m", float, 50.0, "first Tx-Rx distance in meters"),
    Opt(("--carrier",), "carrier_hz", float, 460e6, "carrier frequency in Hz"),
    Opt(("--intercept",), "intercept_db", float, 30.0, "log-distance intercept A (dB)"),
    Opt(("--exponent",), "exponent", float, 3.5, "path-loss exponent n"),
    Opt(("--sigma",), "shadow_sigma_db", float, 4.0, "shadowing std (dB)"),
    Opt(("--decorrelation",), "decorrelation_m", float, 100.0, "shadowing decorrelation distance (m)"),
    Opt(("--ssf",), "ssf_enabled", _bool, True, "Rayleigh small-scale fading on tones"),
    Opt(("--n-f",), "n_f", int, 1024, "tones per transfer function"),
    Opt(("--pt",), "p_t_dbm", float, 43.0, "transmit power (dBm)"),
    Opt(("--gtx",), "g_tx_db", float, 0.0, "Tx antenna gain (dB)"),
    Opt(("--grx",), "g_rx_db", float, 0.0, "Rx antenna gain (dB)"),
    Opt(("--transfer-functions",), "transfer_functions", str, "", "also write transfer functions to this file name (.npz or .csv)"),
    Opt(("--seed",), "seed", int, 0, "random seed"),
]

_PIPELINE = [
    Opt(("--input", "-i"), "input_path", str, None, "transfer-function file (.npz or .csv)"),
    Opt(("--carrier",), "carrier_hz", float, 460e6, "carrier frequency in Hz"),
    Opt(("--pt",), "p_t_dbm", float, 43.0, "transmit power (dBm)"),
    Opt(("--gtx",), "g_tx_db", float, 0.0, "Tx antenna gain (dB)"),
    Opt(("--grx",), "g_rx_db", float, 0.0, "Rx antenna gain (dB)"),
]

_NETWORK = [
    Opt(("--lr",), "learning_rate", float, 1e-6, "BPN learning rate"),
    Opt(("--threshold",), "error_threshold", float, 1e-5, "BPN stopping error"),
    Opt(("--max-iter",), "max_iterations", int, 1000, "BPN epoch cap"),
    Opt(("--carrier",), "carrier_hz", float, 460e6, "carrier frequency in Hz"),
    Opt(("--smooth",), "smooth", _bool, False, "apply the 40-wavelength average before training", "store_true"),
    Opt(("--rmse-scope",), "rmse_scope", _scope, "predicted_only", "predicted_only or all_points"),
]

_PREDICT = [
    Opt(("--input", "-i"), "input_path", str, None, "trace CSV"),
    Opt(("--kind",), "kind", _kind, "BPN", "bpn, elm or rbf"),
    Opt(("--neurons",), "hidden_neurons", int, 10, "hidden neurons M"),
    Opt(("--q",), "q", int, 1, "predicted points between training points"),
    Opt(("--seed",), "seed", int, 0, "random seed"),
    Opt(("--bins",), "bin_count", int, DEFAULT_BIN_COUNT, "LSF density bins"),
] + _NETWORK

_SWEEP = [
    Opt(("--input", "-i"), "input_path", str, None, "trace CSV"),
    Opt(("--kinds",), "kinds", _kind_list, ["BPN", "ELM", "RBF"], "comma-separated network kinds"),
    Opt(("--neurons",), "neuron_counts", _int_list, [10, 20, 30, 40, 50], "comma-separated neuron counts"),
    Opt(("--q",), "q_values", _int_list, [1, 2, 4, 6], "comma-separated q values"),
    Opt(("--seeds",), "seeds", _int_list, [0], "comma-separated seeds"),
    Opt(("--seed",), "seed", int, None, "single seed (shorthand for --seeds N)"),
    Opt(("--jobs",), "jobs", int, 1, "worker processes"),
] + _NETWORK

_REPORT = [
    Opt(("--input", "-i"), "input_path", str, None, "sweep report.json"),
]

COMMANDS = {
    "synth": (_SYNTH, "generate a synthetic trace"),
    "pipeline": (_PIPELINE, "transfer functions -> smoothed trace and LSF"),
    "predict": (_PREDICT, "train one network and predict withheld points"),
    "sweep": (_SWEEP, "run a grid of prediction experiments"),
    "report": (_REPORT, "comparison tables and plot data from a sweep report"),
}

_COMMON = [
    Opt(("--out-dir", "-o"), "output_dir", str, None, f"output directory (default ${OUTPUT_DIR_ENV} or ./chanpred_out)"),
]


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None
    output_dir: str
    options: dict = field(default_factory=dict)
    params: SyntheticParams | None = None
    network: NetworkConfig | None = None
    grid: SweepGrid | None = None
    rmse_scope: str = "predicted_only"

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "config": self.options,
            "version": __version__,
            "backend": backend_name(),
        }


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chanpred", description="Channel path-loss prediction with single-hidden-layer networks")
    parser.add_argument("--version", action="version", version=f"chanpred {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, (opts, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", "-c", dest="config", help="JSON config file")
        for opt in opts + _COMMON:
            if opt.flag_action == "store_true":
                p.add_argument(*opt.flags, dest=opt.dest, action="store_true", help=opt.help)
                p.add_argument("--no-" + opt.flags[0][2:], dest=opt.dest, action="store_false")
            else:
                p.add_argument(*opt.flags, dest=opt.dest, type=opt.type, help=opt.help,
                               metavar=opt.dest.upper())
    return parser


def _load_config_file(path, command, opts) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    if "config" in doc and "command" in doc:  # a manifest from an earlier run
        if doc["command"] != command:
            raise UsageError(f"manifest is for '{doc['command']}', not '{command}'")
        doc = doc["config"]
    by_dest = {o.dest: o for o in opts}
    out = {}
    for key, value in doc.items():
        if key not in by_dest:
            raise UsageError(f"unknown config key {key!r} for '{command}'")
        opt = by_dest[key]
        try:
            out[key] = None if value is None else opt.type(value)
        except (ValueError, TypeError, ChanpredError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
    return out


def parse_config(argv=None) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except (InvalidInputError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if ns.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    opts = COMMANDS[ns.command][0] + _COMMON
    values = {o.dest: o.default for o in opts}
    args = {k: v for k, v in vars(ns).items() if k not in ("command", "verbose", "config")}
    if getattr(ns, "config", None):
        file_values = _load_config_file(ns.config, ns.command, opts)
        for key, val in file_values.items():
            if key in args and args[key] != val:
                log.warning("flag overrides config value for %s: %r -> %r", key, val, args[key])
        values.update(file_values)
    values.update(args)

    if values["output_dir"] is None:
        values["output_dir"] = os.environ.get(OUTPUT_DIR_ENV) or "chanpred_out"
    if "input_path" in values and not values["input_path"]:
        raise UsageError(f"'{ns.command}' needs --input")

    try:
        return _resolve(ns.command, values)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def _resolve(command, values) -> RunConfig:
    kwargs = dict(command=command, input_path=values.get("input_path"),
                  output_dir=values["output_dir"], options=values)
    if command == "synth":
        link = LinkBudget(values["p_t_dbm"], values["g_tx_db"], values["g_rx_db"])
        fields_ = {k: values[k] for k in ("n_points", "spacing_m", "start_m", "carrier_hz", "intercept_db",
                                         "exponent", "shadow_sigma_db", "decorrelation_m", "ssf_enabled",
                                         "n_f", "seed")}
        kwargs["params"] = SyntheticParams(link=link, **fields_)
    elif command == "predict":
        kwargs["network"] = NetworkConfig(values["kind"], values["hidden_neurons"], values["learning_rate"],
                                          values["error_threshold"], values["max_iterations"], values["seed"])
        kwargs["rmse_scope"] = values["rmse_scope"]
    elif command == "sweep":
        if values.get("seed") is not None:
            values["seeds"] = [values["seed"]]
        values.pop("seed", None)
        kwargs["grid"] = SweepGrid(values["kinds"], values["neuron_counts"], values["q_values"], values["seeds"],
                                   values["learning_rate"], values["error_threshold"], values["max_iterations"])
        kwargs["rmse_scope"] = values["rmse_scope"]
    return RunConfig(**kwargs)


# --------------------------------------------------------------------------
# command bodies
# --------------------------------------------------------------------------


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_trace(cfg: RunConfig):
    trace = io.read_trace(cfg.input_path, carrier_hz=cfg.options["carrier_hz"])
    if cfg.options.get("smooth"):
        trace = sliding_window_average(trace)
    return trace


def _cmd_synth(cfg: RunConfig, out: Path):
    trace = generate_trace(cfg.params)
    io.write_trace(out / "trace.csv", trace)
    tf_name = cfg.options.get("transfer_functions")
    if tf_name:
        io.write_transfer_functions(out / tf_name, generate_transfer_functions(trace, cfg.params))
    io.write_json(out / "params.json", cfg.params.to_dict())


def _cmd_pipeline(cfg: RunConfig, out: Path):
    records = io.read_transfer_functions(cfg.input_path)
    o = cfg.options
    budget = LinkBudget(o["p_t_dbm"], o["g_tx_db"], o["g_rx_db"])
    raw = trace_from_transfer_functions(records, budget, o["carrier_hz"])
    smoothed = sliding_window_average(raw)
    model = fit_log_distance(smoothed)
    io.write_trace(out / "raw_trace.csv", raw)
    io.write_trace(out / "trace.csv", smoothed)
    io.write_lsf(out / "lsf.csv", extract_lsf(smoothed, model))
    io.write_json(out / "log_distance.json", {
        "intercept_db": model.intercept_db, "exponent": model.exponent, "reference_m": model.reference_m,
    })


def _prediction_csv(path, trace, run):
    source = np.full(len(trace), "measured", dtype=object)
    source[run.split.predict_indices] = "predicted"
    io.write_trace(path, trace.distances_m, run.reconstructed_pl_db(trace), source=source)


def _cmd_predict(cfg: RunConfig, out: Path):
    trace = _load_trace(cfg)
    run = run_prediction(trace, cfg.options["q"], cfg.network, Path(cfg.input_path).stem, cfg.rmse_scope)
    summary = run.summary()
    summary["train_seconds"] = run.train_seconds
    io.write_json(out / "run.json", summary)
    if run.model is None:
        return
    io.save_model(out / "model.json", run.model)
    _prediction_csv(out / "predictions.csv", trace, run)

    measured_lsf = extract_lsf(trace, fit_log_distance(trace)).x_sigma_db[run.split.predict_indices]
    predicted_lsf = run.predicted_lsf_db
    lo = float(min(measured_lsf.min(), predicted_lsf.min()))
    hi = float(max(measured_lsf.max(), predicted_lsf.max()))
    if hi > lo and measured_lsf.size >= 2:
        bins = cfg.options["bin_count"]
        for name, series in (("measured", measured_lsf), ("predicted", predicted_lsf)):
            dens = empirical_density(series, bins, value_range=(lo, hi))
            io.write_plot_data(out / f"lsf_density_{name}.dat", dens.bin_centers, dens.density,
                               header=("bin_center_db", "density_per_db"))


def _cmd_sweep(cfg: RunConfig, out: Path):
    trace = _load_trace(cfg)
    trace_id = Path(cfg.input_path).stem
    runs = sweep(trace, cfg.grid, trace_id, cfg.rmse_scope, jobs=cfg.options["jobs"])
    (out / "report.json").write_text(sweep_report(runs, cfg.grid, trace_id))
    io.write_json(out / "timings.json", [
        {"kind": r.kind, "hidden_neurons": r.hidden_neurons, "q": r.q, "seed": r.seed,
         "train_seconds": r.train_seconds}
        for r in runs
    ])
    pred_dir = out / "predictions"
    pred_dir.mkdir(exist_ok=True)
    for r in runs:
        if r.error is None and r.predicted_pl_db is not None and r.predicted_pl_db.size:
            _prediction_csv(pred_dir / f"{r.kind}_M{r.hidden_neurons}_q{r.q}_s{r.seed}.csv", trace, r)
    failed = [r for r in runs if r.error is not None]
    for r in failed:
        log.error("run %s M=%d q=%d seed=%d failed: %s", r.kind, r.hidden_neurons, r.q, r.seed, r.error)
    if failed and len(failed) == len(runs):
        raise NumericError("every sweep run failed")


_GNUPLOT = """\
# gnuplot script stub: RMSE versus hidden neurons, one curve per (kind, q)
set xlabel "hidden neurons"
set ylabel "RMSE (dB)"
set key outside
plot \\
{curves}
"""


def _cmd_report(cfg: RunConfig, out: Path):
    try:
        text = Path(cfg.input_path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {cfg.input_path}: {exc}") from None
    _, records = load_report(text)
    if not records:
        raise DataFormatError("sweep report holds no runs")
    table = compare_runs(records)
    io.write_json(out / "comparison.json", table.to_dict())
    (out / "comparison_pl.txt").write_text(table.render("pl"))
    (out / "comparison_lsf.txt").write_text(table.render("lsf"))
    curves = []
    for metric in ("pl", "lsf"):
        for kind in sorted({c.kind for c in table.cells}):
            for q in sorted({c.q for c in table.cells if c.kind == kind}):
                cells = sorted((c for c in table.cells if c.kind == kind and c.q == q),
                               key=lambda c: c.hidden_neurons)
                pts = [(c.hidden_neurons, getattr(c, f"mean_rmse_{metric}_db")) for c in cells]
                pts = [(m, v) for m, v in pts if v is not None]
                name = f"rmse_{metric}_{kind}_q{q}.dat"
                io.write_plot_data(out / name, [p[0] for p in pts], [p[1] for p in pts],
                                   header=("hidden_neurons", f"rmse_{metric}_db"))
                if metric == "pl":
                    curves.append(f'  "{name}" using 1:2 with linespoints title "{kind} r={100 * cells[0].ratio:.0f}%"')
    (out / "plot_rmse.gp").write_text(_GNUPLOT.format(curves=", \\\n".join(curves)))


_BODIES = {
    "synth": _cmd_synth,
    "pipeline": _cmd_pipeline,
    "predict": _cmd_predict,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
}


def execute(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    _BODIES[cfg.command](cfg, out)
    io.write_json(out / "manifest.json", cfg.manifest())
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    verbose = sum(a in ("-v", "--verbose") for a in argv)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return execute(cfg)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInputError, ChanpredError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
