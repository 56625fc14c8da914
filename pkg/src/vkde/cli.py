"""Command line entry point: ``vkde {estimate,simulate,bandwidth,diagnose,moments}``.

Options may come from a JSON file (``--config``); flags on the command line
override file values. Every command that writes output also writes
``manifest.json`` holding the fully resolved options, and that file is itself
accepted by ``--config`` to rerun the command.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric/domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from importlib import metadata
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import io as vio
from .clipping import auto_clip_constant, make_clipping
from .densities import MODEL_NAMES, get_model
from .errors import DataError, DomainError, KernelRegularityWarning
from .estimators import (
    ESTIMATOR_KINDS,
    BandwidthPair,
    abramson,
    auto_bandwidths,
    classical_kde,
    default_grid,
    hall_marron,
    hhm,
    ideal_vkde,
    pilot_at_sample,
    plugin_vkde,
)
from .kernels import KERNEL_NAMES, compute_moments, get_kernel
from .simlab import EXPERIMENTS, ExperimentConfig, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DOMAIN = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# ---------------------------------------------------------------------------
# parser


def _auto_float(text):
    return text if text == "auto" else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vkde", description="Variable bandwidth kernel density estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", default=None, help="JSON file with option values")

    p = sub.add_parser("estimate", help="estimate a density from data")
    common(p)
    p.add_argument("--data", default=S, help="input sample (CSV or whitespace separated)")
    p.add_argument("--estimator", choices=ESTIMATOR_KINDS, default=S)
    p.add_argument("--kernel", choices=KERNEL_NAMES, default=S)
    p.add_argument("--model", choices=MODEL_NAMES, default=S, help="oracle density (ideal-vkde, hall-marron, abramson, hhm)")
    p.add_argument("--h", type=_auto_float, default=S, help="bandwidth for single-bandwidth estimators")
    p.add_argument("--h1", type=_auto_float, default=S, help="pilot bandwidth or 'auto' (n^-1/(4+d))")
    p.add_argument("--h2", type=_auto_float, default=S, help="main bandwidth or 'auto' (n^-1/(8+d))")
    p.add_argument("--c", type=_auto_float, default=S, help="clipping constant or 'auto'")
    p.add_argument("--t0", type=float, default=S)
    p.add_argument("--B", type=float, default=S, help="window half-width factor for hhm")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=S)
    p.add_argument("--grid", type=float, nargs="+", default=S, help="explicit evaluation points")
    p.add_argument("--ci", type=float, default=S, help="add plug-in confidence bounds at this level")
    p.add_argument("--out", default=S)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    common(p)
    p.add_argument("--experiment", choices=EXPERIMENTS, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--M", type=int, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--model", choices=MODEL_NAMES, default=S)
    p.add_argument("--kernel", choices=KERNEL_NAMES, default=S)
    p.add_argument("--c", type=_auto_float, default=S)
    p.add_argument("--paper-scale", dest="paper_scale", action="store_true", default=S)
    p.add_argument("--svg", action="store_true", default=S)
    p.add_argument("--out", default=S)

    p = sub.add_parser("bandwidth", help="asymptotically optimal main bandwidth for an oracle model")
    common(p)
    p.add_argument("--model", choices=MODEL_NAMES, default=S)
    p.add_argument("--kernel", choices=KERNEL_NAMES, default=S)
    p.add_argument("--c", type=_auto_float, default=S)
    p.add_argument("--t0", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--r", type=_auto_float, default=S)
    p.add_argument("--out", default=S)

    p = sub.add_parser("diagnose", help="pilot rate U(h1) and the ratio U(h1)/h2^2")
    common(p)
    p.add_argument("--h1", type=_auto_float, default=S)
    p.add_argument("--h2", type=_auto_float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--d", type=int, default=S)

    p = sub.add_parser("moments", help="kernel moment functionals as JSON")
    common(p)
    p.add_argument("--kernel", choices=KERNEL_NAMES, default=S)
    p.add_argument("--dim", type=int, default=S)
    p.add_argument("--out", default=S)
    return parser


_DEFAULTS = {
    "estimate": dict(data=None, estimator="plugin-vkde", kernel="tricube", model=None, h="auto",
                     h1="auto", h2="auto", c="auto", t0=2.0, B=1.0, grid_points=512, grid=None,
                     ci=None, out=None),
    "simulate": dict(out=None, svg=False),
    "bandwidth": dict(model="normal", kernel="tricube", c="auto", t0=2.0, n=50_000, r="auto", out=None),
    "diagnose": dict(h1="auto", h2="auto", n=None, d=1),
    "moments": dict(kernel="tricube", dim=1, out=None),
}
_SIM_PASSTHROUGH = ("out", "svg")


def _read_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    # a manifest from a previous run
    if set(data) >= {"command", "config"}:
        data = data["config"]
    return data


def parse_args_and_config(argv):
    """Parse ``argv`` and merge with the config file. Returns ``(command, options)``.

    Precedence: command-line flags, then the config file, then defaults.
    """
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    file_opts = _read_config(ns.config) if ns.config else {}
    if cmd == "simulate":
        allowed = set(f for f in ExperimentConfig.__dataclass_fields__) | set(_SIM_PASSTHROUGH)
    else:
        allowed = set(_DEFAULTS[cmd])
    unknown = sorted(set(file_opts) - allowed)
    if unknown:
        raise UsageError(f"unknown {cmd} config keys: {', '.join(unknown)}")
    opts = dict(_DEFAULTS[cmd])
    opts.update(file_opts)
    opts.update(flags)
    return cmd, opts


# ---------------------------------------------------------------------------
# commands


def _write_manifest(outdir, cmd, opts):
    vio.write_json(Path(outdir) / "manifest.json", {"command": cmd, "version": _version(), "config": opts})


def _model_clip_constant(model, t0) -> float:
    # oracle analogue of the data-driven rule: density values at 1000 model quantiles
    q = (np.arange(1000) + 0.5) / 1000
    if model.quantile is None:
        raise UsageError(f"model {model.name!r} has no quantile function; pass --c")
    return auto_clip_constant(model.pdf(model.quantile(q)), t0)


def cmd_estimate(opts) -> int:
    if not opts.get("data"):
        raise UsageError("estimate needs --data")
    sample = vio.load_sample(opts["data"])
    kind = opts["estimator"]
    kernel = get_kernel(opts["kernel"], sample.dim)
    n, d = sample.n, sample.dim
    rates = auto_bandwidths(n, d)
    resolved = dict(opts)
    resolved["data"] = str(opts["data"])
    needs_model = kind in ("ideal-vkde", "hall-marron", "abramson", "hhm")
    model = None
    if needs_model:
        if not opts.get("model"):
            raise UsageError(f"estimator {kind} needs --model (oracle density)")
        model = get_model(opts["model"])
    h = rates.h2 if opts["h"] == "auto" else float(opts["h"])
    h1 = rates.h1 if opts["h1"] == "auto" else float(opts["h1"])
    h2 = rates.h2 if opts["h2"] == "auto" else float(opts["h2"])
    resolved.update(h=h, h1=h1, h2=h2)
    spec = None
    if kind in ("plugin-vkde", "ideal-vkde"):
        if opts["c"] == "auto":
            c = auto_clip_constant(pilot_at_sample(sample, kernel, h1), opts["t0"])
        else:
            c = float(opts["c"])
        spec = make_clipping(c, opts["t0"])
        resolved["c"] = c
    main_h = h2 if kind == "plugin-vkde" else h
    if opts.get("grid") is not None:
        grid = np.asarray(opts["grid"], dtype=float)
    else:
        if d != 1:
            raise UsageError("pass --grid for multivariate data")
        grid = default_grid(sample, kernel, main_h, spec.c if spec else 1.0, opts["grid_points"])
        resolved["grid"] = [float(g) for g in grid]
    if d > 1:
        grid = grid.reshape(-1, d)

    if kind == "classical":
        est = classical_kde(sample, kernel, h, grid)
    elif kind == "plugin-vkde":
        est = plugin_vkde(sample, kernel, BandwidthPair(h1, h2), spec, grid)
    elif kind == "ideal-vkde":
        est = ideal_vkde(sample, kernel, h, spec, model, grid)
    elif kind == "hall-marron":
        est = hall_marron(sample, kernel, h, model, grid)
    elif kind == "abramson":
        est = abramson(sample, kernel, h, model, grid)
    else:
        est = hhm(sample, kernel, h, model, grid, B=opts["B"])

    cols = {}
    if d == 1:
        cols["t"] = grid
    else:
        for i in range(d):
            cols[f"t{i + 1}"] = grid[:, i]
    cols["fhat"] = est.values
    if opts.get("ci") is not None:
        if kind != "plugin-vkde":
            raise UsageError("--ci is available for the plugin-vkde estimator")
        fhat = np.asarray(est.values, dtype=float)
        lo = np.full_like(fhat, np.nan)
        hi = np.full_like(fhat, np.nan)
        pos = fhat > 0
        if pos.any():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", KernelRegularityWarning)
                s2 = asy.sigma_t2(fhat[pos], compute_moments(kernel), spec, d)
            lo[pos], hi[pos] = asy.confidence_interval(fhat[pos], n, h2, s2, opts["ci"], d)
        cols["lo"], cols["hi"] = lo, hi

    summary = {"estimator": kind, "kernel": kernel.name, "n": n, "dim": d, "bandwidths": est.bandwidths}
    if spec is not None:
        summary["c"] = spec.c
    if opts.get("out"):
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)
        vio.write_csv(out / "est.csv", cols)
        vio.write_json(out / "summary.json", summary)
        _write_manifest(out, "estimate", resolved)
        print(f"wrote {out / 'est.csv'} ({len(est.values.ravel())} points)")
    else:
        print(",".join(cols))
        for row in zip(*[np.ravel(v) for v in cols.values()]):
            print(",".join(vio.format_float(v) for v in row))
    return EXIT_OK


def cmd_simulate(opts) -> int:
    sim = {k: v for k, v in opts.items() if k not in _SIM_PASSTHROUGH}
    try:
        cfg = ExperimentConfig.from_dict(sim).resolved()
    except (TypeError, ValueError, LookupError) as exc:
        raise UsageError(str(exc)) from exc
    result = run_experiment(cfg)
    print(f"experiment {cfg.experiment}: {result.n_records} records in {result.wall_time:.1f}s")
    print(json.dumps(vio.to_jsonable(_headline(result)), indent=2))
    if opts.get("out"):
        out = Path(opts["out"])
        vio.write_result(result, out, svg=bool(opts.get("svg")))
        resolved = cfg.to_dict()
        resolved.update(out=str(out), svg=bool(opts.get("svg")))
        _write_manifest(out, "simulate", resolved)
        print(f"wrote {out}")
    return EXIT_OK


def _headline(result) -> dict:
    agg = result.aggregates
    if result.experiment == "bias":
        return {k: agg[k] for k in ("slope_classical", "slope_ideal", "inconclusive")}
    if result.experiment == "sweep":
        return {k: agg[k] for k in ("h_empirical", "h_exact", "h_paper")}
    return agg


def _region_and_spec(opts):
    model = get_model(opts["model"])
    if model.dim != 1:
        raise UsageError("bandwidth is implemented for one-dimensional models")
    kernel = get_kernel(opts["kernel"], model.dim)
    c = _model_clip_constant(model, opts["t0"]) if opts["c"] == "auto" else float(opts["c"])
    spec = make_clipping(c, opts["t0"])
    r = 1.1 * spec.threshold if opts["r"] == "auto" else float(opts["r"])
    try:
        region = asy.EvaluationRegion(model, spec, r)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return model, kernel, spec, region


def cmd_bandwidth(opts) -> int:
    model, kernel, spec, region = _region_and_spec(opts)
    n = int(opts["n"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelRegularityWarning)
        ints = asy.region_integrals(model, compute_moments(kernel), spec, region)
    opt = asy.optimal_bandwidth(model, kernel, spec, region, n, integrals=ints)
    resolved = dict(opts, c=spec.c, r=region.r)
    print(f"h_paper,{vio.format_float(opt.h_paper)}")
    print(f"h_exact,{vio.format_float(opt.h_exact)}")
    print("# h_exact minimizes the two-term IMSE; h_paper omits the factor (d/8)^(1/(8+d))")
    hs = opt.h_exact * np.geomspace(0.25, 4.0, 41)
    curve = asy.imse(model, kernel, spec, region, hs, n, integrals=ints)
    if opts.get("out"):
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)
        vio.write_csv(out / "imse.csv", {"h": hs, "imse": curve})
        vio.write_json(out / "summary.json", {
            "h_paper": opt.h_paper, "h_exact": opt.h_exact, "ratio": opt.ratio,
            "int_B2": ints[0], "int_sigma2": ints[1], "c": spec.c, "r": region.r, "n": n,
        })
        _write_manifest(out, "bandwidth", resolved)
    else:
        print("h,imse")
        for h, v in zip(hs, curve):
            print(f"{vio.format_float(h)},{vio.format_float(v)}")
    return EXIT_OK


def cmd_diagnose(opts) -> int:
    n, d = opts["n"], int(opts["d"])
    if n is None:
        raise UsageError("diagnose needs --n")
    rates = auto_bandwidths(int(n), d)
    h1 = rates.h1 if opts["h1"] == "auto" else float(opts["h1"])
    h2 = rates.h2 if opts["h2"] == "auto" else float(opts["h2"])
    u = asy.rate_diagnostic_U(h1, int(n), d)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ratio = asy.rate_ratio(h1, h2, int(n), d)
    print(f"h1,{vio.format_float(h1)}")
    print(f"h2,{vio.format_float(h2)}")
    print(f"U,{vio.format_float(u)}")
    print(f"ratio,{vio.format_float(ratio)}")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK


def cmd_moments(opts) -> int:
    mom = compute_moments(get_kernel(opts["kernel"], int(opts["dim"])))
    text = mom.to_json()
    if opts.get("out"):
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "moments.json").write_text(text + "\n", encoding="utf-8")
        _write_manifest(out, "moments", opts)
    print(text)
    return EXIT_OK


_COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "bandwidth": cmd_bandwidth,
    "diagnose": cmd_diagnose,
    "moments": cmd_moments,
}


def main(argv=None) -> int:
    try:
        cmd, opts = parse_args_and_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"vkde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[cmd](opts)
    except UsageError as exc:
        print(f"vkde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"vkde: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DomainError as exc:
        print(f"vkde: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"vkde: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, LookupError) as exc:
        print(f"vkde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
