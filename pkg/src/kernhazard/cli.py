"""Command-line front end.

Subcommands::

    estimate   hazard curve from a data file
    amse       leading bias/variance/AMSE for a model at given points
    bandwidth  optimal bandwidths (analytic, or plug-in from data)
    simulate   Monte Carlo bias/variance/MSE/MISE
    tables     reproduce the reference tables as CSV files

Exit codes: 0 success, 2 input error, 3 degenerate estimation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, tables
from .dataio import DataError, read_observations, write_records
from .estimators import EstimatorSpec, SortedSample, plugin_bandwidth
from .kernels import KERNELS, get_kernel, paper_constants
from .models import DomainError, SurvivalUnderflowError, parse_model
from .montecarlo import SimulationSpec, simulate

EXIT_INPUT = 2
EXIT_DEGENERATE = 3
AMSE_COLUMNS = ["estimator", "x0", "n", "h", "bias_sq", "variance", "amse", "optimal_h"]


class InputError(Exception):
    pass


class DegenerateError(Exception):
    pass


def _bandwidth_arg(text: str):
    if text in ("plugin", "optimal"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be a number, 'plugin' or 'optimal': {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _range_arg(text: str):
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo,hi")
    if not 0 < lo < hi < 1:
        raise argparse.ArgumentTypeError("need 0 < lo < hi < 1")
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _kernel(args):
    if getattr(args, "paper_constants", False):
        if args.kernel != "epanechnikov":
            raise InputError("--paper-constants only applies to the epanechnikov kernel")
        return paper_constants
    return get_kernel(args.kernel)


def _model(args):
    if not args.model:
        raise InputError("--model is required")
    try:
        return parse_model(args.model)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc))


def _emit(args, records, metadata=None, columns=None):
    text = write_records(records, args.format, metadata=metadata, paper=args.paper_format, columns=columns)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _points(args, model):
    if args.x0:
        return list(args.x0)
    qs = args.quantiles or list(tables.QUANTILES)
    try:
        return [model.quantile(q) for q in qs]
    except ValueError as exc:
        raise InputError(str(exc))


# -- subcommands ------------------------------------------------------------

def cmd_estimate(args) -> int:
    try:
        data = read_observations(args.input, args.column)
    except (DataError, OSError) as exc:
        raise InputError(str(exc))
    kernel = _kernel(args)
    sample = SortedSample(data)
    spec_bw = "plugin" if args.bandwidth in ("plugin", "optimal") else args.bandwidth
    est = EstimatorSpec(args.method, kernel, spec_bw)
    try:
        h = est.resolve_bandwidth(sample)
    except ValueError as exc:
        raise InputError(f"plug-in bandwidth failed: {exc}")
    if args.x0:
        x = np.asarray(args.x0, dtype=float)
    else:
        lo, hi = float(sample.values[0]), float(sample.values[-1])
        trim = h * kernel.halfwidth
        if hi - lo > 2 * trim:
            lo, hi = lo + trim, hi - trim
        x = np.linspace(lo, hi, args.grid)
    values, fallbacks = est.evaluate(sample, x, h=h, on_degenerate="nan")
    values = np.atleast_1d(np.asarray(values, dtype=float))
    keep = ~np.isnan(values)
    dropped = int((~keep).sum())
    records = [{"x": float(a), "hazard": float(b)} for a, b in zip(x[keep], values[keep])]
    meta = {
        "method": args.method, "kernel": kernel.name, "n": sample.n, "bandwidth": h,
        "bandwidth_rule": "plugin" if spec_bw == "plugin" else "fixed",
        "grid": int(x.size), "dropped": dropped, "ts_fallbacks": fallbacks,
    }
    _emit(args, records, meta, columns=["x", "hazard"])
    if dropped > 0.5 * x.size:
        raise DegenerateError(f"estimator degenerate at {dropped} of {x.size} grid points")
    return 0


def _amse_record(report: asymptotics.AmseReport) -> dict:
    d = report.to_dict()
    d["optimal_h"] = "unbounded" if report.optimal_h is None else report.optimal_h
    return d


def cmd_amse(args) -> int:
    model, kernel = _model(args), _kernel(args)
    if args.method not in ("naive", "direct"):
        raise InputError("amse supports --method naive or direct")
    records = []
    for x0 in _points(args, model):
        try:
            if args.bandwidth == "optimal":
                h = asymptotics.optimal_bandwidth(args.method, model, x0, args.n, kernel)
            elif args.bandwidth == "plugin":
                raise InputError("amse needs a numeric --bandwidth or 'optimal'")
            else:
                h = args.bandwidth if args.bandwidth is not None else args.n ** -0.2
            records.append(_amse_record(asymptotics.amse(args.method, model, x0, args.n, h, kernel)))
        except asymptotics.BiasDegenerateError:
            rep = asymptotics.amse(args.method, model, x0, args.n, args.n ** -0.2, kernel)
            rec = _amse_record(rep)
            rec.update(h=None, bias_sq=0.0, amse=None)
            records.append(rec)
        except (DomainError, SurvivalUnderflowError) as exc:
            raise InputError(str(exc))
    _emit(args, records, columns=AMSE_COLUMNS)
    return 0


def cmd_bandwidth(args) -> int:
    kernel = _kernel(args)
    records = []
    if args.input:
        try:
            sample = SortedSample(read_observations(args.input, args.column))
        except (DataError, OSError) as exc:
            raise InputError(str(exc))
        points = args.x0 or [None]
        for x0 in points:
            try:
                h = plugin_bandwidth(sample, kernel, args.method, x0)
            except ValueError as exc:
                raise InputError(str(exc))
            records.append({"estimator": args.method, "x0": x0, "n": sample.n, "optimal_h": h,
                            "rule": "plugin"})
        _emit(args, records, columns=["estimator", "x0", "n", "optimal_h", "rule"])
        return 0
    model = _model(args)
    if args.method == "terrell-scott":
        h = asymptotics.ts_optimal_bandwidth(model, args.n, kernel=kernel,
                                             quantile_range=args.quantile_range)
        records.append({"estimator": args.method, "x0": None, "n": args.n, "optimal_h": h,
                        "rule": "mise-power-5/9"})
        _emit(args, records, columns=["estimator", "x0", "n", "optimal_h", "rule"])
        return 0
    for x0 in _points(args, model):
        try:
            h = asymptotics.optimal_bandwidth(args.method, model, x0, args.n, kernel)
            rep = asymptotics.amse(args.method, model, x0, args.n, h, kernel)
            records.append(_amse_record(rep))
        except asymptotics.BiasDegenerateError:
            rep = asymptotics.amse(args.method, model, x0, args.n, args.n ** -0.2, kernel)
            rec = _amse_record(rep)
            rec.update(h=None, bias_sq=0.0, amse=None)
            records.append(rec)
        except (DomainError, SurvivalUnderflowError) as exc:
            raise InputError(str(exc))
    _emit(args, records, columns=AMSE_COLUMNS)
    return 0


def _read_config(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(str(exc))
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args, parser_defaults: dict) -> None:
    conf = _read_config(args.config)
    converters = {
        "model": str, "kernel": str, "n": int, "replications": int, "seed": int, "grid": int,
        "quantile_range": _range_arg, "workers": int,
        "method": lambda v: [t.strip() for t in v.split(",")],
        "bandwidth": lambda v: [_bandwidth_arg(t.strip()) for t in v.split(",")],
    }
    for key, raw in conf.items():
        if key not in converters:
            raise InputError(f"unknown config key {key!r}")
        # explicit flags win over the file
        if getattr(args, key) != parser_defaults.get(key):
            continue
        try:
            setattr(args, key, converters[key](raw))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"config {key}: {exc}")


def cmd_simulate(args) -> int:
    if args.config:
        _apply_config(args, args._defaults)
    model, kernel = _model(args), _kernel(args)
    methods = args.method or ["direct"]
    bws = args.bandwidth or []
    if len(methods) > 2:
        raise InputError("simulate compares at most two estimators")
    if len(bws) not in (0, 1, len(methods)):
        raise InputError("give one --bandwidth, or one per --method")
    specs = []
    for i, kind in enumerate(methods):
        bw = bws[i] if len(bws) == len(methods) else (bws[0] if bws else "optimal")
        if bw == "optimal":
            try:
                if kind == "terrell-scott":
                    bw = asymptotics.ts_optimal_bandwidth(model, args.n, kernel=kernel,
                                                          quantile_range=args.quantile_range)
                else:
                    bw = asymptotics.mise_optimal_bandwidth(kind, model, args.n, kernel,
                                                            args.quantile_range)
            except asymptotics.BiasDegenerateError:
                raise InputError(f"{kind}: optimal bandwidth is unbounded for {model}; pass --bandwidth")
        try:
            specs.append(EstimatorSpec(kind, kernel, bw))
        except ValueError as exc:
            raise InputError(str(exc))
    try:
        spec = SimulationSpec(model, args.n, args.replications, tuple(specs), args.quantile_range,
                              args.grid, args.seed)
    except ValueError as exc:
        raise InputError(str(exc))
    res = simulate(spec, workers=args.workers)
    summary = res.to_dict()
    summary.update(model=str(model), n=args.n, seed=args.seed,
                   bandwidths=[e.bandwidth for e in specs], methods=methods)
    if args.csv:
        write_records(res.grid_records(0), "csv", args.csv, paper=args.paper_format,
                      columns=["x", "bias", "variance", "mse"])
    text = json.dumps(summary, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_tables(args) -> int:
    outdir = Path(args.output or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    wanted = set(args.table or [1, 2, 3, 4, 5])
    cols = ["table", "family", "params", "estimator", "epsilon", "column", "value", "paper"]
    report = []
    summary = {}
    jobs = []
    if 1 in wanted:
        jobs.append(("table1", lambda: tables.table1(), 0.01))
    for num, fam in ((2, "gamma"), (3, "weibull"), (4, "beta")):
        if num in wanted:
            jobs.append((f"table{num}", lambda fam=fam: tables.least_amse_table(fam), 0.02))
    if 5 in wanted:
        jobs.append(("table5", lambda: tables.table5(args.replications, args.seed, tuple(args.sigmas),
                                                     workers=args.workers), None))
    for name, build, rtol in jobs:
        cells = build()
        write_records([c.to_dict() for c in cells], "csv", outdir / f"{name}.csv",
                      paper=args.paper_format, columns=cols)
        if rtol is not None:
            bad = tables.discrepancies(cells, rtol)
        else:
            bad = [c for c in cells if c.paper is not None and abs(c.value - c.paper) > 5.0]
        report.extend(bad)
        summary[name] = {"cells": len(cells), "discrepancies": len(bad)}
    write_records([dict(c.to_dict(), rel_error=c.rel_error) for c in report], "csv",
                  outdir / "discrepancies.csv", paper=args.paper_format, columns=cols + ["rel_error"])
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernhazard", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        p.add_argument("--kernel", default="epanechnikov", choices=sorted(KERNELS))
        p.add_argument("--format", default="json", choices=["json", "csv"])
        p.add_argument("--output", help="write to this path instead of stdout")
        p.add_argument("--paper-format", action="store_true", help="three significant figures")
        p.add_argument("--paper-constants", action="store_true",
                       help="use A12=1/5, A20=3/10 (reference-table constants)")
        if model:
            p.add_argument("--model", help="family:key=value,..., e.g. gamma:shape=0.5,scale=100")

    p = sub.add_parser("estimate", help="estimate the hazard curve from data")
    common(p, model=False)
    p.add_argument("input", nargs="?", help="observation file")
    p.add_argument("--input", dest="input_flag")
    p.add_argument("--column")
    p.add_argument("--method", default="direct", choices=["naive", "direct", "terrell-scott"])
    p.add_argument("--bandwidth", type=_bandwidth_arg, default="plugin")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--x0", type=_floats, help="evaluation points (default: trimmed data grid)")
    p.set_defaults(func=cmd_estimate)

    for name, func, helptext in (("amse", cmd_amse, "analytic AMSE terms"),
                                 ("bandwidth", cmd_bandwidth, "optimal bandwidths")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--method", default="direct",
                       choices=["naive", "direct"] + (["terrell-scott"] if name == "bandwidth" else []))
        p.add_argument("--n", type=float, default=1.0)
        p.add_argument("--x0", type=_floats)
        p.add_argument("--quantiles", type=_floats)
        p.add_argument("--quantile-range", type=_range_arg, default=(0.05, 0.95))
        if name == "amse":
            p.add_argument("--bandwidth", type=_bandwidth_arg, default=None,
                           help="number or 'optimal' (default n^(-1/5))")
        else:
            p.add_argument("--input", help="data file for a plug-in bandwidth")
            p.add_argument("--column")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="Monte Carlo MSE / MISE")
    common(p)
    p.add_argument("--config", help="key=value file; explicit flags take precedence")
    p.add_argument("--method", action="append", choices=["naive", "direct", "terrell-scott"])
    p.add_argument("--bandwidth", action="append", type=_bandwidth_arg)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--replications", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--quantile-range", type=_range_arg, default=(0.05, 0.95))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="per-grid-point x,bias,variance,mse of the first estimator")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tables", help="reproduce the reference tables")
    p.add_argument("--output", help="directory for table1.csv ... table5.csv")
    p.add_argument("--table", type=int, action="append", choices=[1, 2, 3, 4, 5])
    p.add_argument("--replications", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigmas", type=_floats, default=[1.0])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--paper-format", action="store_true")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    if args.command == "simulate":
        sub_defaults = build_parser().parse_args(["simulate"])
        args._defaults = vars(sub_defaults)
    if args.command == "estimate":
        args.input = args.input or args.input_flag
        if not args.input:
            print("kernhazard estimate: an input file is required", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"kernhazard {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateError as exc:
        print(f"kernhazard {args.command}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
