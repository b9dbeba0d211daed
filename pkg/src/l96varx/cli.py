"""Command-line pipeline: generate -> fit -> simulate -> diagnose -> compare.

Exit codes: 0 ok, 1 threshold assertion failed, 2 usage or configuration
error, 3 divergence, 4 estimation or data error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from importlib import resources
from pathlib import Path

from .config import ModelConfig, parse_config_text
from .diagnostics import DiagnosticsReport, compare_reports, evaluate_thresholds, make_report
from .errors import (ComparisonError, ConfigError, DataError, DivergenceError,
                     EstimationError, NumericalError, StateError)
from .estimation import StabilityWarning, fit_parameterization, fit_report
from .io import TRAJECTORY_MAGIC, read_json, read_series, sidecar_path, write_json, write_series
from .l96 import simulate_full
from .narmax import fit_narmax, preset_model
from .reduced import load_parameterization, simulate_ensemble, simulate_reduced
from .varx import VarxSpec, named_spec

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_DIVERGED, EXIT_DATA = 0, 1, 2, 3, 4


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _config_from_args(args) -> ModelConfig:
    overrides = "\n".join(args.set or [])
    if args.config:
        text = Path(args.config).read_text() + "\n" + overrides
        cfg = parse_config_text(text, base=args.preset)
    elif args.preset:
        cfg = parse_config_text(overrides, base=args.preset)
    else:
        raise ConfigError("give --preset or --config")
    return cfg.scaled(args.scale) if args.scale != 1 else cfg


def cmd_generate(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.perf_counter()
    meta = {"seed": args.seed, "config": cfg.to_dict(), "config_id": cfg.config_hash(),
            "scale": args.scale}
    try:
        series = simulate_full(cfg, args.seed)
    except DivergenceError as exc:
        meta.update(status="diverged", step=exc.step, wall_time=time.perf_counter() - t0)
        write_json(sidecar_path(args.output), meta)
        raise
    meta.update(status="ok", n_samples=series.N, K=series.K,
                wall_time=time.perf_counter() - t0)
    write_series(args.output, series)
    write_json(sidecar_path(args.output), meta)
    print(f"wrote {args.output}: N={series.N} K={series.K} "
          f"({meta['wall_time']:.1f} s)")
    return EXIT_OK


def _series_config(series) -> dict | None:
    return series.meta.get("config")


def cmd_fit(args) -> int:
    series = read_series(args.series)
    K = series.K
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", StabilityWarning)
        if args.model == "narmax":
            if not args.variant:
                raise ConfigError("narmax needs --variant 1201 or 1110")
            if args.preset_params:
                model = preset_model(args.variant)
            else:
                cfg = _series_config(series)
                F = args.forcing if args.forcing is not None else (cfg or {}).get("F")
                model = fit_narmax(series, args.variant, F=F)
            out = model.to_dict()
        elif args.model == "zero":
            out = {"kind": "zero", "label": "unresolved (b=0)", "K": K}
        else:
            if args.full_lags:
                if args.model != "varx":
                    raise ConfigError("--full-lags applies to varx only")
                spec = VarxSpec(K, p=args.p or 0, use_endogenous=True, use_exogenous=True,
                                covariance_kind=named_spec("wn", K, cov=args.cov).covariance_kind,
                                full_lags=True)
            else:
                spec = named_spec(args.model, K, args.p, args.cov)
            model = fit_parameterization(series, spec)
            out = fit_report(model, series, max_lag=args.report_lags)
    out["series"] = str(args.series)
    if _series_config(series):
        out["config"] = _series_config(series)
    write_json(args.output, out)
    stability = out.get("info", {}).get("stability", {})
    for w in caught:
        print(f"WARNING: {w.message}", file=sys.stderr)
    if stability and not stability.get("stable", True):
        print("WARNING: fitted model is NOT stationary; reduced runs may diverge",
              file=sys.stderr)
    print(f"wrote {args.output}: {out.get('label', out['kind'])}, "
          f"spectral radius {stability.get('spectral_radius', 0.0):.6f}")
    return EXIT_OK


def _simulate_config(args, model: dict, reference) -> ModelConfig:
    if args.preset or args.config:
        return _config_from_args(args)
    for source in ((reference.meta if reference is not None else {}), model):
        if source.get("config"):
            return ModelConfig.from_dict(source["config"])
    raise ConfigError("no configuration found; give --preset or --config")


def _trajectory_meta(traj, args, wall: float) -> dict:
    meta = dict(traj.meta)
    meta.update(model_file=str(args.model), reference=str(args.reference or ""),
                wall_time=wall)
    return meta


def cmd_simulate(args) -> int:
    model_dict = read_json(args.model)
    param = load_parameterization(model_dict)
    reference = read_series(args.reference) if args.reference else None
    if reference is None and not args.zero_history:
        raise ConfigError("a reference series is needed for the warm start "
                          "(or pass --zero-history)")
    cfg = _simulate_config(args, model_dict, reference)
    n_steps = cfg.n_samples if args.n_steps is None else args.n_steps
    init = None if args.zero_history else reference
    out = Path(args.output)
    t0 = time.perf_counter()
    if args.ensemble > 1:
        seeds = [args.seed + i for i in range(args.ensemble)]
        trajs = simulate_ensemble(cfg, param, init, seeds, n_steps)
        paths = [out.with_name(f"{out.stem}.seed{s}{out.suffix}") for s in seeds]
    else:
        trajs = [simulate_reduced(cfg, param, init, args.seed, n_steps,
                                  zero_history=args.zero_history)]
        paths = [out]
    wall = time.perf_counter() - t0
    for path, traj in zip(paths, trajs):
        write_series(path, traj.as_series(cfg.dt_reduced), magic=TRAJECTORY_MAGIC)
        write_json(sidecar_path(path), _trajectory_meta(traj, args, wall))
        print(f"wrote {path}: {traj.Xtilde.shape[0]} steps, seed {traj.seed}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    series = read_series(args.data)
    pdf_range = None
    if args.range_from:
        ref = DiagnosticsReport.from_dict(read_json(args.range_from))
        pdf_range = (float(ref.edges[0]), float(ref.edges[-1]))
    report = make_report(series.X, n_bins=args.bins, pdf_range=pdf_range, max_lag=args.max_lag,
                         pacf_series=series.B if args.pacf else None,
                         pacf_max_lag=args.pacf)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "report.json", report.to_dict())
    files = report.write_csvs(outdir)
    print(f"wrote {outdir / 'report.json'} and {', '.join(p.name for p in files.values())}; "
          f"mean {report.mean:.6g}, std {report.std:.6g}, modes {report.modes}")
    return EXIT_OK


def _load_thresholds(name_or_path: str) -> dict:
    path = Path(name_or_path)
    if path.exists():
        return json.loads(path.read_text())
    shipped = resources.files("l96varx").joinpath(f"data/thresholds/{name_or_path}.json")
    if shipped.is_file():
        return json.loads(shipped.read_text())
    raise ConfigError(f"no thresholds file or shipped set named {name_or_path!r}")


def _report_path(p) -> Path:
    p = Path(p)
    return p / "report.json" if p.is_dir() else p


def cmd_compare(args) -> int:
    ref = DiagnosticsReport.from_dict(read_json(_report_path(args.reference)))
    test = DiagnosticsReport.from_dict(read_json(_report_path(args.test)))
    thresholds = _load_thresholds(args.assert_) if args.assert_ else {}
    lag = args.acf_max_lag if args.acf_max_lag is not None else thresholds.get("acf_max_lag")
    summary = compare_reports(ref, test, acf_max_lag=lag)
    if args.output:
        write_json(args.output, summary)
    for key, value in summary.items():
        if not isinstance(value, list):
            print(f"{key:18s} {value}")
    if not thresholds:
        return EXIT_OK
    failed = 0
    for key, ok, value, rule in evaluate_thresholds(summary, thresholds):
        print(f"{'PASS' if ok else 'FAIL'} {key} = {value} {rule}")
        failed += not ok
    return EXIT_ASSERT if failed else EXIT_OK


def _add_config_args(p):
    p.add_argument("--preset", choices=["unimodal", "trimodal"])
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one configuration field (repeatable)")
    p.add_argument("--scale", type=int, default=1,
                   help="divide the number of samples by this factor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l96varx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="integrate the full two-layer model")
    _add_config_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit a parameterization of the feedback")
    p.add_argument("series")
    p.add_argument("model", choices=["wn", "ar1", "wnd", "varx", "narmax", "zero"])
    p.add_argument("--p", type=int, help="lag order for varx")
    p.add_argument("--cov", choices=["diag", "dense"], default="diag")
    p.add_argument("--full-lags", action="store_true",
                   help="regress on every lag 1..p instead of lag p only")
    p.add_argument("--variant", help="NARMAX variant, 1201 or 1110")
    p.add_argument("--preset-params", action="store_true",
                   help="use the shipped trimodal NARMAX parameters instead of fitting")
    p.add_argument("--forcing", type=float, help="F for the N1110 feature (default: from series)")
    p.add_argument("--report-lags", type=int, default=50)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="run the reduced stochastic model")
    p.add_argument("model")
    p.add_argument("reference", nargs="?", help="reference series for the warm start")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-steps", type=int)
    p.add_argument("--ensemble", type=int, default=1, metavar="M")
    p.add_argument("--zero-history", action="store_true",
                   help="start from x = 0 with zero lag history")
    _add_config_args(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diagnose", help="compute the statistical criteria")
    p.add_argument("data")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--max-lag", type=int, default=1000)
    p.add_argument("--range-from", help="reuse the PDF range of this report.json")
    p.add_argument("--pacf", type=int, metavar="LAG", help="add the PACF of b up to LAG")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("compare", help="distances between two reports")
    p.add_argument("reference")
    p.add_argument("test")
    p.add_argument("--acf-max-lag", type=int)
    p.add_argument("--assert", dest="assert_", metavar="THRESHOLDS",
                   help="thresholds JSON file or shipped set name")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "scale", 1) < 1:
        parser.error("--scale must be >= 1")
    try:
        return args.func(args)
    except DivergenceError as exc:
        _err(f"{exc} (step {exc.step})")
        return EXIT_DIVERGED
    except (ConfigError, ComparisonError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (EstimationError, DataError, NumericalError, StateError) as exc:
        _err(str(exc))
        return EXIT_DATA
    except FileNotFoundError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
