"""Command-line interface: ``switchlab {simulate,profile,fit,correlate,run}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import KINDS, PRESETS, ProcessConfig, load_config
from .errors import (InsufficientData, InvalidArgument, NumericsError, SwitchlabError, TickDataError,
                     UndefinedCorrelation)
from .experiment import (FORMATS, calibrate, dump_json, load_path, profile_json, quantity_series,
                         run_correlate, run_experiment, save_path, simulate)
from .fitting import SIDES, fit_finite_singularity, fit_power_law
from .ingest import path_to_ticks, serialize_ticks
from .profiles import NORMALIZATIONS, PLACEMENTS, QUANTITIES, StackedProfile, stack_profile, trends_by_order

EXIT_OK, EXIT_INVALID, EXIT_DATA, EXIT_NUMERICS = 0, 2, 3, 4


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, NumericsError):
        return EXIT_NUMERICS
    if isinstance(exc, (TickDataError, InsufficientData, UndefinedCorrelation)):
        return EXIT_DATA
    return EXIT_INVALID


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def _orders(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"orders must be comma-separated integers, got {text!r}") from None


def cmd_simulate(args) -> int:
    volume = None
    if args.sigma_mu is not None:
        volume = {"sigma_mu": args.sigma_mu}
    elif args.volume_corr is not None:
        volume = {"target_corr": args.volume_corr, "n_cal": args.n_cal}
    proc = ProcessConfig(
        model=args.model,
        increments={"kind": args.increments, "p_zero": args.p_zero, "rho": args.rho},
        drift=args.drift, vol=args.vol, phi=args.phi, sigma2=args.sigma2, volume=volume,
        intertrade=None if args.p0 is None else {"p0": args.p0, "rate": args.rate},
    )
    cal = calibrate(proc, args.seed)
    path = simulate(proc, args.n, args.seed, cal["sigma_mu"] if cal else None)
    text = serialize_ticks(path_to_ticks(path)) if args.ticks else save_path(path, args.format)
    _emit(text, args.out)
    return EXIT_OK


def cmd_profile(args) -> int:
    path = load_path(args.input)
    placement = args.placement or ("end" if args.quantity == "intertrade" else "mid")
    prof = stack_profile(
        quantity_series(path, args.quantity), trends_by_order(path.prices, args.orders), args.grid,
        args.normalization, kind=KINDS[args.kind], placement=placement,
        min_duration=args.min_duration, quantity=args.quantity,
    )
    _emit(prof.to_csv() if args.format == "csv" else dump_json(profile_json(prof)), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    text = Path(args.profile).read_text(encoding="utf-8")
    prof = StackedProfile.from_csv(text)
    if args.log10_range is not None:
        d_range = (10.0 ** args.log10_range[0], 10.0 ** args.log10_range[1])
    elif args.range is not None:
        d_range = tuple(args.range)
    else:
        raise InvalidArgument("give --range or --log10-range")
    if args.form == "power_law":
        fit = fit_power_law(prof, args.side, d_range, weighted=args.weighted)
    else:
        fit = fit_finite_singularity(prof, args.side, d_range)
    _emit(dump_json(fit.to_dict()), args.out)
    return EXIT_OK


def cmd_correlate(args) -> int:
    report = run_correlate(args.input, args.delimiter, args.level)
    _emit(dump_json(report), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.realizations is not None:
        config.realizations = args.realizations
    if args.n is not None:
        config.n = args.n
    config.validate()
    out = args.out or Path("runs") / f"{config.name}-seed{config.seed}"
    result = run_experiment(config, out, threads=args.threads, fmt=args.format, overwrite=args.force)
    print(f"wrote {result.out}")
    for f in result.fits:
        if f.get("error"):
            print(f"  {f['label']}: {f['error']}")
        else:
            print(f"  {f['label']}: beta = {f['beta']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="switchlab", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate one synthetic path")
    p.add_argument("--model", choices=("random-walk", "gbm", "qmf"), default="random-walk")
    p.add_argument("--n", type=int, default=100_001, help="number of prices (increments + 1)")
    p.add_argument("--increments", default="gaussian-unit",
                   choices=("gaussian-unit", "discrete", "lag1-anticorrelated"))
    p.add_argument("--p-zero", type=float, default=0.0, help="zero-increment mass (discrete)")
    p.add_argument("--rho", type=float, default=0.0, help="lag-1 coefficient (lag1-anticorrelated)")
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--vol", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.1)
    p.add_argument("--sigma2", type=float, default=5.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sigma-mu", type=float, help="volume noise scale")
    g.add_argument("--volume-corr", type=float, help="target corr(|dp|, v); calibrates the noise scale")
    p.add_argument("--n-cal", type=int, default=1_000_000, help="calibration path length")
    p.add_argument("--p0", type=float, help="attach intertrade times with this zero-atom mass")
    p.add_argument("--rate", type=float, default=1.0, help="intertrade Poisson rate")
    p.add_argument("--ticks", action="store_true", help="write a timestamp,price,volume tick file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("profile", help="stack one quantity of a path file around its extrema")
    p.add_argument("input", help="path file from 'simulate' or a tick file")
    p.add_argument("--quantity", choices=QUANTITIES, default="volatility")
    p.add_argument("--orders", type=_orders, default=[10, 20, 50, 100])
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="per-window")
    p.add_argument("--kind", choices=tuple(KINDS), default="max")
    p.add_argument("--placement", choices=PLACEMENTS)
    p.add_argument("--min-duration", type=int, default=5)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("fit", help="fit a profile CSV on one side of the peak")
    p.add_argument("profile")
    p.add_argument("--side", choices=SIDES, default="post")
    p.add_argument("--form", choices=("power_law", "finite_singularity"), default="power_law")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--range", type=float, nargs=2, metavar=("D_LO", "D_HI"))
    g.add_argument("--log10-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--weighted", action="store_true", help="weight bins by sample count")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("correlate", help="price/volume correlations of a tick file")
    p.add_argument("input")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("run", help=f"run a preset ({', '.join(PRESETS)}) or a YAML config")
    p.add_argument("config")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--realizations", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--force", action="store_true", help="replace an existing output directory")
    p.set_defaults(func=cmd_run)

    for name, sp in sub.choices.items():
        sp.add_argument("--out", help="output directory" if name == "run" else "output file (default: stdout)")
        sp.add_argument("--format", choices=FORMATS, default="json" if name in ("fit", "correlate") else "csv")
        sp.add_argument("--seed", type=int, default=None if name == "run" else 0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SwitchlabError as exc:
        where = getattr(exc, "stage", None)
        prefix = f"error in {where}" if where else "error"
        print(f"switchlab: {prefix}: {exc}", file=sys.stderr)
        return exit_code(exc)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"switchlab: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
