"""End-to-end runs: simulate, detect, stack, fit and write a run directory."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import math
import os
import platform
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, _kernels, gp
from .config import KINDS, ExperimentConfig, ProcessConfig
from .errors import InsufficientData, InvalidArgument, SwitchlabError
from .extrema import find_extrema
from .fitting import fit_finite_singularity, fit_power_law
from .ingest import corr_report, parse_ticks, zero_interval_fraction
from .processes import (PricePath, attach_intertrade, attach_volume, calibrate_sigma_mu, gen_gbm,
                        gen_qmf, gen_random_walk)
from .profiles import (ConditionalDistribution, StackedProfile, conditional_increment_stats,
                       local_volatility, merge_profiles, stack_profile, trends_by_order)
from .seeding import child_seed
from .stats import pearson_corr

FORMATS = ("csv", "json")
PATH_HEADER = ("t", "price", "volume", "intertrade")


@contextlib.contextmanager
def stage(name: str):
    """Tag errors raised inside with the pipeline stage they came from."""
    try:
        yield
    except SwitchlabError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise


def jsonable(x):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- simulation


def simulate(process: ProcessConfig, n: int, seed: int, sigma_mu: float | None = None) -> PricePath:
    """One realization of the configured process with volume and intertrade attached."""
    if process.model == "random-walk":
        path = gen_random_walk(n, process.increment_spec(), seed)
    elif process.model == "gbm":
        path = gen_gbm(n, process.drift, process.vol, seed)
    else:
        path = gen_qmf(n, process.qmf_params(), seed)
    if process.volume is not None:
        s = process.volume.get("sigma_mu", sigma_mu)
        if s is None:
            raise InvalidArgument("volume noise scale not set; calibrate first")
        path = attach_volume(path, float(s), seed)
    if process.intertrade is not None:
        path = attach_intertrade(path, float(process.intertrade["p0"]),
                                 float(process.intertrade.get("rate", 1.0)), seed)
    return path


def calibrate(process: ProcessConfig, seed: int) -> dict | None:
    """Resolve the volume noise scale once per run."""
    vol = process.volume
    if vol is None:
        return None
    if "sigma_mu" in vol:
        return {"sigma_mu": float(vol["sigma_mu"]), "calibrated": False}
    n_cal = int(vol.get("n_cal", 1_000_000))
    cal_seed = child_seed(seed, "calibration")
    bare = ProcessConfig(**{**vars(process), "volume": None, "intertrade": None})
    inc = simulate(bare, n_cal + 1, cal_seed).increments
    s = calibrate_sigma_mu(float(vol["target_corr"]), n_cal, cal_seed, increments=inc)
    check = attach_volume(PricePath(np.concatenate([[0.0], np.cumsum(inc)])), s, cal_seed)
    return {
        "sigma_mu": s,
        "calibrated": True,
        "target_corr": float(vol["target_corr"]),
        "achieved_corr": pearson_corr(np.abs(inc), check.volume),
        "n_cal": n_cal,
    }


def quantity_series(path: PricePath, quantity: str) -> np.ndarray:
    """The stacked quantity on the price-time axis (NaN at t = 0)."""
    if quantity == "volatility":
        return path.time_indexed(local_volatility(path))
    series = path.volume if quantity == "volume" else path.intertrade
    if series is None:
        raise InvalidArgument(f"path has no {quantity} series")
    return path.time_indexed(series)


# ---------------------------------------------------------------- runs


@dataclass
class RunResult:
    config: ExperimentConfig
    profiles: dict = field(default_factory=dict)  # (quantity, kind name) -> StackedProfile
    conditional: dict = field(default_factory=dict)  # (kind name, offset) -> ConditionalDistribution
    fits: list = field(default_factory=list)
    calibration: dict | None = None
    out: Path | None = None

    def profile(self, quantity: str, kind: str = "max") -> StackedProfile:
        return self.profiles[(quantity, kind)]


def _conditional_edges(spec):
    lo, hi, bins = spec.edges
    return np.linspace(float(lo), float(hi), int(bins) + 1)


def _one_realization(config: ExperimentConfig, r: int, sigma_mu):
    seed_r = child_seed(config.seed, "realization", r)
    with stage("simulate"):
        path = simulate(config.process, config.n, seed_r, sigma_mu)
    with stage("extrema"):
        trends = trends_by_order(path.prices, config.orders)
    profiles = {}
    with stage("profiles"):
        for q in config.quantities:
            series = quantity_series(path, q)
            for k in config.kinds:
                profiles[(q, k)] = stack_profile(
                    series, trends, config.grid, config.normalization, kind=KINDS[k],
                    placement=config.placement[q], min_duration=config.min_duration, quantity=q,
                )
    cond = {}
    spec = config.conditional
    if spec is not None:
        with stage("conditional"):
            ext = find_extrema(path.prices, int(spec.order))
            edges = _conditional_edges(spec)
            for k in config.kinds:
                peaks = ext.of_kind(KINDS[k])
                for off in spec.offsets:
                    try:
                        cond[(k, int(off))] = conditional_increment_stats(path.increments, peaks, off, edges=edges)
                    except InsufficientData:
                        pass
    return profiles, cond


def _merge_into(result: RunResult, profiles, cond):
    for key, p in profiles.items():
        result.profiles[key] = merge_profiles(result.profiles[key], p) if key in result.profiles else p
    for key, c in cond.items():
        result.conditional[key] = result.conditional[key].merge(c) if key in result.conditional else c


def _fit_all(config: ExperimentConfig, profiles) -> list[dict]:
    out = []
    for f in config.fits:
        prof = profiles[(f.quantity, f.kind)]
        entry = {"label": f.label, "quantity": f.quantity, "kind": f.kind}
        try:
            with stage("fit"):
                if f.form == "power_law":
                    entry.update(fit_power_law(prof, f.side, f.range, weighted=f.weighted).to_dict())
                else:
                    entry.update(fit_finite_singularity(prof, f.side, f.range).to_dict())
        except InsufficientData as exc:
            # kept as a marked entry so small smoke runs still complete
            entry.update({"form": f.form, "side": f.side, "d_lo": f.range[0], "d_hi": f.range[1],
                          "error": str(exc)})
        out.append(entry)
    return out


def compute(config: ExperimentConfig, threads: int = 1) -> RunResult:
    """Run all realizations and merge them in realization order."""
    if threads < 1:
        raise InvalidArgument(f"threads must be >= 1, got {threads}")
    result = RunResult(config)
    with stage("calibrate"):
        result.calibration = calibrate(config.process, config.seed)
        if config.process.model == "qmf":
            gp.build_cov_table(config.process.qmf_params(), config.n - 1)
    sigma_mu = result.calibration["sigma_mu"] if result.calibration else None
    reals = range(config.realizations)
    if threads == 1:
        for r in reals:
            _merge_into(result, *_one_realization(config, r, sigma_mu))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # map yields in submission order, so the reduction order is fixed
            for parts in pool.map(lambda r: _one_realization(config, r, sigma_mu), reals):
                _merge_into(result, *parts)
    result.fits = _fit_all(config, result.profiles)
    return result


# ---------------------------------------------------------------- writing


def profile_json(prof: StackedProfile) -> dict:
    return {
        "quantity": prof.quantity,
        "kind": "max" if prof.kind == 1 else "min",
        "normalization": prof.normalization,
        "placement": prof.placement,
        "orders": list(prof.orders),
        "n_trends": prof.n_trends,
        "epsilon_center": prof.centers,
        "mean": prof.mean,
        "sem": prof.sem,
        "count": prof.count,
    }


def conditional_json(c: ConditionalDistribution) -> dict:
    return {
        "offset": c.offset,
        "n": c.n,
        "cond_mean": c.cond_mean,
        "cond_sem": c.cond_sem,
        "uncond_mean": c.uncond_mean,
        "skewness": c.skewness() if c.n > 2 and c.moments.m2 > 0 else None,
        "n_negative": c.n_neg,
        "n_positive": c.n_pos,
        "n_zero": c.n_zero,
    }


def _files(result: RunResult, fmt: str) -> dict[str, str]:
    files = {}
    plots = []
    for (q, k), prof in sorted(result.profiles.items()):
        name = f"profile_{q}_{k}.{fmt}"
        files[name] = prof.to_csv() if fmt == "csv" else dump_json(profile_json(prof))
        plots.append({"title": f"{q} around {k}ima", "file": name, "x": "epsilon_center", "y": "mean",
                      "kind": "line", "xlim": [0.0, 2.0]})
    if result.fits:
        files["fits.json"] = dump_json(result.fits)
        for f in result.fits:
            if f.get("error") is None and f["form"] == "power_law":
                plots.append({"title": f["label"], "file": f"profile_{f['quantity']}_{f['kind']}.{fmt}",
                              "x": "|epsilon - 1|", "y": "mean", "kind": "scatter", "xscale": "log",
                              "yscale": "log", "side": f["side"], "xlim": [f["d_lo"], f["d_hi"]],
                              "slope": f["beta"]})
    if result.conditional:
        summary = []
        for (k, off), c in sorted(result.conditional.items()):
            name = f"conditional_{k}_k{off:+d}.csv"
            if fmt == "csv":
                files[name] = c.to_csv()
                plots.append({"title": f"dp(t0{off:+d}) at {k}ima", "file": name, "x": "bin_lo",
                              "y": "density", "kind": "step"})
            summary.append({"kind": k, **conditional_json(c),
                            **({"edges": c.edges, "counts": c.counts} if fmt == "json" else {})})
        files["conditional.json"] = dump_json(summary)
    if result.calibration is not None:
        files["calibration.json"] = dump_json(result.calibration)
    files["plots.json"] = dump_json(plots)
    files["config.yaml"] = result.config.to_yaml()
    return files


def manifest(config: ExperimentConfig, files: dict[str, str]) -> dict:
    return {
        "name": config.name,
        "config_sha256": config.hash(),
        "seed": config.seed,
        "realizations": config.realizations,
        "versions": {"switchlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "backend": _kernels.BACKEND,
        "files": {k: hashlib.sha256(v.encode()).hexdigest() for k, v in sorted(files.items())},
    }


def write_run(result: RunResult, out, fmt: str = "csv", *, overwrite: bool = False) -> Path:
    """Write every output into ``out`` atomically (temp directory, then rename)."""
    if fmt not in FORMATS:
        raise InvalidArgument(f"format must be one of {FORMATS}, got {fmt!r}")
    out = Path(out)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        if not overwrite:
            raise InvalidArgument(f"output {out} exists and is not empty (use --force to replace)")
    files = _files(result, fmt)
    files["manifest.json"] = dump_json(manifest(result.config, files))
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", suffix=".partial", dir=out.parent))
    try:
        for name, text in files.items():
            (tmp / name).write_text(text, encoding="utf-8")
        if out.exists():
            shutil.rmtree(out) if out.is_dir() else out.unlink()
        os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    result.out = out
    return out


def run_experiment(config: ExperimentConfig, out=None, threads: int = 1, fmt: str = "csv",
                   *, overwrite: bool = False) -> RunResult:
    """Compute the run and, if ``out`` is given, write the run directory.

    Nothing is written unless every stage succeeds.
    """
    result = compute(config, threads)
    if out is not None:
        write_run(result, out, fmt, overwrite=overwrite)
    return result


def run_correlate(source, delimiter: str = ",", level: float = 0.95) -> dict:
    """Correlation reports and zero-interval summary for a tick file."""
    with stage("ingest"):
        series = parse_ticks(source, delimiter)
    with stage("correlate"):
        signed, absolute = corr_report(series, level)
        zeros = zero_interval_fraction(series)
    return {
        "n_ticks": len(series),
        "corr_dp_v": signed.to_dict(),
        "corr_absdp_v": absolute.to_dict(),
        "zero_intervals": zeros.to_dict(),
    }


# ---------------------------------------------------------------- path files


def save_path(path: PricePath, fmt: str = "csv") -> str:
    """Serialize a path; the volume/intertrade columns are empty at ``t = 0``."""
    cols = {"t": np.arange(path.n), "price": path.prices}
    for name in ("volume", "intertrade"):
        s = getattr(path, name)
        cols[name] = None if s is None else path.time_indexed(s)
    if fmt == "json":
        return dump_json({"model": path.model, "seed": path.seed,
                          **{k: v for k, v in cols.items() if v is not None}})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [k for k, v in cols.items() if v is not None]
    w.writerow(names)
    for i in range(path.n):
        row = []
        for k in names:
            x = cols[k][i]
            row.append(str(int(x)) if k == "t" else ("" if np.isnan(x) else repr(float(x))))
        w.writerow(row)
    return buf.getvalue()


def load_path(source) -> PricePath:
    """Read :func:`save_path` CSV/JSON or a tick file into a path."""
    text = Path(source).read_text(encoding="utf-8-sig")
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"{source}: invalid JSON ({exc})") from None
        cols = {k: np.array([np.nan if v is None else v for v in data[k]], dtype=np.float64)
                for k in PATH_HEADER if k in data}
    else:
        header = text.split("\n", 1)[0].strip().split(",")
        if set(header) == {"timestamp", "price", "volume"}:
            return parse_ticks(text).to_path()
        if "price" not in header or not set(header) <= set(PATH_HEADER):
            raise InvalidArgument(f"{source}: expected columns {','.join(PATH_HEADER)}")
        rows = list(csv.reader(io.StringIO(text)))[1:]
        rows = [r for r in rows if r]
        try:
            cols = {h: np.array([float(r[i]) if r[i] else np.nan for r in rows]) for i, h in enumerate(header)}
        except (ValueError, IndexError) as exc:
            raise InvalidArgument(f"{source}: malformed path row ({exc})") from None
    if "price" not in cols:
        raise InvalidArgument(f"{source}: no price column")
    extra = {k: cols[k][1:] for k in ("volume", "intertrade") if k in cols}
    return PricePath(cols["price"], **extra)
