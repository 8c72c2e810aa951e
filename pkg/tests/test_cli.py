from __future__ import annotations

import json

import pytest

from switchlab.cli import main
from switchlab.config import PRESETS, ExperimentConfig, load_config, preset_text
from switchlab.errors import InvalidArgument, NumericsError
from switchlab.experiment import run_experiment

SMOKE = """
name: smoke
process:
  model: random-walk
  increments: {kind: discrete, p_zero: 0.3}
  volume: {sigma_mu: 0.5}
  intertrade: {p0: 0.5}
n: 1000
realizations: 1
seed: 11
orders: [3, 5]
grid: 20
quantities: [volatility, volume, intertrade]
fits:
  - {quantity: volatility, kind: max, side: post, log10_range: [-1.5, -0.2]}
  - {quantity: volatility, kind: max, side: pre, form: finite_singularity, range: [0.001, 0.002]}
conditional: {order: 3, offsets: [0, 1], edges: [-2, 2, 8]}
"""


@pytest.fixture
def smoke_cfg(tmp_path):
    f = tmp_path / "smoke.yaml"
    f.write_text(SMOKE)
    return f


def test_smoke_run_emits_all_files(smoke_cfg, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", str(smoke_cfg), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    for q in ("volatility", "volume", "intertrade"):
        assert f"profile_{q}_max.csv" in names and f"profile_{q}_min.csv" in names
    for f in ("fits.json", "conditional.json", "plots.json", "config.yaml", "manifest.json",
              "conditional_max_k+0.csv", "conditional_min_k+1.csv"):
        assert f in names
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 11 and manifest["config_sha256"] == load_config(str(smoke_cfg)).hash()
    assert set(manifest["files"]) == set(names) - {"manifest.json"}
    fits = json.loads((out / "fits.json").read_text())
    assert fits[0]["error"] is None and "error" in fits[1] and fits[1]["error"]
    cond = json.loads((out / "conditional.json").read_text())
    assert all(c["n_negative"] == 0 for c in cond if c["kind"] == "max" and c["offset"] == 0)


def test_determinism_across_threads(smoke_cfg, tmp_path):
    cfg = load_config(str(smoke_cfg))
    cfg.realizations = 5
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run_experiment(cfg, a, threads=1)
    run_experiment(cfg, b, threads=1)
    run_experiment(cfg, c, threads=4)
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes() == (c / f.name).read_bytes()


def test_json_format(smoke_cfg, tmp_path):
    out = tmp_path / "j"
    assert main(["run", str(smoke_cfg), "--out", str(out), "--format", "json"]) == 0
    prof = json.loads((out / "profile_volatility_max.json").read_text())
    assert len(prof["mean"]) == len(prof["count"]) == 20


def test_existing_output_refused(smoke_cfg, tmp_path):
    out = tmp_path / "r"
    assert main(["run", str(smoke_cfg), "--out", str(out)]) == 0
    assert main(["run", str(smoke_cfg), "--out", str(out)]) == 2
    assert main(["run", str(smoke_cfg), "--out", str(out), "--force", "--seed", "12"]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 12


def test_failed_run_leaves_nothing(tmp_path, monkeypatch, capsys):
    import switchlab.experiment as ex

    def boom(*a, **k):
        raise NumericsError("synthetic failure", lag=3)

    monkeypatch.setattr(ex, "gen_qmf", boom)
    cfg = tmp_path / "q.yaml"
    cfg.write_text("process: {model: qmf}\nn: 500\norders: [5]\n")
    out = tmp_path / "q"
    assert main(["run", str(cfg), "--out", str(out)]) == 4
    assert not out.exists() and list(tmp_path.iterdir()) == [cfg]
    assert "error in simulate" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["run", "nope"], ["run", "fig1", "--n", "5"],
                                  ["fit", "missing.csv", "--range", "0.01", "0.1"]])
def test_invalid_arguments_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_simulate_profile_fit_chain(tmp_path, capsys):
    path = tmp_path / "p.csv"
    prof = tmp_path / "prof.csv"
    assert main(["simulate", "--n", "50001", "--seed", "3", "--out", str(path)]) == 0
    assert main(["profile", str(path), "--grid", "100", "--out", str(prof)]) == 0
    assert prof.read_text().startswith("epsilon_center,mean,count\n")
    assert main(["fit", str(prof), "--side", "post", "--log10-range", "-1.7", "-0.4"]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["form"] == "power_law" and fit["n_points"] > 3


def test_simulate_json_and_qmf(tmp_path):
    out = tmp_path / "q.json"
    assert main(["simulate", "--model", "qmf", "--n", "300", "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["price"]) == 300
    assert main(["profile", str(out), "--orders", "5", "--grid", "10", "--out", str(tmp_path / "x.csv")]) == 0


def test_correlate(tmp_path, capsys):
    ticks = tmp_path / "t.csv"
    assert main(["simulate", "--n", "100001", "--volume-corr", "0.2", "--n-cal", "100000",
                 "--increments", "discrete", "--p-zero", "0.5", "--p0", "0.5", "--ticks",
                 "--out", str(ticks)]) == 0
    assert main(["correlate", str(ticks)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["corr_absdp_v"]["r"] - 0.2) < 0.02
    z = rep["zero_intervals"]
    assert abs(z["conditional"] - 0.5) < 3 * (0.25 / z["n_continuations"]) ** 0.5


def test_correlate_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,price,volume\n1,10,1\n2,x,1\n")
    assert main(["correlate", str(bad)]) == 3
    assert "row 3" in capsys.readouterr().err
    short = tmp_path / "short.csv"
    short.write_text("timestamp,price,volume\n1,10,1\n2,11,1\n3,12,1\n")
    assert main(["correlate", str(short)]) == 3
    assert "at least 4" in capsys.readouterr().err


@pytest.mark.parametrize("name", PRESETS)
def test_presets_round_trip(name):
    cfg = load_config(name)
    again = ExperimentConfig.from_yaml(cfg.to_yaml())
    assert again.to_dict() == cfg.to_dict() and again.hash() == cfg.hash()
    assert preset_text(name).startswith("#")


@pytest.mark.parametrize("text", [
    "n: 100\nbogus: 1\n",
    "process: {model: levy}\n",
    "quantities: [volume]\n",
    "kinds: [max, both]\n",
    "fits: [{quantity: volatility, side: post, range: [0.1, 0.01]}]\n",
    "- 1\n- 2\n",
    "n: [1\n",
])
def test_bad_configs(text):
    with pytest.raises(InvalidArgument):
        ExperimentConfig.from_yaml(text)
