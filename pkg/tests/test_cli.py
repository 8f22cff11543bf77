import csv
import json

import numpy as np
import pytest

from augarch.cli import main
from augarch.config import load_config, parse_config
from augarch.exceptions import ConfigError

GARCH = {"family": "garch", "params": {"omega": 0.1, "alpha": 0.1, "beta": 0.8}}


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="experiment"):
        parse_config({"model": GARCH, "experiment": {"kind": "simulate", "n": 5, "bogus": 1}})
    with pytest.raises(ConfigError):
        parse_config({"model": GARCH, "experiment": {"kind": "simulate"}, "extra": 1})
    with pytest.raises(ConfigError):
        parse_config({"model": {**GARCH, "c": {"k0": 1}}, "experiment": {"kind": "simulate"}})
    with pytest.raises(ConfigError):
        parse_config({"model": GARCH, "experiment": {"kind": "nope"}})


def test_config_seed_range():
    parse_config({"model": GARCH, "experiment": {"kind": "simulate"}, "seed": (1 << 64) - 1})
    with pytest.raises(ConfigError):
        parse_config({"model": GARCH, "experiment": {"kind": "simulate"}, "seed": 1 << 64})


def test_config_echo_round_trip(tmp_path):
    cfg = parse_config({"model": GARCH, "experiment": {"kind": "l2decay"}, "seed": 3})
    eff = cfg.effective()
    assert eff["experiment"]["reps"] == 100_000
    assert eff["experiment"]["m"] == list(range(1, 25))
    assert parse_config(eff).effective() == eff
    assert load_config(_write(tmp_path, eff)).effective() == eff


def test_simulate_iid_has_unit_volatility(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {"model": {"family": "iid"}, "experiment": {"kind": "simulate", "n": 50}, "output": str(out)})
    assert main(["run", "--config", str(cfg)]) == 0
    rows = _read_csv(out / "path.csv")
    assert len(rows) == 50
    assert all(float(r["sigma2"]) == 1.0 for r in rows)
    assert all(r["y"] == r["eps"] for r in rows)
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["checksums"]) == {"config.json", "path.csv", "report.json"}
    assert json.loads((out / "config.json").read_text())["experiment"]["n"] == 50


def test_seed_and_out_overrides(tmp_path):
    cfg = _write(tmp_path, {"model": GARCH, "experiment": {"kind": "simulate", "n": 20}, "output": str(tmp_path / "a")})
    assert main(["run", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path / "b")]) == 0
    echo = json.loads((tmp_path / "b" / "config.json").read_text())
    assert echo["seed"] == 9 and not (tmp_path / "a").exists()


def test_refused_experiment_exits_two_and_cleans_up(tmp_path, capsys):
    out = tmp_path / "out"
    doc = {
        "model": {"family": "igarch", "params": {"omega": 0.1, "alpha": 0.1}},
        "transform": {"kind": "signed-power", "nu": 1.0},
        "experiment": {"kind": "clt", "n": 100, "reps": 100},
        "output": str(out),
    }
    assert main(["run", "--config", str(_write(tmp_path, doc))]) == 2
    assert "refused" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_bad_config_exits_one(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["run", "--config", str(p)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1


def test_describe(capsys):
    assert main(["describe", "garch"]) == 0
    assert "garch" in capsys.readouterr().out
    assert main(["describe", "nope"]) == 1


@pytest.mark.parametrize("experiment", [
    {"kind": "couple", "n": 200, "m": [1, 5]},
    {"kind": "l2decay", "m": [1, 2, 3, 4, 5, 6], "reps": 20_000},
    {"kind": "acov", "max_lag": 3, "budget": 20_000},
])
def test_csv_identical_across_worker_counts(tmp_path, experiment):
    cfg = _write(tmp_path, {"model": GARCH, "experiment": experiment, "seed": 5})
    for w in (1, 2):
        assert main(["run", "--config", str(cfg), "--workers", str(w), "--out", str(tmp_path / f"w{w}")]) == 0
    for f in sorted((tmp_path / "w1").glob("*.csv")):
        assert f.read_bytes() == (tmp_path / "w2" / f.name).read_bytes()


def test_conditions_report_names(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {"model": GARCH, "experiment": {"kind": "conditions", "budget": 10_000}, "output": str(out)})
    assert main(["run", "--config", str(cfg)]) == 0
    verdicts = json.loads((out / "report.json").read_text())["result"]["verdicts"]
    assert verdicts["EQ5"] == "holds"
    assert verdicts["EQ10(nu=1)"] == "holds"
    assert "EQ20(mu=3)" in verdicts


def test_couple_identity_column(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {"model": GARCH, "experiment": {"kind": "couple", "n": 100, "m": [3]}, "output": str(out)})
    assert main(["run", "--config", str(cfg)]) == 0
    rows = _read_csv(out / "coupling.csv")
    res = np.array([float(r["residual"]) for r in rows])
    ident = np.array([float(r["identity"]) for r in rows])
    assert np.all(np.abs(res - ident) <= 1e-10 * (1 + np.abs(res)))
