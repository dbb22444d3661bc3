"""End-to-end tests of the experiment runner and the command line."""

import csv
import json
from pathlib import Path

import pytest

from latticecf.cli import main
from latticecf.experiments import (
    ConfigError,
    ExperimentConfig,
    PRESETS,
    get_preset,
    load_config,
    preset_catalog,
    run_experiment,
)

SIM_COLUMNS = [
    "terminal", "scheme", "family", "lattice_dim", "n_blocks", "block_dim",
    "block_count", "overload_count", "overload_rate", "e_q_variance",
    "z_eq_variance", "z_eq_target", "residual_var", "decode_max_err",
    "gamma", "beta", "sigma2_lambda1_target", "sigma2_lambda1_realized",
    "sigma2_lambda0_target", "sigma2_lambda0_realized", "sigma2_lambda2",
    "margin_requested", "margin_realized", "chain_adjusted",
    "recombination_mismatch_count", "common_only_residual_var",
    "corr_eq_yr", "seed",
]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def small_region_config(**overrides):
    base = {
        "kind": "region",
        "channel": {"p1_db": 10, "p2_db": 5, "pr_db": 5,
                    "h1_sq": 2.0, "h2_sq": 0.5},
        "schemes": ["LCF1", "LCF2"],
        "grids": {"alpha": 21, "nu": 11, "eta": 7},
    }
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


def test_config_round_trip():
    for name, preset in PRESETS.items():
        clone = ExperimentConfig.from_dict(preset.to_dict())
        assert clone == preset, name


def test_from_dict_rejections():
    good = small_region_config()
    assert good.kind == "region"
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "nope"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "region", "schemes": ["LCF1"],
                                    "bogus_key": 1})
    with pytest.raises(ConfigError):  # channel is required for regions
        ExperimentConfig.from_dict({"kind": "region", "schemes": ["LCF1"]})
    with pytest.raises(ConfigError):  # unknown scheme
        small_region_config(schemes=["LCF1", "XYZ"])
    with pytest.raises(ConfigError):  # simulate takes exactly one CF scheme
        small_region_config(kind="simulate", schemes=["LCF1", "LCF2"])
    with pytest.raises(ConfigError):
        small_region_config(kind="simulate", schemes=["DF"])
    with pytest.raises(ConfigError):  # missing channel field
        ExperimentConfig.from_dict({
            "kind": "region", "schemes": ["LCF1"],
            "channel": {"p1_db": 10, "p2_db": 5, "pr_db": 5, "h1_sq": 2.0}})
    with pytest.raises(ConfigError):
        small_region_config(alpha=1.5)
    with pytest.raises(ConfigError):
        small_region_config(grids={"alpha": 0})


def test_kind_dash_normalization():
    cfg = ExperimentConfig.from_dict({
        "kind": "equal-rate", "schemes": ["DF"], "snr_db": [0, 10]})
    assert cfg.kind == "equal_rate"


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "region",\n  "schemes": [}\n')
    with pytest.raises(ConfigError) as err:
        load_config(bad)
    assert "line 2" in str(err.value)


def test_presets_complete_and_catalog():
    assert set(PRESETS) == {"fig5a", "fig5b", "fig6", "fig7a", "fig7b",
                            "fig8a", "fig8b", "fig8c", "fig8d"}
    catalog = preset_catalog()
    for name in PRESETS:
        assert name in catalog
    assert get_preset("fig6").kind == "equal_rate"
    with pytest.raises(ConfigError):
        get_preset("fig99")


def test_region_run_outputs(tmp_path):
    cfg = small_region_config()
    written = run_experiment(cfg, out=str(tmp_path / "reg"), no_plot=True)
    names = sorted(Path(p).name for p in written)
    assert names == ["reg_lcf1.csv", "reg_lcf2.csv"]
    rows = read_rows(tmp_path / "reg_lcf1.csv")
    assert rows[0] == ["scheme", "eta", "alpha", "nu", "r12", "r21"]
    assert len(rows) == 1 + 7
    assert rows[1][0] == "LCF1" and rows[1][3] == "nan"
    lcf2 = read_rows(tmp_path / "reg_lcf2.csv")
    assert lcf2[1][0] == "LCF2" and lcf2[1][3] != "nan"


def test_region_plot_toggle(tmp_path):
    cfg = small_region_config(grids={"alpha": 11, "nu": 5, "eta": 5})
    written = run_experiment(cfg, out=str(tmp_path / "withplot"))
    assert any(p.endswith("withplot.png") for p in written)
    assert (tmp_path / "withplot.png").stat().st_size > 0


def test_csv_bytes_reproducible(tmp_path):
    cfg = small_region_config()
    run_experiment(cfg, out=str(tmp_path / "a"), no_plot=True)
    run_experiment(cfg, out=str(tmp_path / "b"), no_plot=True)
    for scheme in ("lcf1", "lcf2"):
        a = (tmp_path / f"a_{scheme}.csv").read_bytes()
        b = (tmp_path / f"b_{scheme}.csv").read_bytes()
        assert a == b
        assert b"\r" not in a  # unix line endings regardless of platform


def test_equal_rate_run(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "kind": "equal_rate", "schemes": ["AF", "DF", "LCF1", "OUTER"],
        "snr_db": [0, 10], "grids": {"alpha": 51}})
    written = run_experiment(cfg, out=str(tmp_path / "eq"), no_plot=True)
    rows = read_rows(tmp_path / "eq.csv")
    assert rows[0] == ["snr_dB", "r_AF", "r_DF", "r_LCF1", "r_outer"]
    assert len(rows) == 3
    assert [Path(p).name for p in written] == ["eq.csv"]


def test_distortion_run(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "kind": "distortion",
        "channel": {"p1_db": 10, "p2_db": 5, "pr_db": 5,
                    "h1_sq": 2.0, "h2_sq": 0.5},
        "schemes": ["LCF1", "LCF2"], "alpha": 0.5, "nu": 0.5})
    run_experiment(cfg, out=str(tmp_path / "dist"))
    rows = read_rows(tmp_path / "dist.csv")
    assert rows[0] == ["scheme", "alpha", "nu", "beta", "d1_min", "d2_min",
                       "gamma1_star", "gamma2_star", "r_wz"]
    by_scheme = {r[0]: r for r in rows[1:]}
    assert by_scheme["LCF1"][2] == "nan"
    assert float(by_scheme["LCF1"][4]) == pytest.approx(2.161142514260627)
    assert float(by_scheme["LCF2"][4]) == pytest.approx(2.105544749753462)


def test_simulate_run_columns_and_determinism(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "kind": "simulate",
        "channel": {"p1_db": 20, "p2_db": 20, "pr_db": 20,
                    "h1_sq": 1.0, "h2_sq": 1.0},
        "schemes": ["LCF1"], "alpha": 0.5, "family": "E8",
        "mc": {"n_blocks": 6, "block_dim": 400, "seed": 5}})
    run_experiment(cfg, out=str(tmp_path / "mc"))
    rows = read_rows(tmp_path / "mc.csv")
    assert rows[0] == SIM_COLUMNS
    assert len(rows) == 3  # header plus one row per terminal
    assert {r[0] for r in rows[1:]} == {"1", "2"}
    assert all(r[1] == "LCF1" for r in rows[1:])
    assert all(r[27] == "5" for r in rows[1:])
    run_experiment(cfg, out=str(tmp_path / "mc2"))
    assert (tmp_path / "mc.csv").read_bytes() == (tmp_path / "mc2.csv").read_bytes()
    run_experiment(cfg, out=str(tmp_path / "mc3"), seed=6)
    assert (tmp_path / "mc.csv").read_bytes() != (tmp_path / "mc3.csv").read_bytes()


def test_cli_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "fig5a" in out and "fig8d" in out


def test_cli_region_preset(tmp_path, capsys):
    code = main(["region", "--preset", "fig7a",
                 "--out", str(tmp_path / "fig7a"),
                 "--grid-alpha", "21", "--grid-nu", "11", "--grid-eta", "7",
                 "--no-plot"])
    assert code == 0
    out = capsys.readouterr().out
    assert sorted(p.name for p in tmp_path.iterdir()) == \
        ["fig7a_lcf1.csv", "fig7a_lcf2.csv"]
    assert "fig7a_lcf1.csv" in out


def test_cli_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "kind": "equal_rate", "schemes": ["DF"], "snr_db": [0, 5],
        "grids": {"alpha": 41}}))
    code = main(["equal-rate", "--config", str(path),
                 "--out", str(tmp_path / "dfcurve"), "--no-plot"])
    assert code == 0
    assert (tmp_path / "dfcurve.csv").exists()


def test_cli_error_paths(tmp_path, capsys):
    # no config and no preset
    assert main(["region"]) == 2
    assert "error:" in capsys.readouterr().err
    # unknown preset
    assert main(["region", "--preset", "fig99"]) == 2
    capsys.readouterr()
    # config and preset together
    cfgpath = tmp_path / "c.json"
    cfgpath.write_text("{}")
    assert main(["region", "--preset", "fig7a", "--config", str(cfgpath)]) == 2
    capsys.readouterr()
    # malformed json reports the position
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["region", "--config", str(bad)]) == 2
    assert "column" in capsys.readouterr().err
    # kind mismatch between subcommand and config file
    mism = tmp_path / "mism.json"
    mism.write_text(json.dumps({"kind": "equal_rate", "schemes": ["DF"],
                                "snr_db": [0]}))
    assert main(["region", "--config", str(mism)]) == 2
    capsys.readouterr()


def test_cli_infeasible_returns_3(tmp_path, capsys):
    path = tmp_path / "deg.json"
    path.write_text(json.dumps({
        "kind": "distortion",
        "channel": {"p1_db": 10, "p2_db": 5, "pr_db": 5,
                    "h1_sq": 2.0, "h2_sq": 0.5},
        "schemes": ["LCF2"], "alpha": 0.5, "nu": 0.0}))
    assert main(["distortion", "--config", str(path),
                 "--out", str(tmp_path / "deg")]) == 3
    assert "infeasible:" in capsys.readouterr().err


def test_cli_asymptotics_default(tmp_path, capsys):
    code = main(["asymptotics", "--out", str(tmp_path / "asym"), "--no-plot"])
    assert code == 0
    rows = read_rows(tmp_path / "asym.csv")
    assert rows[0] == ["snr_dB", "r_df_low", "r_df_high",
                       "r_lcf1_low", "r_lcf1_high"]
    assert len(rows) == 52  # 0..50 dB inclusive plus header


def test_cli_default_stem_is_kind(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["asymptotics", "--no-plot"]) == 0
    assert (tmp_path / "asymptotics.csv").exists()
