import csv
import json
import math

import pytest

from phonon_bjj.cli import main
from phonon_bjj.scenario import (
    OUT_DIR_ENV,
    ConfigError,
    ScenarioConfig,
    derive_params,
    emit_contours,
    format_number,
    load_config,
    preset,
    preset_names,
    resolve_out_dir,
    run_scenario,
    sweep,
)

EXPECTED_PRESETS = {
    "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b", "fig4c", "fig4d",
    "fig5a", "fig5b", "fig6a", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b", "oracle-compare",
}


def small(**kw):
    d = {
        "name": "small",
        "model": "bjj",
        "params": {"g": 0.5},
        "init": {"z": 0.5, "phi": 0.0},
        "span": [0, 60],
        "samples": 61,
        "analyses": ["regime"],
    }
    d.update(kw)
    return d


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_registry_is_complete():
    assert set(preset_names()) == EXPECTED_PRESETS


def test_preset_examples():
    c = preset("fig3a")
    assert c.bjj_params().g == 0.99 and c.bjj_params().delta == 0.0
    assert (c.bjj_init().z, c.bjj_init().phi) == (0.5, 0.0)
    c = preset("fig4c")
    assert c.bjj_params().g == 7.0 and c.bjj_params().delta == 0.0
    assert (c.bjj_init().z, c.bjj_init().phi) == (0.5, math.pi / 2)
    c = preset("fig5b")
    assert c.bjj_params().g == 7.0 and c.bjj_init().phi == math.pi / 2
    assert c.family == {"axis": "init.z", "values": [0.1, 0.55, 0.5, 0.45]}


def test_damped_presets():
    a = preset("fig7a")
    p = a.bjj_params()
    assert (p.gamma, p.g, p.delta0, p.delta_u) == (0.01, 0.9, 0.03, 0.01)
    assert (a.bjj_init().z, a.bjj_init().phi) == (0.5, 0.0)
    b = preset("fig7b")
    p = b.bjj_params()
    assert (p.gamma, p.g, p.delta0, p.delta_u) == (0.01, 6.0, 0.22, 0.01)
    assert b.bjj_init().phi == math.pi / 2


def test_unknown_preset_lists_names():
    with pytest.raises(ConfigError) as info:
        preset("fig9")
    assert "fig3a" in str(info.value) and "oracle-compare" in str(info.value)


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"params": {}}, "params"),
        ({"params": {"g": "big"}}, "params/g"),
        ({"init": {"z": 1.5, "phi": 0.0}}, "init/z"),
        ({"span": [0, 10, 20]}, "span"),
        ({"span": [5, 1]}, "span"),
        ({"model": "quantum"}, "model"),
        ({"analyses": ["validity"]}, "analyses/0"),
        ({"options": {"rel_tol": -1}}, "options/rel_tol"),
        ({"analysis_options": {"window": [50, 10]}}, "analysis_options/window"),
    ],
)
def test_schema_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict(small(**patch))
    assert str(info.value).startswith(field)


def test_physical_config_errors():
    d = preset("oracle-compare").to_dict()
    d["params"]["cavity_damping"] = 0
    with pytest.raises(ConfigError, match="cavity_damping"):
        ScenarioConfig.from_dict(d)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)


def test_format_number_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, 0.0):
        assert float(format_number(x)) == x
    assert format_number(math.nan) == "nan" and format_number(-math.inf) == "-inf"


def test_run_writes_declared_columns(tmp_path):
    b = run_scenario(ScenarioConfig.from_dict(small()), tmp_path)
    rows = read_csv(tmp_path / "small.csv")
    assert rows[0] == ["t", "z", "phi", "H", "I"]
    assert len(rows) == 62 and float(rows[1][1]) == 0.5
    names = sorted(p.name for p in b.files)
    assert names == ["small.analysis.json", "small.csv", "small.provenance.json"]
    prov = json.loads((tmp_path / "small.provenance.json").read_text())
    assert prov["provenance"]["integrator"]["rel_tol"] == 1e-9
    assert prov["config"]["params"]["g"] == 0.5


def test_damped_columns_and_json_format(tmp_path):
    d = small(model="bjj-damped", params={"g": 0.9, "gamma": 0.01})
    run_scenario(ScenarioConfig.from_dict(d), tmp_path, fmt="json")
    cols = json.loads((tmp_path / "small.json").read_text())["columns"]
    assert list(cols) == ["t", "z", "phi", "H", "I", "z_prime", "tau"]


def test_rerun_and_provenance_are_byte_identical(tmp_path):
    cfg = preset("fig3a")
    run_scenario(cfg, tmp_path / "a")
    run_scenario(cfg, tmp_path / "b")
    again = load_config(tmp_path / "a" / "fig3a.provenance.json")
    run_scenario(again, tmp_path / "c")
    for name in ("fig3a.csv", "fig3a.analysis.json", "fig3a.provenance.json"):
        ref = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == ref
        assert (tmp_path / "c" / name).read_bytes() == ref


def test_run_fig3a_and_fig3c_regimes():
    a = run_scenario(preset("fig3a"), write=False).analysis["regime"]
    assert a["phase_mode"] == "zero-phase" and a["sign_changes"] > 5
    c = run_scenario(preset("fig3c"), write=False).analysis["regime"]
    assert c["phase_mode"] == "running-phase" and c["self_trapped"] and c["sign_changes"] == 0


def test_family_must_run_as_sweep():
    with pytest.raises(ConfigError, match="family"):
        run_scenario(preset("fig3b"), write=False)


def test_contours_fig2a(tmp_path):
    path = emit_contours(preset("fig2a"), tmp_path)
    rows = read_csv(path)
    assert rows[0] == ["z", "phi", "H"]
    data = [tuple(map(float, r)) for r in rows[1:]]
    assert len(data) == 40401
    # phi-major: phi constant over the first 201 rows
    assert len({r[1] for r in data[:201]}) == 1 and data[201][1] > data[0][1]
    assert dict(((z, p), h) for z, p, h in data)[(0.0, 0.0)] == 0.5


def test_contours_fig2b_minimum_on_half_pi_line(tmp_path):
    rows = read_csv(emit_contours(preset("fig2b"), tmp_path))[1:]
    z, phi, H = min((tuple(map(float, r)) for r in rows), key=lambda r: r[2])
    assert phi == pytest.approx(math.pi / 2) and z == 0.0


def test_sweep_fig3b_and_fig3d():
    for name, trapped in (("fig3b", False), ("fig3d", True)):
        cfg = preset(name)
        res = sweep(cfg, "init.z", cfg.family["values"], write=False)
        assert [r["self_trapped"] for r in res.rows] == [trapped] * 5
        assert not res.inconclusive


def test_g_sweep_flips_between_one_and_one_point_one(tmp_path):
    cfg = ScenarioConfig.from_dict(small(span=[0, 200], samples=201, analysis_options={"window": [20, 200]}))
    res = sweep(cfg, "params.g", [0.9, 1.0, 1.1], tmp_path)
    assert [r["mst"] for r in res.rows] == [False, False, True]
    assert res.rows[0]["self_trapped"] is False and res.rows[2]["self_trapped"] is True
    rows = read_csv(res.summary_path)
    assert rows[0][:4] == ["index", "value", "H0", "mst"]
    assert [r[3] for r in rows[1:]] == ["false", "false", "true"]
    assert (tmp_path / "small-02.csv").exists()


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = ScenarioConfig.from_dict(small())
    sweep(cfg, "init.z", [0.1, 0.2], tmp_path / "a", jobs=1)
    sweep(cfg, "init.z", [0.1, 0.2], tmp_path / "b", jobs=2)
    for name in ("small.sweep.csv", "small-00.csv", "small-01.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_rejects_non_scalar_axis():
    cfg = ScenarioConfig.from_dict(small())
    with pytest.raises(ConfigError, match="scalar"):
        sweep(cfg, "span", [1.0], write=False)
    with pytest.raises(ConfigError, match="no such field"):
        sweep(cfg, "params.nope", [1.0], write=False)


def test_derive_params_oracle():
    # equal Kerr and exchange approximants give g = 1; equal shifted frequencies give delta = 0
    rec = derive_params(preset("oracle-compare"))
    p = rec["bjj"]
    assert p["g"] == pytest.approx(1.0) and p["delta0"] == 0.0
    assert p["J"] == pytest.approx(4e-5) and p["N_T"] == pytest.approx(100.0)
    assert rec["validity"]["all_passed"]


def test_out_dir_precedence(tmp_path, monkeypatch):
    cfg = ScenarioConfig.from_dict(small(output={"dir": str(tmp_path / "cfg")}))
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)
    assert resolve_out_dir(None, cfg) == tmp_path / "cfg"
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env"))
    assert resolve_out_dir(None, cfg) == tmp_path / "env"
    assert resolve_out_dir(tmp_path / "arg", cfg) == tmp_path / "arg"


def test_cli_simulate_preset(tmp_path, capsys):
    assert main(["simulate", "--preset", "fig3a", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig3a.csv").exists()
    assert "fig3a.provenance.json" in capsys.readouterr().out


def test_cli_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path))
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(small()))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert (tmp_path / "small.csv").exists()


def test_cli_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(small(params={"g": 1.0, "gamma": -1})))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "params/gamma" in capsys.readouterr().err
    assert main(["simulate", "--preset", "nope"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == 2


def test_cli_inconclusive_exit(tmp_path):
    cfg = tmp_path / "short.json"
    cfg.write_text(json.dumps(small(span=[0, 1], samples=11)))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 4


def test_cli_sweep_contours_and_presets(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps(small()))
    assert main(["sweep", "--config", str(cfg), "--axis", "init.z", "--values", "0.2,0.4", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "small.sweep.csv").exists()
    assert main(["sweep", "--config", str(cfg), "--axis", "span", "--values", "1", "--out", str(tmp_path)]) == 2
    assert main(["contours", "--config", "fig2a", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig2a.contours.csv").exists()
    assert main(["presets"]) == 0
    assert "oracle-compare" in capsys.readouterr().out
    assert main(["derive-params", "--config", "oracle-compare"]) == 0
