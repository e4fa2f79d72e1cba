import csv
import json
import logging
from dataclasses import replace

import numpy as np
import pytest

from contactlab.scenarios import cli, registry
from contactlab.scenarios.report import (SCHEMA_VERSION, Check, Payload, Report, check_le,
                                         export_plotdata, strip_wall_time)

FAST = "reeb-ot-closed-form"


def test_registry_contents():
    rows = registry.list_scenarios()
    assert len(rows) >= 12
    assert len({r[0] for r in rows}) == len(rows)
    for name, anchor, desc in rows:
        assert anchor and desc
        assert anchor in registry.CLAIMS


def test_filter_by_anchor():
    rows = registry.list_scenarios("monodromy-prescription")
    assert len(rows) >= 2
    assert all("monodromy-prescription" in r[1] for r in rows)


def test_expected_fail_probes_are_registered():
    probes = [s for s in registry.SCENARIOS if s.expected == "expected-fail"]
    assert {"bourgeois-eps-zero", "prescription-oversized"} <= {s.name for s in probes}


def test_unknown_scenario():
    with pytest.raises(KeyError):
        registry.run_scenario("no-such-scenario")


def test_invalid_override_lists_valid_keys():
    with pytest.raises(KeyError, match="valid keys"):
        registry.run_scenario(FAST, {"colour": "red"})


@pytest.mark.parametrize("bad", [{"samples": 0}, {"step": 2.0}, {"tol_scale": -1.0}])
def test_out_of_range_overrides(bad):
    with pytest.raises(ValueError):
        registry.run_scenario(FAST, bad)


def test_step_override_sets_steps():
    ctx = registry.get("area-law-circle").context({"step": 0.01})
    assert ctx.steps == 100


def test_report_is_deterministic():
    a = registry.run_scenario("milnor-checks").to_json()
    b = registry.run_scenario("milnor-checks").to_json()
    assert strip_wall_time(a) == strip_wall_time(b)
    assert json.loads(a)["schema_version"] == SCHEMA_VERSION


def test_checks_sorted_and_consistent():
    rep = registry.run_scenario("geiges-gluing")
    d = rep.to_dict()
    ids = [c["id"] for c in d["checks"]]
    assert ids == sorted(ids)
    for c in d["checks"]:
        if c["expect"] == "pass" and isinstance(c["tol"], float) and isinstance(c["value"], float):
            assert c["passed"] == (c["value"] <= c["tol"])


def test_expected_fail_counts_as_ok():
    rep = registry.run_scenario("bourgeois-eps-zero")
    assert rep.ok
    probe = [c for c in rep.checks if c.expect == "fail"]
    assert probe and not any(c.passed for c in probe)


def test_check_semantics():
    assert Check("a", "x", 1.0, 2.0, True).ok
    assert not Check("a", "x", 3.0, 2.0, False).ok
    assert Check("a", "x", 3.0, 2.0, False, "fail").ok
    assert not Check("a", "x", 1.0, 2.0, True, "fail").ok
    assert Check("a", "x", 1.0, None, False, "measured").ok
    with pytest.raises(ValueError):
        Check("a", "x", 1.0, None, True, "maybe")


def test_report_without_checks_is_not_ok():
    assert not Report("s", "a", "d", {}).ok


def test_nonfinite_values_serialize():
    rep = Report("s", "a", "d", {}, [check_le("c", "a", float("nan"), 1.0)])
    d = json.loads(rep.to_json())
    assert d["checks"][0]["value"] == "nan"


def test_export_plotdata(tmp_path):
    rep = registry.run_scenario("holonomy-bourgeois", {"samples": 6, "steps": 40})
    files = export_plotdata(rep, tmp_path)
    assert [f.name for f in files] == ["holonomy-bourgeois__eps-sweep.csv"]
    raw = files[0].read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.reader(raw.decode("utf-8").splitlines()))
    assert rows[0] == ["param", "sup_H", "norm", "fit_residual"]
    assert [float(r[0]) for r in rows[1:]] == [0.01, 0.02, 0.04]


def test_area_law_trajectory_columns(tmp_path):
    rep = registry.run_scenario("area-law-circle", {"samples": 2, "steps": 200})
    files = export_plotdata(rep, tmp_path)
    header = files[0].read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,r,theta,x,y,z"


def test_empty_payload_warns(tmp_path, caplog):
    rep = Report("s", "a", "d", {}, [Check("c", "a", 0.0, 1.0, True)])
    with caplog.at_level(logging.WARNING):
        assert export_plotdata(rep, tmp_path / "out") == []
    assert "no plot payloads" in caplog.text
    assert not (tmp_path / "out").exists()


def test_payload_to_dict():
    p = Payload(["a", "b"], np.array([[1.0, 2.0]]))
    assert p.to_dict() == {"columns": ["a", "b"], "rows": [[1.0, 2.0]]}


# -- CLI -----------------------------------------------------------------------

def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert FAST in out
    assert cli.main(["list", "--format", "json", "--anchor", "monodromy-prescription"]) == 0
    assert len(json.loads(capsys.readouterr().out)) >= 2


def test_cli_run_json_and_csv(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["run", FAST, "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["scenario"] == FAST and d["ok"]
    assert cli.main(["run", FAST, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("scenario,check,anchor")


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "nope"]) == 2
    assert cli.main(["run", FAST, "--samples", "0"]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert cli.main([]) == 2
    # a tolerance far below rounding forces a check failure
    assert cli.main(["run", FAST, "--tol-scale", "1e-12"]) == 1
    assert cli.main(["run", "bourgeois-eps-zero", "--samples", "200"]) == 0
    capsys.readouterr()


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"samples": 50, "seed": 3}))
    assert cli.main(["run", FAST, "--config", str(cfg)]) == 0
    env = json.loads(capsys.readouterr().out)["env"]
    assert env["samples"] == 50 and env["seed"] == 3
    cfg.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["run", FAST, "--config", str(cfg)]) == 2
    assert "valid keys" in capsys.readouterr().err


def test_cli_evaluation_error(monkeypatch, capsys):
    def boom(ctx):
        raise FloatingPointError("diverged")

    sc = replace(registry.get(FAST), runner=boom)
    monkeypatch.setitem(registry._BY_NAME, FAST, sc)
    assert cli.main(["run", FAST]) == 3
    assert "diverged" in capsys.readouterr().err


def test_cli_plotdata(tmp_path, capsys):
    assert cli.main(["run", "reeb-disk-overlap", "--plotdata", str(tmp_path)]) == 0
    assert (tmp_path / "reeb-disk-overlap__z-displacement.csv").exists()
    capsys.readouterr()
