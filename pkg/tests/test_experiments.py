import csv
import json

import numpy as np
import pytest

from sidonlab.experiments import (
    CSV_HEADER, PRESETS, ConfigError, ExperimentConfig, Report, brute_force_sign_constant, emit_report,
    load_report, run_preset, _sign_constant)
from sidonlab.generators import all_sign_matrices


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("nope").resolved()
    with pytest.raises(ConfigError):
        ExperimentConfig("decomp", delta=1.5).resolved()
    with pytest.raises(ConfigError):
        ExperimentConfig("sub2", samples=0).resolved()
    with pytest.raises(ConfigError):
        ExperimentConfig("sub2", seed=-1).resolved()
    assert ExperimentConfig("decomp", delta=0.2).resolved()["delta"] == 0.2


def test_report_relations():
    rep = Report({})
    assert rep.check("le", 1, 2)
    assert not rep.check("ge", 1, 2, relation=">=")
    assert rep.check("eq", 1.0, 1.0 + 1e-12, 1e-9, relation="==")
    with pytest.raises(ValueError):
        rep.check("bad", 1, 1, relation="in")
    assert not rep.all_passed


def test_empty_report_csv_header_only(tmp_path):
    p = emit_report(Report({}), tmp_path / "e.csv", "csv")
    rows = list(csv.reader(p.open()))
    assert rows == [CSV_HEADER]


def test_json_round_trip_and_csv_rows(tmp_path):
    rep = run_preset(ExperimentConfig("mela-sweep", seed=0))
    p = emit_report(rep, tmp_path / "r.json")
    back = load_report(p)
    assert back.to_dict() == rep.to_dict()
    c = emit_report(rep, tmp_path / "r.csv", "csv")
    assert len(list(csv.reader(c.open()))) == len(rep.checks) + 1
    assert rep.all_passed
    with pytest.raises(ConfigError):
        emit_report(rep, tmp_path / "r.x", "xml")


def test_determinism_byte_identical(tmp_path):
    a = emit_report(run_preset(ExperimentConfig("sub2", seed=3)), tmp_path / "a.json").read_bytes()
    b = emit_report(run_preset(ExperimentConfig("sub2", seed=3)), tmp_path / "b.json").read_bytes()
    assert a == b
    assert b"timing" not in a
    t = emit_report(run_preset(ExperimentConfig("sub2", seed=3)), tmp_path / "t.json", include_timing=True)
    assert "timing" in json.loads(t.read_text())


def test_nonfinite_values_serialize(tmp_path):
    rep = Report({}, values={"x": np.inf, "z": 1 + 2j, "a": np.arange(2)})
    d = json.loads(emit_report(rep, tmp_path / "n.json").read_text())
    assert d["values"] == {"x": "inf", "z": [1.0, 2.0], "a": [0, 1]}


def test_sign_constant_matches_brute_force():
    rng = np.random.default_rng(5)
    xs = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(5)]
    fast, _ = _sign_constant(xs, all_sign_matrices(2))
    assert fast == pytest.approx(brute_force_sign_constant(xs, 2), abs=1e-12)
    # identity: tr|I| = 2 and |tr(a'a'')| <= 2 is attained at a' = a'' = H/sqrt2 style pairs
    assert brute_force_sign_constant([np.eye(2)], 2) >= 1 - 1e-12


@pytest.mark.parametrize("name", ["mela-sweep", "matricial-60", "sub2", "chevet", "character", "domination-haar"])
def test_fast_presets_pass(name):
    rep = run_preset(ExperimentConfig(name, seed=0))
    failed = [c.name for c in rep.checks if not c.passed]
    assert not failed, failed


def test_registry_is_data():
    for name, (fn, defaults) in PRESETS.items():
        assert callable(fn) and isinstance(defaults, dict)
