import json
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
import yaml

from avdlab.experiments import (
    PRESETS,
    REFERENCE_IDS,
    ConfigError,
    ExperimentConfig,
    TableReport,
    TableRow,
    cached_preset,
    closed_form_for,
    compare_with_paper,
    get_preset,
    load_config,
    reference_table,
    run,
)
from avdlab.special import Family, make_case

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def small(**kw):
    base = dict(name="small", alpha=3, schedule="power:1", horizon=100.0,
                outputs=({"table_at": [10.0, 100.0]}, "invariants"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_roundtrip_dict_and_yaml(tmp_path):
    cfg = small(integrator={"rel_tol": 1e-9})
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(cfg.to_dict()))
    assert load_config(path) == cfg


def test_shipped_configs_load():
    for p in CONFIGS.glob("*.yaml"):
        assert load_config(p).name


@pytest.mark.parametrize("change", [
    {"variant": "nope"},
    {"schedule": "power:-1"},
    {"schedule": "bogus"},
    {"problem": "nope"},
    {"horizon": 0.5},
    {"horizon": math.inf},
    {"x0": (1.0, 2.0)},
    {"integrator": {"bogus": 1}},
    {"outputs": ("bogus",)},
    {"alpha": 0.0},
])
def test_invalid_configs(change):
    with pytest.raises(ConfigError):
        small(**change)


def test_invalid_mappings(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"name": "x", "extra": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(["not", "a", "mapping"])
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    with pytest.raises(ConfigError):
        run(small(integrator={"uniform_step": -1.0}))


def test_overrides():
    cfg = small().with_overrides(rel_tol=1e-8, horizon=50.0)
    assert cfg.integrator["rel_tol"] == 1e-8 and cfg.horizon == 50.0


def test_empty_outputs_give_metadata_only():
    res = run(small(outputs=()))
    assert res.trajectory is None and res.checks == [] and res.passed
    assert res.summary()["config"]["name"] == "small"


def test_run_table_matches_closed_form():
    res = run(small())
    assert res.passed
    case = make_case(Family.eps_inv_t, 3)
    assert res.table.value("small", 100.0) == pytest.approx(case.eval(100.0), abs=1e-8)
    assert closed_form_for(small()) is not None
    assert closed_form_for(small(schedule="log_inv")) is None


def test_integration_failure_is_a_failed_check():
    res = run(small(integrator={"max_steps": 3}))
    assert not res.passed and res.error and res.checks[0].name == "integration"


def test_run_is_deterministic(tmp_path):
    a, b = run(small()), run(small())
    assert a.table.to_csv() == b.table.to_csv()
    a.write(tmp_path / "a")
    b.write(tmp_path / "b")
    for f in (tmp_path / "a" / "small").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / "small" / f.name).read_bytes()
    summary = json.loads((tmp_path / "a" / "small" / "report.json").read_text())
    assert summary["config"] == small().to_dict()


def test_csv_is_rfc4180_with_full_precision():
    t = TableReport([TableRow('a,"b"', 1 / 3, 0, 2 / 3, "integrated")])
    text = t.to_csv()
    assert "\r\n" in text
    assert '"a,""b"""' in text
    assert "0.66666666666666663" in text


def test_presets_complete():
    assert set(PRESETS) == {"paper_case1", "paper_case2", "paper_case3", "paper_case4",
                            "paper_compare", "weak_conv2", "tikh_fast", "strong_conv_tikhonov"}
    for name in PRESETS:
        p = get_preset(name)
        assert p.runs
        if p.reference is not None:
            ref = reference_table(p.reference)
            keys = {k for k, _ in p.runs}
            assert set(ref.keys()) <= keys
    with pytest.raises(KeyError):
        get_preset("nope")


def test_reference_tables():
    for tid in REFERENCE_IDS:
        assert reference_table(tid).cells
    assert reference_table("case1").tolerance("alpha=3", 10.0, 0.04) == 0.01
    assert reference_table("case1").tolerance("alpha=1", 10.0, 0.319) == pytest.approx(0.07975)
    with pytest.raises(KeyError):
        reference_table("nope")


def test_identical_table_gives_zero_deviation():
    ref = reference_table("case4")
    rows = [TableRow(k, t, 0, v, "integrated") for (k, t), v in ref.cells.items()]
    cmp_ = compare_with_paper(TableReport(rows), "case4")
    assert cmp_.passed
    assert all(c.deviation == 0.0 for c in cmp_.cells)
    shifted = [replace(r, value=r.value + 1e-3) if r.t == 100.0 else r for r in rows]
    cmp_ = compare_with_paper(TableReport(shifted), "case4")
    assert cmp_.failed_cells() == ["(alpha=4, t=100)"]
    with pytest.raises(ValueError):
        compare_with_paper(TableReport(rows[:-1]), "case4")


def test_preset_checks_are_named_per_run():
    res = cached_preset("paper_case4")
    names = [c.name for c in res.checks()]
    assert any(n.startswith("alpha=4/") for n in names)
    assert any(n.startswith("case4[") for n in names)
    assert len(names) == len(set(names))


def test_preset_rerun_is_byte_identical():
    from avdlab.experiments import run_preset
    a = run_preset("paper_case4").table.to_csv()
    b = run_preset("paper_case4").table.to_csv()
    assert a == b


def test_horizon_override_drops_late_cells():
    from avdlab.experiments import run_preset
    res = run_preset("paper_case4", horizon=100.0)
    assert not res.passed
    assert any(c.name.startswith("compare[") for c in res.cross)


def test_tikhonov_output_on_quadratic():
    cfg = ExperimentConfig(name="q", alpha=3, schedule="log_inv", problem="quadratic",
                           problem_params=(1, 2, 1, 0, 1), x0=(0.0, 1.0), v0=(0.0, 0.0), horizon=100.0,
                           outputs=("tikhonov",))
    res = run(cfg)
    assert res.passed, [c.line() for c in res.checks]
    assert np.all(res.series["delta"].values >= 0)
