import csv
import io
import json

import pytest
from click.testing import CliRunner

from edgeadapt.cli import main, run_command
from edgeadapt.formats import load_result
from edgeadapt.report import WINDOW_COLUMNS, emit_report
from edgeadapt.scenario import SimulationReport

STATIC = ("power-saving", "low-energy", "high-accuracy", "high-rate")


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """trials -> front -> mode table, shared by the downstream command tests."""
    d = tmp_path_factory.mktemp("pipeline")
    assert run_command(["search", "--budget-frac", "0.1", "--seed", "7", "--out", str(d / "t.jsonl")]) == 0
    assert run_command(["front", "extract", "--trials", str(d / "t.jsonl"), "--out", str(d / "f.json")]) == 0
    assert run_command(["modes", "select", "--front", str(d / "f.json"), "--out", str(d / "m.json")]) == 0
    return d


def test_space_validate():
    res = invoke("space", "validate")
    assert res.exit_code == 0 and "3402" in res.output


def test_search_nsga2_budget_frac(pipeline):
    lines = (pipeline / "t.jsonl").read_text().splitlines()
    assert len(lines) == 340
    assert len({json.dumps(json.loads(l)["config"], sort_keys=True) for l in lines}) == 340
    manifest = json.loads((pipeline / "t.jsonl.manifest.json").read_text())
    assert manifest["seeds"]["seed"] == 7


def test_search_random_budget(tmp_path):
    out = tmp_path / "r.jsonl"
    assert invoke("search", "--sampler", "random", "--budget", 2790, "--out", out).exit_code == 0
    assert len(out.read_text().splitlines()) == 2790


def test_budget_flags_are_exclusive(tmp_path):
    assert invoke("search", "--budget", 10, "--budget-frac", 0.1, "--out", tmp_path / "x").exit_code == 2
    assert invoke("search", "--out", tmp_path / "x").exit_code == 2
    assert invoke("search", "--budget", 5000, "--out", tmp_path / "x").exit_code == 1
    assert not (tmp_path / "x").exists()


def test_unknown_flag_is_a_usage_error():
    assert invoke("search", "--bogus").exit_code == 2


def test_over_tight_thresholds_exit_1(pipeline, tmp_path):
    specs = tmp_path / "tight.yaml"
    specs.write_text("modes:\n  - {name: impossible, weights: [1, 0, 0], thresholds: [0.99, 0, 0]}\n")
    out = tmp_path / "m.json"
    res = invoke("modes", "select", "--front", pipeline / "f.json", "--modes", specs, "--out", out)
    assert res.exit_code == 1
    assert "no front member survives" in res.output
    assert not out.exists()


def test_repeats_write_frequency_summary(tmp_path):
    out = tmp_path / "t.jsonl"
    res = invoke("search", "--budget", 120, "--repeats", 3, "--seed", 2, "--out", out)
    assert res.exit_code == 0
    for seed in (2, 3, 4):
        assert len((tmp_path / f"t.seed{seed}.jsonl").read_text().splitlines()) == 120
    summary = json.loads((tmp_path / "t.jsonl.mode-frequency.json").read_text())
    assert "power-saving" in json.dumps(summary)


def test_fsm_validate(pipeline, tmp_path):
    res = invoke("fsm", "validate", "--modes-table", pipeline / "m.json")
    assert res.exit_code == 0
    bad = tmp_path / "bad.yaml"
    bad.write_text("states: [a, b]\ntransitions:\n  - {from: a, to: a, lo: 1}\n")
    res = invoke("fsm", "validate", "--fsm", bad)
    assert res.exit_code == 1 and "unreachable" in res.output


def test_reruns_are_byte_identical(pipeline, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        d.mkdir()
        assert run_command(["search", "--budget-frac", "0.1", "--seed", "7", "--out", str(d / "t.jsonl")]) == 0
        assert run_command(["front", "extract", "--trials", str(d / "t.jsonl"), "--out", str(d / "f.json")]) == 0
        assert run_command(["modes", "select", "--front", str(d / "f.json"), "--out", str(d / "m.json")]) == 0
        assert run_command(["simulate", "--modes-table", str(d / "m.json"), "--seed", "3",
                            "--out", str(d / "r.json")]) == 0
    for name in ("t.jsonl", "f.json", "m.json", "r.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "t.jsonl").read_bytes() == (pipeline / "t.jsonl").read_bytes()


def test_five_subject_comparison(pipeline, tmp_path):
    table = pipeline / "m.json"
    reports = [tmp_path / "adaptive.json"]
    assert invoke("simulate", "--modes-table", table, "--scenario", "weekends", "--out", reports[0]).exit_code == 0
    for mode in STATIC:
        path = tmp_path / f"{mode}.json"
        res = invoke("simulate", "--modes-table", table, "--scenario", "weekends", "--static", mode, "--out", path)
        assert res.exit_code == 0
        reports.append(path)
    cmp_path = tmp_path / "cmp.json"
    res = invoke("compare", *reports, "--out", cmp_path, "--boxplot", tmp_path / "box.csv", "--radar", tmp_path / "radar.csv")
    assert res.exit_code == 0, res.output
    cmp = load_result(cmp_path)
    assert len(cmp.rows) == 5 and len(cmp.deltas) == 4
    assert all(d["subject"] == "adaptive" for d in cmp.deltas)

    radar = list(csv.DictReader(io.StringIO((tmp_path / "radar.csv").read_text())))
    assert [r["subject"] for r in radar] == ["adaptive", *STATIC]
    for axis in ("acc", "eng", "rate"):
        vals = [float(r[axis]) for r in radar]
        assert min(vals) == 0.0 and max(vals) == 1.0

    box = list(csv.DictReader(io.StringIO((tmp_path / "box.csv").read_text())))
    assert len(box) == 5 * 6

    res = invoke("report", cmp_path, "--format", "csv")
    assert res.exit_code == 0
    sections = res.output.strip().split("\n\n")
    assert len(sections) == 2
    assert len(sections[0].splitlines()) == 1 + 5
    assert len(sections[1].splitlines()) == 1 + 4


def test_mismatched_scenarios_exit_1(pipeline, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    invoke("simulate", "--modes-table", pipeline / "m.json", "--scenario", "weekdays", "--out", a)
    invoke("simulate", "--modes-table", pipeline / "m.json", "--scenario", "weekends", "--out", b)
    res = invoke("compare", a, b, "--out", tmp_path / "c.json")
    assert res.exit_code == 1 and not (tmp_path / "c.json").exists()


def test_simulate_report_table(pipeline, tmp_path):
    out = tmp_path / "r.json"
    assert invoke("simulate", "--modes-table", pipeline / "m.json", "--out", out).exit_code == 0
    res = invoke("report", out)
    assert res.exit_code == 0
    assert "total_energy_wh" in res.output and "power-saving" in res.output
    csv_out = tmp_path / "r.csv"
    assert invoke("report", out, "--format", "csv", "--out", csv_out).exit_code == 0
    header = csv_out.read_text().splitlines()[0].split(",")
    assert tuple(header) == WINDOW_COLUMNS


def test_custom_scenario_file(pipeline, tmp_path):
    sc = tmp_path / "quiet.yaml"
    sc.write_text("hours: [" + ", ".join(["zero"] * 24) + "]\n")
    out = tmp_path / "r.json"
    assert invoke("simulate", "--modes-table", pipeline / "m.json", "--scenario", sc, "--out", out).exit_code == 0
    assert set(load_result(out).mode_timeline) == {"power-saving"}


def test_empty_report_is_header_only():
    text = emit_report(SimulationReport("nobody", "weekdays", []), "csv")
    assert text.strip().splitlines() == [text.strip().splitlines()[0]]
    assert text == ",".join(WINDOW_COLUMNS) + "\n"
