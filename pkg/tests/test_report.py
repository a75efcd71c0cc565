import json

from platoon_headway.report import bundle, dumps, run_all, write_report
from platoon_headway.scenario import load_preset


def test_bundle_is_deterministic_apart_from_timestamp():
    cfg = load_preset("paper-cacc-0.7")
    a = bundle(run_all(cfg, keep_surface=False), timestamp="A")
    b = bundle(run_all(cfg, keep_surface=False), timestamp="B")
    assert a["provenance"].pop("timestamp") == "A"
    assert b["provenance"].pop("timestamp") == "B"
    assert dumps(a) == dumps(b)


def test_bundle_contents():
    doc = bundle(run_all(load_preset("paper-cacc-0.7"), keep_surface=False), timestamp="T")
    assert set(doc) == {
        "provenance", "design_gains", "effective_gains", "synthesis", "string_stability",
        "internal_stability", "simulation", "verdicts", "passed",
    }
    assert doc["synthesis"]["min_headway"] == 0.666667
    assert doc["internal_stability"]["condition_b_at_zero"] == 0.0027825
    assert doc["passed"] is True
    assert len(doc["provenance"]["scenario_hash"]) == 64


def test_failing_scenario_reports_failures():
    result = run_all(load_preset("paper-cacc-0.6"), keep_surface=False)
    assert not result.passed
    assert not result.verdicts["robust_string_stability"]
    assert not result.verdicts["simulation_no_amplification"]
    assert not result.verdicts["region_feasible"]


def test_write_report_files(tmp_path):
    result = run_all(load_preset("paper-acc-1.2"))
    written = write_report(result, tmp_path, figures=True, timestamp="T")
    names = {p.name for p in written}
    assert {"report.json", "region_boundary.csv", "sweep_surface.csv", "interlacing_curves.csv",
            "condition_b_curve.csv", "delta_traces.csv", "trace.csv", "region.png",
            "sweep_surface.png", "interlacing.png", "condition_b.png", "delta_traces.png"} <= names
    assert all(p.stat().st_size > 0 for p in written)
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["provenance"]["timestamp"] == "T"
    first = (tmp_path / "report.json").read_bytes()
    write_report(run_all(load_preset("paper-acc-1.2")), tmp_path, figures=False, timestamp="T")
    assert (tmp_path / "report.json").read_bytes() == first
