import csv

import numpy as np
import pytest

from platoon_headway import certify_internal, gain_region, robust_sweep
from platoon_headway.internal_stability import condition_b_curve
from platoon_headway.plotdata import emit_plot_data, fmt
from platoon_headway.scenario import load_preset
from platoon_headway.simulation import simulate
from platoon_headway.string_stability import FrequencyGrid


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_fmt():
    assert fmt(2 / 3) == "0.666667"
    assert fmt(2 / 3, 10) == "0.6666666667"
    assert fmt(True) == "true" and fmt(3) == "3" and fmt("x") == "x"


def test_region_boundary_intercepts(tmp_path, cacc_gains):
    region = gain_region(cacc_gains)
    rows = _rows(emit_plot_data(region, "region-boundary", tmp_path / "r.csv", precision=10))
    assert rows[0] == ["line", "k_v", "k_p"]
    for name, a, b in (("upper", region.a1, region.b1), ("lower", region.a2, region.b2)):
        pts = np.array([[float(x) for x in row[1:]] for row in rows[1:] if row[0] == name])
        assert pts[0] == pytest.approx([a, 0.0])
        assert pts[-1] == pytest.approx([0.0, b])
        assert pts[:, 0] / a + pts[:, 1] / b == pytest.approx(np.ones(len(pts)))


def test_region_boundary_scaled_for_lookahead(tmp_path, caccplus_gains):
    region = gain_region(caccplus_gains)
    rows = _rows(emit_plot_data(region, "region-boundary", tmp_path / "r.csv", precision=10))
    first = [float(x) for x in rows[1][1:]]
    assert first == pytest.approx([region.a1 / 3, 0.0])


def test_sweep_surface_rows(tmp_path, cacc_gains):
    grid = FrequencyGrid(omega_points=25, tau_points=3)
    report = robust_sweep(cacc_gains, grid, keep_surface=True)
    rows = _rows(emit_plot_data(report, "sweep-surface", tmp_path / "s.csv"))
    assert rows[0] == ["omega", "tau", "magnitude"]
    assert len(rows) - 1 == 25 * 3
    with pytest.raises(ValueError, match="keep_surface"):
        emit_plot_data(robust_sweep(cacc_gains, grid), "sweep-surface", tmp_path / "x.csv")


def test_interlacing_curves(tmp_path, cacc_gains):
    report = certify_internal(cacc_gains)
    rows = _rows(emit_plot_data(report, "interlacing-curves", tmp_path / "i.csv"))
    assert rows[0] == ["theta", "D_r", "D_i", "marker"]
    markers = [row[3] for row in rows[1:] if row[3]]
    assert markers.count("real-root") == 7 and markers.count("imag-root") == 8
    thetas = [float(row[0]) for row in rows[1:]]
    assert thetas == sorted(thetas)


def test_condition_b_curve_rows(tmp_path, cacc_gains):
    rows = _rows(emit_plot_data(condition_b_curve(cacc_gains, n=11), "condition-b-curve", tmp_path / "c.csv"))
    assert rows[0] == ["omega", "value"] and len(rows) == 12


def test_delta_traces_and_trace(tmp_path):
    tr = simulate(load_preset("paper-cacc-0.7").scenario)
    rows = _rows(emit_plot_data(tr, "delta-traces", tmp_path / "d.csv"))
    assert rows[0] == ["t"] + [f"delta_{i}" for i in range(1, 11)]
    assert len(rows) - 1 == len(tr.t)
    full = _rows(emit_plot_data(tr, "trace", tmp_path / "t.csv"))
    assert full[0][:6] == ["t", "x_0", "v_0", "a_0", "u_0", "x_1"]
    assert full[0][-5:] == ["x_10", "v_10", "a_10", "u_10", "delta_10"]
    assert len(full[1]) == len(full[0]) == 1 + 4 * 11 + 10


def test_mismatched_kind(tmp_path, cacc_gains):
    with pytest.raises(TypeError):
        emit_plot_data(gain_region(cacc_gains), "delta-traces", tmp_path / "x.csv")
    with pytest.raises(ValueError, match="unknown plot-data kind"):
        emit_plot_data(gain_region(cacc_gains), "histogram", tmp_path / "x.csv")
