import itertools
import math

import numpy as np
import pytest

from edgeadapt.fsm import FsmRuntime
from edgeadapt.scenario import (
    SimulationSettings,
    compare,
    generate_scenario,
    radar_rows,
    simulate_adaptive,
    simulate_static,
)


def runs(labels, label):
    return sum(1 for key, _ in itertools.groupby(labels) if key == label)


@pytest.mark.parametrize("kind", ["weekdays", "weekends"])
def test_frame_count_and_buckets(kind):
    sc = generate_scenario(kind, seed=3)
    assert len(sc.frames) == 1440
    bounds = {"zero": (0, 0), "low": (1, 3), "high": (4, 5)}
    for h, label in enumerate(sc.hours):
        chunk = sc.frames[h * 60:(h + 1) * 60]
        lo, hi = bounds[label]
        assert chunk.min() >= lo and chunk.max() <= hi


def test_weekdays_have_three_peaks():
    sc = generate_scenario("weekdays", seed=1)
    assert runs(sc.hours, "high") == 3
    assert set(sc.hours[:6]) == {"zero"}


@pytest.mark.parametrize("seed", range(5))
def test_weekend_density_rises_into_the_night(seed):
    sc = generate_scenario("weekends", seed=seed)
    order = {"zero": 0, "low": 1, "high": 2}
    levels = [order[h] for h in sc.hours[:23]]
    assert levels == sorted(levels)


def test_unknown_kind_and_determinism():
    with pytest.raises(ValueError):
        generate_scenario("holidays")
    a, b = generate_scenario("weekdays", 4), generate_scenario("weekdays", 4)
    assert np.array_equal(a.frames, b.frames) and a.digest == b.digest
    assert generate_scenario("weekdays", 5).digest != a.digest


def test_zero_scenario_detects_nothing(modes, params, fsm_spec):
    sc = generate_scenario("custom", labels=["zero"] * 24)
    for mode in modes.values():
        rep = simulate_static(sc, mode, params, seed=2)
        assert all(w.peak_detected_count == 0 and w.mean_detected_count == 0 for w in rep.windows)
    adaptive = simulate_adaptive(sc, FsmRuntime(fsm_spec), params, seed=2)
    assert set(adaptive.mode_timeline) == {"power-saving"}


def test_static_energy_closed_form(modes, params):
    hr = modes["high-rate"]
    rep = simulate_static(generate_scenario("weekdays", 0), hr, params, seed=0)
    assert len(rep.windows) == 24
    assert rep.total_energy_wh == pytest.approx(24 * hr.objectives.eng, rel=1e-12)
    assert rep.total_frames == 24 * hr.objectives.rate


def test_cadence_scales_window_charges(modes, params):
    sc = generate_scenario("weekdays", 0)
    mode = modes["balanced"]
    rep = simulate_static(sc, mode, params, settings=SimulationSettings(frame_cadence_s=1.0))
    assert rep.windows[0].energy_wh == pytest.approx(mode.objectives.eng / 2)
    assert rep.window_seconds == 60.0


def test_static_is_deterministic(modes, params):
    sc = generate_scenario("weekends", 2)
    a = simulate_static(sc, modes["low-energy"], params, seed=8)
    b = simulate_static(sc, modes["low-energy"], params, seed=8)
    assert a == b


def test_adaptive_config_sequence_follows_timeline(modes, params, fsm_spec):
    sc = generate_scenario("weekdays", 1)
    rep = simulate_adaptive(sc, FsmRuntime(fsm_spec), params, seed=1)
    assert set(rep.mode_timeline[:6]) <= {"power-saving", "low-energy"}
    for block in ((6, 9), (12, 14), (17, 20)):
        active = rep.mode_timeline[block[0]:block[1] + 1]
        assert {"high-rate", "high-accuracy"} & set(active)
    for w in rep.windows:
        assert w.accuracy == modes[w.mode].objectives.acc
        assert w.energy_wh == modes[w.mode].objectives.eng


def test_switch_energy_is_charged_once_per_switch(params, fsm_spec):
    sc = generate_scenario("weekdays", 1)
    base = simulate_adaptive(sc, FsmRuntime(fsm_spec), params, seed=1)
    rt = FsmRuntime(fsm_spec)
    extra = simulate_adaptive(sc, rt, params, seed=1, settings=SimulationSettings(switch_energy_wh=0.01))
    switches = sum(1 for a, b in zip(base.mode_timeline, base.mode_timeline[1:]) if a != b)
    assert extra.total_energy_wh - base.total_energy_wh == pytest.approx(0.01 * switches)


def test_compare_against_self_and_mismatch(modes, params):
    sc = generate_scenario("weekdays", 0)
    rep = simulate_static(sc, modes["balanced"], params)
    table = compare([rep, rep])
    d = table.deltas[0]
    assert d["energy_saving"] == d["fpr_gain"] == d["accuracy_delta"] == 0
    other = simulate_static(generate_scenario("weekends", 0), modes["balanced"], params)
    with pytest.raises(ValueError, match="different scenario"):
        compare([rep, other])


def test_delta_formulas(modes, params, fsm_spec):
    sc = generate_scenario("weekends", 0)
    ad = simulate_adaptive(sc, FsmRuntime(fsm_spec), params)
    hr = simulate_static(sc, modes["high-rate"], params)
    d = compare([ad, hr]).deltas[0]
    assert d["energy_saving"] == pytest.approx((hr.total_energy_wh - ad.total_energy_wh) / hr.total_energy_wh)
    assert d["energy_saving"] > 0
    assert d["fpr_gain"] == pytest.approx((ad.mean_fpr - hr.mean_fpr) / hr.mean_fpr)


def test_boxplot_blocks(modes, params):
    sc = generate_scenario("weekdays", 0)
    reps = [simulate_static(sc, modes[m], params) for m in ("balanced", "high-rate")]
    box = compare(reps).boxplot
    assert len(box) == 2 * 6
    assert box[0]["block"] == "00-04"
    assert all(r["min"] <= r["q1"] <= r["median"] <= r["q3"] <= r["max"] for r in box)


def test_radar_normalization():
    rows = [
        {"subject": "a", "accuracy_proxy": 0.4, "total_energy_wh": 3.0, "mean_fpr": 1.0},
        {"subject": "b", "accuracy_proxy": 0.5, "total_energy_wh": 4.0, "mean_fpr": 1.0},
    ]
    out = radar_rows(rows)
    assert out[0] == {"subject": "a", "acc": 0.0, "eng": 1.0, "rate": 1.0}
    assert out[1] == {"subject": "b", "acc": 1.0, "eng": 0.0, "rate": 1.0}
    assert all(0 <= r[k] <= 1 for r in out for k in ("acc", "eng", "rate"))


def test_mean_fpr_units(modes, params):
    rep = simulate_static(generate_scenario("weekdays", 0), modes["high-accuracy"], params)
    assert rep.mean_fpr == pytest.approx(600 / 120)
    assert math.isclose(rep.accuracy_proxy, modes["high-accuracy"].objectives.acc)
