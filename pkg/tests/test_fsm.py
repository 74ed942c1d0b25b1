import pytest
from hypothesis import given, strategies as st

from edgeadapt.fsm import (
    FsmError,
    FsmRuntime,
    WindowObservation,
    current_config,
    load_fsm,
    parse_fsm,
    validate_fsm,
)


def obs(w, mean, peak=None):
    return WindowObservation(w, float(mean), 60, peak if peak is not None else int(round(mean)))


def test_bundled_structure(fsm_spec):
    assert len(fsm_spec.states) == 4
    assert len(fsm_spec.transitions) == 9
    assert fsm_spec.initial == "power-saving"
    assert validate_fsm(fsm_spec) == []


def test_undeclared_state_is_named():
    doc = {"states": ["a"], "transitions": [{"from": "a", "to": "ghost", "lo": 1}]}
    with pytest.raises(FsmError, match="ghost"):
        parse_fsm(doc)


def test_missing_mode_binding(mode_specs):
    with pytest.raises(FsmError, match="no matching operation mode"):
        parse_fsm({"states": ["turbo"]}, modes={})


def test_single_state_machine():
    spec = parse_fsm({"states": ["only"]})
    assert validate_fsm(spec) == []
    rt = FsmRuntime(spec)
    for w in range(5):
        assert rt.step(obs(w, w)) == ("only", None)


def test_overlap_diagnostic():
    spec = parse_fsm({"states": ["power-saving", "low-energy", "high-accuracy"], "transitions": [
        {"from": "power-saving", "to": "low-energy", "lo": 1, "hi": 4},
        {"from": "power-saving", "to": "high-accuracy", "lo": 2},
    ]})
    problems = validate_fsm(spec)
    assert any("overlap at count 2" in p for p in problems)


def test_reachability_diagnostic():
    spec = parse_fsm({"states": ["a", "b", "island"], "transitions": [{"from": "a", "to": "b", "lo": 1}]})
    assert validate_fsm(spec) == ["state 'island' is unreachable from 'a'"]


def test_bad_guards_rejected():
    with pytest.raises(FsmError, match="empty guard"):
        parse_fsm({"states": ["a", "b"], "transitions": [{"from": "a", "to": "b", "lo": 3, "hi": 1}]})
    with pytest.raises(FsmError, match="sustain"):
        parse_fsm({"states": ["a", "b"], "transitions": [{"from": "a", "to": "b", "lo": 1, "sustain": 0}]})


def test_step_examples(fsm_spec):
    rt = FsmRuntime(fsm_spec)
    assert current_config(rt) == fsm_spec.modes["power-saving"].chosen
    assert rt.step(obs(0, 0)) == ("power-saving", None)
    state, fired = rt.step(obs(1, 2))
    assert state == "low-energy" and fired.target == "low-energy"
    assert current_config(rt) == fsm_spec.modes["low-energy"].chosen


def test_mean_metric_guards():
    doc = {"states": ["power-saving", "low-energy"], "transitions": [
        {"from": "power-saving", "to": "low-energy", "lo": 1, "hi": 4}]}
    rt = FsmRuntime(parse_fsm(doc))
    assert rt.step(WindowObservation(0, 0.0, 60))[0] == "power-saving"
    assert rt.step(WindowObservation(1, 2.0, 60))[0] == "low-energy"


def test_sustain_two_fires_on_second_window(fsm_spec):
    rt = FsmRuntime(fsm_spec)
    rt.step(obs(0, 5))
    assert rt.current_state == "high-accuracy"
    assert rt.step(obs(1, 5)) == ("high-accuracy", None)
    state, fired = rt.step(obs(2, 5))
    assert state == "high-rate" and fired.guard.sustain == 2
    assert rt.transition_log == [(0, "power-saving", "high-accuracy"), (2, "high-accuracy", "high-rate")]


def test_sustain_counter_resets_on_a_gap(fsm_spec):
    rt = FsmRuntime(fsm_spec)
    rt.step(obs(0, 5))
    rt.step(obs(1, 5))
    rt.step(obs(2, 3))  # 1 <= peak < 4 leaves high-accuracy for low-energy
    assert rt.current_state == "low-energy"


def test_window_index_must_advance(fsm_spec):
    rt = FsmRuntime(fsm_spec)
    rt.step(obs(3, 0))
    with pytest.raises(ValueError):
        rt.step(obs(3, 0))


def test_ambiguous_runtime_fires_error():
    spec = parse_fsm({"states": ["a", "b", "c"], "transitions": [
        {"from": "a", "to": "b", "lo": 1}, {"from": "a", "to": "c", "lo": 2}]})
    with pytest.raises(RuntimeError, match="non-deterministic"):
        FsmRuntime(spec).step(obs(0, 3))


@given(st.lists(st.integers(0, 6), max_size=40))
def test_replay_is_deterministic(fsm_spec, peaks):
    logs = []
    for _ in range(2):
        rt = FsmRuntime(fsm_spec)
        for w, p in enumerate(peaks):
            rt.step(obs(w, p / 2, p))
        logs.append(list(rt.transition_log))
    assert logs[0] == logs[1]


def test_load_from_path(tmp_path, modes):
    path = tmp_path / "fsm.yaml"
    path.write_text("states: [power-saving]\n")
    assert load_fsm(path, modes).states == ("power-saving",)
