"""Operation-mode adaptation logic as a declarative finite-state machine."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from .space import Configuration
from .wgra import OperationMode

METRICS = ("mean", "peak")


class FsmError(ValueError):
    """Raised for malformed FSM documents."""


@dataclass(frozen=True)
class WindowObservation:
    window_index: int
    mean_detected_count: float
    frames_in_window: int
    peak_detected_count: int | None = None

    def __post_init__(self):
        if self.frames_in_window <= 0:
            raise ValueError("frames_in_window must be positive")
        if self.mean_detected_count < 0:
            raise ValueError("mean_detected_count must be non-negative")

    def value(self, metric: str) -> float:
        if metric == "peak":
            if self.peak_detected_count is None:
                raise ValueError(f"window {self.window_index} carries no peak count")
            return self.peak_detected_count
        return self.mean_detected_count


@dataclass(frozen=True)
class Guard:
    lo: float
    hi: float = math.inf
    sustain: int = 1
    metric: str = "mean"

    def matches(self, obs: WindowObservation) -> bool:
        return self.lo <= obs.value(self.metric) < self.hi


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: Guard


@dataclass(frozen=True)
class FsmSpec:
    states: tuple
    initial: str
    transitions: tuple
    modes: Mapping[str, OperationMode] = field(default_factory=dict, compare=False)

    def outgoing(self, state: str) -> list[Transition]:
        return [t for t in self.transitions if t.source == state]


def _guard(entry: dict, where: str) -> Guard:
    try:
        lo = float(entry["lo"])
    except (KeyError, TypeError, ValueError):
        raise FsmError(f"{where}: guard needs a numeric 'lo'") from None
    hi = entry.get("hi")
    hi = math.inf if hi is None else float(hi)
    sustain = entry.get("sustain", 1)
    metric = entry.get("metric", "mean")
    if not lo < hi:
        raise FsmError(f"{where}: empty guard range [{lo}, {hi})")
    if not isinstance(sustain, int) or sustain < 1:
        raise FsmError(f"{where}: sustain must be a positive integer, got {sustain!r}")
    if metric not in METRICS:
        raise FsmError(f"{where}: unknown metric {metric!r}")
    return Guard(lo, hi, sustain, metric)


def parse_fsm(document: dict | str, modes: Sequence[OperationMode] | Mapping[str, OperationMode] | None = None) -> FsmSpec:
    """Build an :class:`FsmSpec`, binding each state to the operation mode of the same name.

    With ``modes=None`` the machine is built unbound (structure only).
    """
    if isinstance(document, str):
        document = yaml.safe_load(document)
    if not isinstance(document, dict):
        raise FsmError("FSM document must be a mapping")
    states = document.get("states")
    if not isinstance(states, list) or not states:
        raise FsmError("FSM document needs a non-empty 'states' list")
    states = tuple(str(s) for s in states)
    if len(set(states)) != len(states):
        raise FsmError(f"duplicate states in {list(states)}")
    initial = str(document.get("initial", states[0]))

    transitions = []
    for pos, entry in enumerate(document.get("transitions") or []):
        where = f"transition {pos}"
        try:
            source, target = str(entry["from"]), str(entry["to"])
        except (KeyError, TypeError):
            raise FsmError(f"{where}: needs 'from' and 'to'") from None
        for s in (source, target):
            if s not in states:
                raise FsmError(f"{where}: undeclared state {s!r}")
        transitions.append(Transition(source, target, _guard(entry, where)))

    bound: dict[str, OperationMode] = {}
    if modes is not None:
        by_name = dict(modes) if isinstance(modes, Mapping) else {m.name: m for m in modes}
        for s in states:
            if s not in by_name:
                raise FsmError(f"state {s!r} has no matching operation mode")
            bound[s] = by_name[s]
    return FsmSpec(states, initial, tuple(transitions), bound)


def load_fsm(path: str | Path | None = None, modes=None) -> FsmSpec:
    if path is None:
        text = resources.files("edgeadapt").joinpath("data/pedestrian_fsm.yaml").read_text()
    else:
        text = Path(path).read_text()
    return parse_fsm(text, modes)


def validate_fsm(spec: FsmSpec, probe_max: int = 50) -> list[str]:
    """Diagnostics for initial-state membership, guard overlap, and reachability."""
    problems = []
    if spec.initial not in spec.states:
        problems.append(f"initial state {spec.initial!r} is not declared")
    for state in spec.states:
        out = spec.outgoing(state)
        for c in range(probe_max + 1):
            probe = WindowObservation(0, float(c), 1, c)
            hits = [t for t in out if t.guard.matches(probe)]
            if len(hits) > 1:
                targets = ", ".join(t.target for t in hits)
                problems.append(f"state {state!r}: guards to {targets} overlap at count {c}")
                break
    if spec.initial in spec.states:
        seen, todo = {spec.initial}, deque([spec.initial])
        while todo:
            for t in spec.outgoing(todo.popleft()):
                if t.target not in seen:
                    seen.add(t.target)
                    todo.append(t.target)
        for s in spec.states:
            if s not in seen:
                problems.append(f"state {s!r} is unreachable from {spec.initial!r}")
    return problems


class FsmRuntime:
    """Steps an :class:`FsmSpec` over window observations."""

    def __init__(self, spec: FsmSpec):
        if spec.initial not in spec.states:
            raise FsmError(f"initial state {spec.initial!r} is not declared")
        self.spec = spec
        self.current_state = spec.initial
        self.sustain_counters = [0] * len(spec.transitions)
        self.transition_log: list[tuple[int, str, str]] = []
        self._last_window: int | None = None

    def step(self, obs: WindowObservation) -> tuple[str, Transition | None]:
        if self._last_window is not None and obs.window_index <= self._last_window:
            raise ValueError(f"window index {obs.window_index} does not advance past {self._last_window}")
        self._last_window = obs.window_index

        ready = []
        for i, t in enumerate(self.spec.transitions):
            if t.source != self.current_state:
                continue
            if t.guard.matches(obs):
                self.sustain_counters[i] += 1
                if self.sustain_counters[i] >= t.guard.sustain:
                    ready.append(t)
            else:
                self.sustain_counters[i] = 0
        if len(ready) > 1:
            raise RuntimeError(
                f"non-deterministic FSM: {len(ready)} transitions enabled from {self.current_state!r}"
            )
        if not ready:
            return self.current_state, None
        fired = ready[0]
        self.transition_log.append((obs.window_index, fired.source, fired.target))
        self.current_state = fired.target
        self.sustain_counters = [0] * len(self.spec.transitions)
        return self.current_state, fired

    @property
    def current_mode(self) -> OperationMode:
        return self.spec.modes[self.current_state]


def current_config(runtime: FsmRuntime) -> Configuration:
    return runtime.current_mode.chosen
