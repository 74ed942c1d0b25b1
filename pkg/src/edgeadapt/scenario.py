"""Pedestrian-traffic scenarios and replay of adaptive and static subjects."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .fsm import FsmRuntime, WindowObservation
from .objectives import DeviceModelParams
from .wgra import OperationMode

HOURS = 24
FRAMES_PER_HOUR = 60
BUCKETS = {"zero": (0, 0), "low": (1, 3), "high": (4, 5)}

# Weekday commute/lunch/leave peaks; weekend traffic rising into the evening.
DEFAULT_LABELS = {
    "weekdays": ["zero"] * 6 + ["high"] * 3 + ["low"] * 3 + ["high"] * 2
    + ["low"] * 3 + ["high"] * 3 + ["zero"] * 4,
    "weekends": ["zero"] * 10 + ["low"] * 9 + ["high"] * 4 + ["low"],
}


@dataclass(frozen=True)
class Scenario:
    name: str
    hours: tuple
    frames: np.ndarray = field(compare=False, repr=False)
    seed: int = 0

    def __post_init__(self):
        if len(self.hours) != HOURS:
            raise ValueError(f"scenario needs {HOURS} hour labels, got {len(self.hours)}")
        if len(self.frames) != HOURS * FRAMES_PER_HOUR:
            raise ValueError(f"scenario needs {HOURS * FRAMES_PER_HOUR} frames")

    @property
    def digest(self) -> str:
        h = hashlib.sha256(self.name.encode())
        h.update(",".join(self.hours).encode())
        h.update(np.asarray(self.frames, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]


def generate_scenario(kind: str, seed: int = 0, labels=None) -> Scenario:
    """Expand 24 hour labels into 1440 per-frame pedestrian counts.

    ``kind`` is ``weekdays``, ``weekends`` or ``custom`` (which needs ``labels``).
    """
    if labels is None:
        if kind not in DEFAULT_LABELS:
            raise ValueError(f"unknown scenario kind {kind!r}")
        labels = DEFAULT_LABELS[kind]
    elif kind in DEFAULT_LABELS:
        raise ValueError(f"built-in scenario {kind!r} does not take custom labels")
    labels = tuple(labels)
    for h, label in enumerate(labels):
        if label not in BUCKETS:
            raise ValueError(f"hour {h}: unknown density label {label!r}")
    rng = np.random.default_rng(seed)
    frames = np.concatenate([
        rng.integers(BUCKETS[lab][0], BUCKETS[lab][1] + 1, size=FRAMES_PER_HOUR) for lab in labels
    ])
    return Scenario(kind, labels, frames, seed)


def recall(mode: OperationMode) -> float:
    return min(1.0, max(0.0, 1.25 * mode.objectives.acc))


@dataclass(frozen=True)
class WindowRecord:
    window_index: int
    mode: str
    energy_wh: float
    frames_processed: int
    mean_true_count: float
    mean_detected_count: float
    peak_detected_count: int
    accuracy: float


@dataclass
class SimulationReport:
    subject: str
    scenario: str
    windows: list
    scenario_digest: str = ""
    window_seconds: float = 120.0

    @property
    def mode_timeline(self) -> list[str]:
        return [w.mode for w in self.windows]

    @property
    def total_energy_wh(self) -> float:
        return math.fsum(w.energy_wh for w in self.windows)

    @property
    def total_frames(self) -> int:
        return sum(w.frames_processed for w in self.windows)

    @property
    def mean_fpr(self) -> float:
        """Processed frames per second over the whole scenario."""
        if not self.windows:
            return 0.0
        return self.total_frames / (len(self.windows) * self.window_seconds)

    @property
    def accuracy_proxy(self) -> float:
        """Frame-weighted mean of the active configuration's accuracy (windows are equal-sized)."""
        if not self.windows:
            return 0.0
        return math.fsum(w.accuracy for w in self.windows) / len(self.windows)

    def aggregates(self) -> dict:
        return {
            "total_energy_wh": self.total_energy_wh,
            "total_frames": self.total_frames,
            "mean_fpr": self.mean_fpr,
            "accuracy_proxy": self.accuracy_proxy,
        }


@dataclass(frozen=True)
class SimulationSettings:
    window_frames: int = FRAMES_PER_HOUR
    frame_cadence_s: float = 2.0
    switch_energy_wh: float = 0.0

    @property
    def window_seconds(self) -> float:
        return self.window_frames * self.frame_cadence_s


def _windows(scenario: Scenario, settings: SimulationSettings):
    n = len(scenario.frames)
    if n % settings.window_frames:
        raise ValueError(f"{n} frames do not tile into windows of {settings.window_frames}")
    for w in range(n // settings.window_frames):
        yield w, scenario.frames[w * settings.window_frames:(w + 1) * settings.window_frames]


def _charge(mode: OperationMode, true_counts, rng, w: int, params: DeviceModelParams,
            settings: SimulationSettings, extra_wh: float = 0.0) -> WindowRecord:
    scale = settings.window_seconds / params.window_s
    detected = rng.binomial(true_counts, recall(mode))
    return WindowRecord(
        window_index=w,
        mode=mode.name,
        energy_wh=mode.objectives.eng * scale + extra_wh,
        frames_processed=math.floor(mode.objectives.rate * scale + 1e-9),
        mean_true_count=float(np.mean(true_counts)),
        mean_detected_count=float(np.mean(detected)),
        peak_detected_count=int(detected.max()),
        accuracy=mode.objectives.acc,
    )


def simulate_static(scenario: Scenario, mode: OperationMode, params: DeviceModelParams,
                    seed: int = 0, settings: SimulationSettings = SimulationSettings()) -> SimulationReport:
    """Replay ``scenario`` with one fixed operation mode."""
    rng = np.random.default_rng(seed)
    windows = [_charge(mode, counts, rng, w, params, settings) for w, counts in _windows(scenario, settings)]
    return SimulationReport(mode.name, scenario.name, windows, scenario.digest, settings.window_seconds)


def simulate_adaptive(scenario: Scenario, runtime: FsmRuntime, params: DeviceModelParams,
                      seed: int = 0, settings: SimulationSettings = SimulationSettings(),
                      subject: str = "adaptive") -> SimulationReport:
    """Replay ``scenario`` under the FSM; a mode switch takes effect in the next window."""
    rng = np.random.default_rng(seed)
    windows = []
    pending_switch = 0.0
    for w, counts in _windows(scenario, settings):
        record = _charge(runtime.current_mode, counts, rng, w, params, settings, pending_switch)
        windows.append(record)
        obs = WindowObservation(w, record.mean_detected_count, len(counts), record.peak_detected_count)
        _, fired = runtime.step(obs)
        pending_switch = settings.switch_energy_wh if fired else 0.0
    return SimulationReport(subject, scenario.name, windows, scenario.digest, settings.window_seconds)


@dataclass
class ComparisonTable:
    subject: str
    scenario: str
    rows: list
    deltas: list
    boxplot: list
    radar: list


def _quantiles(values) -> dict:
    q = np.quantile(np.asarray(values, dtype=float), [0, 0.25, 0.5, 0.75, 1.0])
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(x) for x in q)))


def compare(reports: list[SimulationReport], block_windows: int = 4) -> ComparisonTable:
    """Aggregates, deltas against the first report, and plot-ready exports.

    Savings are ``(other - subject) / other``; gains are ``(subject - other) / other``.
    Box-plot rows hold quantiles of window energies per block of ``block_windows``.
    """
    if len(reports) < 2:
        raise ValueError("comparison needs at least two reports")
    base = reports[0]
    for r in reports[1:]:
        if (r.scenario, r.scenario_digest) != (base.scenario, base.scenario_digest):
            raise ValueError(f"report {r.subject!r} ran on a different scenario than {base.subject!r}")

    rows = [{"subject": r.subject, "scenario": r.scenario, **r.aggregates()} for r in reports]

    def rel(num, den):
        return num / den if den else 0.0

    deltas = []
    for r in reports[1:]:
        deltas.append({
            "subject": base.subject,
            "versus": r.subject,
            "energy_saving": rel(r.total_energy_wh - base.total_energy_wh, r.total_energy_wh),
            "fpr_gain": rel(base.mean_fpr - r.mean_fpr, r.mean_fpr),
            "accuracy_delta": rel(base.accuracy_proxy - r.accuracy_proxy, r.accuracy_proxy),
        })

    boxplot = []
    for r in reports:
        for start in range(0, len(r.windows), block_windows):
            block = r.windows[start:start + block_windows]
            boxplot.append({
                "subject": r.subject,
                "block": f"{start:02d}-{start + len(block):02d}",
                **_quantiles([w.energy_wh for w in block]),
            })

    return ComparisonTable(base.subject, base.scenario, rows, deltas, boxplot, radar_rows(rows))


def radar_rows(rows: list[dict]) -> list[dict]:
    """Per-axis min-max normalization over subjects; 1 is best on every axis."""
    axes = (("acc", "accuracy_proxy", True), ("eng", "total_energy_wh", False), ("rate", "mean_fpr", True))
    out = [{"subject": r["subject"]} for r in rows]
    for name, key, larger_better in axes:
        vals = [r[key] for r in rows]
        lo, hi = min(vals), max(vals)
        for o, v in zip(out, vals):
            if hi == lo:
                o[name] = 1.0
            else:
                o[name] = (v - lo) / (hi - lo) if larger_better else (hi - v) / (hi - lo)
    return out
