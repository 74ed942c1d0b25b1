"""Objectives, the synthetic device model, and the deduplicating trial store."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, NamedTuple

import yaml

from .space import Configuration, SearchSpace, canonical_index, enumerate_space, normalize_conf

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

ROLES = ("resolution", "fps", "model", "threshold", "tpu")


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    direction: str
    units: str = ""


OBJECTIVES = (
    ObjectiveSpec("acc", MAXIMIZE, "mAP in [0, 1]"),
    ObjectiveSpec("eng", MINIMIZE, "Wh per measurement window"),
    ObjectiveSpec("rate", MAXIMIZE, "frames per measurement window"),
)
DIRECTIONS = tuple(o.direction for o in OBJECTIVES)


class ObjectiveVector(NamedTuple):
    acc: float
    eng: float
    rate: int


Evaluator = Callable[[Configuration], ObjectiveVector]


@dataclass(frozen=True)
class DeviceModelParams:
    """Constants of the closed-form device model.

    ``models`` maps a model name to ``(base_accuracy, cpu_latency_s, tpu_latency_s)``.
    ``parameter_names`` maps each role in :data:`ROLES` to the space parameter
    that carries it.
    """

    models: dict
    res_latency: dict
    res_accuracy: dict
    p_idle: float = 2.7
    p_cam_base: float = 0.2
    p_cam_fps: float = 0.01
    p_tpu_idle: float = 0.5
    p_cpu_active: float = 3.5
    p_tpu_active: float = 2.0
    window_s: float = 120.0
    parameter_names: dict = field(default_factory=lambda: {r: r for r in ROLES})

    def __post_init__(self):
        for name, (acc, l_cpu, l_tpu) in self.models.items():
            if l_cpu <= 0 or l_tpu <= 0:
                raise ValueError(f"model {name!r}: latencies must be positive")
            if not 0 <= acc <= 1:
                raise ValueError(f"model {name!r}: base accuracy outside [0, 1]")
        for f in self.res_latency.values():
            if f <= 0:
                raise ValueError("resolution latency factors must be positive")
        powers = (self.p_idle, self.p_cam_base, self.p_cam_fps, self.p_tpu_idle,
                  self.p_cpu_active, self.p_tpu_active)
        if min(powers) < 0:
            raise ValueError("power constants must be non-negative")
        if self.window_s <= 0:
            raise ValueError("window duration must be positive")

    def evaluator(self, space: SearchSpace) -> Evaluator:
        """Return ``conf -> ObjectiveVector`` for configurations of ``space``."""
        order = [space.index_of(self.parameter_names[r]) for r in ROLES]

        def _evaluate(conf: Configuration) -> ObjectiveVector:
            return evaluate(self, tuple(conf[i] for i in order))

        return _evaluate


def parse_device_model(document: dict | str) -> DeviceModelParams:
    if isinstance(document, str):
        document = yaml.safe_load(document)
    power = document.get("power_w", {})
    kwargs = {
        "models": {k: tuple(float(x) for x in v) for k, v in document["models"].items()},
        "res_latency": {str(k): float(v) for k, v in document["resolution_latency_factor"].items()},
        "res_accuracy": {str(k): float(v) for k, v in document["resolution_accuracy_factor"].items()},
        "p_idle": power.get("idle", 2.7),
        "p_cam_base": power.get("camera_base", 0.2),
        "p_cam_fps": power.get("camera_per_fps", 0.01),
        "p_tpu_idle": power.get("tpu_idle", 0.5),
        "p_cpu_active": power.get("cpu_active", 3.5),
        "p_tpu_active": power.get("tpu_active", 2.0),
        "window_s": float(document.get("window_s", 120)),
    }
    if "parameter_names" in document:
        kwargs["parameter_names"] = dict(document["parameter_names"])
    return DeviceModelParams(**kwargs)


def load_device_model(path: str | Path | None = None) -> DeviceModelParams:
    """Load a device-model file, or the bundled synthetic defaults."""
    if path is None:
        text = resources.files("edgeadapt").joinpath("data/device_model.yaml").read_text()
    else:
        text = Path(path).read_text()
    return parse_device_model(text)


def latency(params: DeviceModelParams, conf: Configuration) -> float:
    """Seconds per frame for a ``(R, FPS, M, T, TPU)`` configuration."""
    resolution, _, model, _, tpu = conf
    try:
        _, l_cpu, l_tpu = params.models[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}") from None
    return (l_tpu if tpu else l_cpu) * params.res_latency[resolution]


def accuracy_curve(threshold: float) -> float:
    return 1.0 - (threshold - 0.4) ** 2 / 0.5


def evaluate(params: DeviceModelParams, conf: Configuration) -> ObjectiveVector:
    """Objectives of a ``(R, FPS, M, T, TPU)`` configuration over one window."""
    resolution, fps, model, threshold, tpu = conf
    l_eff = latency(params, conf)
    r_eff = min(fps, 1.0 / l_eff)
    # guard floor() against 1/L * D landing a hair under an integer
    rate = math.floor(r_eff * params.window_s + 1e-9)
    duty = min(1.0, r_eff * l_eff)
    power = (
        params.p_idle
        + params.p_cam_base
        + params.p_cam_fps * fps
        + (params.p_tpu_idle if tpu else 0.0)
        + (params.p_tpu_active if tpu else params.p_cpu_active) * duty
    )
    eng = power * params.window_s / 3600.0
    acc = params.models[model][0] * params.res_accuracy[resolution] * accuracy_curve(threshold)
    return ObjectiveVector(acc, eng, rate)


@dataclass(frozen=True)
class Trial:
    config: Configuration
    objectives: ObjectiveVector
    sampler_tag: str
    seed: int
    sequence_number: int
    index: int = field(default=-1, compare=False)


class TrialStore:
    """Append-only trial history with a dedup index keyed by canonical index.

    Re-recording a configuration returns the cached trial without calling the
    evaluator again.
    """

    def __init__(self, space: SearchSpace, evaluator: Evaluator | None = None):
        self.space = space
        self.evaluator = evaluator
        self.trials: list[Trial] = []
        self.dedup_index: dict[int, Trial] = {}
        self.proposals = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def __contains__(self, conf) -> bool:
        return canonical_index(self.space, conf) in self.dedup_index

    def record(self, conf: Configuration, sampler_tag: str, seed: int) -> tuple[Trial, bool]:
        conf = normalize_conf(self.space, conf)
        idx = canonical_index(self.space, conf)
        with self._lock:
            self.proposals += 1
            cached = self.dedup_index.get(idx)
            if cached is not None:
                return cached, False
        objectives = self.evaluator(conf)
        with self._lock:
            cached = self.dedup_index.get(idx)
            if cached is not None:
                return cached, False
            trial = Trial(conf, objectives, sampler_tag, seed, len(self.trials), idx)
            self.trials.append(trial)
            self.dedup_index[idx] = trial
            return trial, True

    def add(self, trial: Trial) -> None:
        """Insert an already-evaluated trial (used when reloading logs)."""
        idx = canonical_index(self.space, trial.config)
        if idx in self.dedup_index:
            return
        trial = Trial(trial.config, trial.objectives, trial.sampler_tag, trial.seed,
                      len(self.trials), idx)
        self.trials.append(trial)
        self.dedup_index[idx] = trial


def record_trial(store: TrialStore, conf: Configuration, sampler_tag: str, seed: int) -> tuple[Trial, bool]:
    return store.record(conf, sampler_tag, seed)


def unique_trials(store: TrialStore) -> int:
    return len(store.dedup_index)


def trial_to_record(space: SearchSpace, trial: Trial) -> dict:
    return {
        "sequence_number": trial.sequence_number,
        "sampler_tag": trial.sampler_tag,
        "seed": trial.seed,
        "config": space.as_dict(trial.config),
        "acc": trial.objectives.acc,
        "eng": trial.objectives.eng,
        "rate": trial.objectives.rate,
    }


def trial_from_record(space: SearchSpace, record: dict) -> Trial:
    conf = normalize_conf(space, space.from_dict(record["config"]))
    return Trial(
        conf,
        ObjectiveVector(float(record["acc"]), float(record["eng"]), int(record["rate"])),
        record.get("sampler_tag", "oracle"),
        int(record.get("seed", 0)),
        int(record.get("sequence_number", 0)),
        canonical_index(space, conf),
    )


def dump_trials(space: SearchSpace, trials: Iterable[Trial]) -> str:
    """Serialize trials as JSON lines (Python ``repr`` floats, full precision)."""
    return "".join(json.dumps(trial_to_record(space, t)) + "\n" for t in trials)


def load_trials(space: SearchSpace, text: str) -> TrialStore:
    store = TrialStore(space)
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            store.add(trial_from_record(space, json.loads(line)))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"trial log line {lineno}: {exc}") from None
    return store


def oracle_store(space: SearchSpace, evaluator: Evaluator) -> TrialStore:
    """Evaluate every configuration of ``space`` in canonical order."""
    store = TrialStore(space, evaluator)
    for conf in enumerate_space(space):
        store.record(conf, "oracle", 0)
    return store
