"""Per-mode configuration selection by threshold filtering and weighted gray relational analysis."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .objectives import DIRECTIONS, MAXIMIZE, ObjectiveVector
from .pareto import ParetoFront
from .space import Configuration


class EmptyFrontError(ValueError):
    """Raised when a mode's thresholds filter out every front member."""


@dataclass(frozen=True)
class ModeSpec:
    name: str
    weights: tuple
    thresholds: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.thresholds):
            raise ValueError(f"mode {self.name!r}: weights and thresholds differ in length")
        if min(self.weights) < 0:
            raise ValueError(f"mode {self.name!r}: negative weight")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"mode {self.name!r}: weights sum to {sum(self.weights)}, not 1")


@dataclass(frozen=True)
class OperationMode:
    spec: ModeSpec
    chosen: Configuration
    objectives: ObjectiveVector
    grg: float

    @property
    def name(self) -> str:
        return self.spec.name


def parse_mode_specs(document: dict | list | str) -> list[ModeSpec]:
    """Read ``[{name, weights, thresholds}, ...]`` (optionally under a ``modes`` key).

    Weights are renormalized when they sum to 1 only up to rounding (e.g. the
    0.33/0.33/0.33 balanced triple).
    """
    if isinstance(document, str):
        document = yaml.safe_load(document)
    if isinstance(document, dict):
        document = document.get("modes")
    if not isinstance(document, list):
        raise ValueError("mode-spec document must be a list of modes")
    specs = []
    for pos, entry in enumerate(document):
        try:
            name, weights, thresholds = entry["name"], entry["weights"], entry["thresholds"]
        except (KeyError, TypeError):
            raise ValueError(f"mode at position {pos} needs name, weights and thresholds") from None
        weights = [float(w) for w in weights]
        total = sum(weights)
        if total > 0 and abs(total - 1.0) <= 0.02:
            weights = [w / total for w in weights]
        specs.append(ModeSpec(str(name), tuple(weights), tuple(float(t) for t in thresholds)))
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate mode names in {names}")
    return specs


def load_mode_specs(path: str | Path | None = None) -> list[ModeSpec]:
    if path is None:
        text = resources.files("edgeadapt").joinpath("data/pedestrian_modes.yaml").read_text()
    else:
        text = Path(path).read_text()
    return parse_mode_specs(text)


def passes_thresholds(values: Sequence[float], thresholds: Sequence[float],
                      directions: Sequence[str] = DIRECTIONS) -> bool:
    """Floors for maximized objectives, ceilings for minimized ones; 0 disables."""
    for v, t, d in zip(values, thresholds, directions):
        if t == 0:
            continue
        if d == MAXIMIZE and v < t:
            return False
        if d != MAXIMIZE and v > t:
            return False
    return True


def filter_front(front: ParetoFront, thresholds: Sequence[float],
                 directions: Sequence[str] | None = None) -> ParetoFront:
    directions = tuple(directions or front.directions)
    if len(thresholds) != len(directions):
        raise ValueError("thresholds must align with the objectives")
    kept = [t for t in front.members if passes_thresholds(t.objectives, thresholds, directions)]
    if not kept:
        raise EmptyFrontError(
            f"no front member survives thresholds {tuple(thresholds)}; "
            f"tightest is {_tightest(front, thresholds, directions)}"
        )
    return ParetoFront(kept, directions)


def _tightest(front: ParetoFront, thresholds, directions) -> str:
    worst, worst_drops = None, -1
    for j, (t, d) in enumerate(zip(thresholds, directions)):
        if t == 0:
            continue
        single = [0.0] * len(thresholds)
        single[j] = t
        drops = sum(not passes_thresholds(m.objectives, single, directions) for m in front.members)
        if drops > worst_drops:
            worst, worst_drops = j, drops
    names = ObjectiveVector._fields if len(thresholds) == 3 else range(len(thresholds))
    return f"{list(names)[worst]}={thresholds[worst]} (drops {worst_drops} of {len(front)})"


def normalize(matrix, directions: Sequence[str] = DIRECTIONS) -> np.ndarray:
    """Min-max normalize each column so that 1 is best; constant columns become 1."""
    f = np.asarray(matrix, dtype=float)
    if f.ndim != 2 or len(f) == 0:
        raise ValueError("need a non-empty 2-D objective matrix")
    if not np.isfinite(f).all():
        raise ValueError("objective matrix contains non-finite values")
    lo, hi = f.min(axis=0), f.max(axis=0)
    span = hi - lo
    out = np.ones_like(f)
    for j, d in enumerate(directions):
        if span[j] == 0:
            continue
        if d == MAXIMIZE:
            out[:, j] = (f[:, j] - lo[j]) / span[j]
        else:
            out[:, j] = (hi[j] - f[:, j]) / span[j]
    return out


def reference_network(normalized) -> np.ndarray:
    return np.asarray(normalized, dtype=float).max(axis=0)


def grg(normalized, reference, weights: Sequence[float], zeta: float = 1.0) -> np.ndarray:
    """Weighted gray relational grade of every row against ``reference``.

    GRC_ij = (dmin + zeta*dmax) / (d_ij + zeta*dmax) with global delta extremes;
    the grade is the weighted sum of coefficients and lies in (0, 1].
    """
    f = np.asarray(normalized, dtype=float)
    if f.size == 0:
        raise ValueError("empty matrix")
    if not 0 < zeta <= 1:
        raise ValueError(f"zeta must lie in (0, 1], got {zeta}")
    delta = np.abs(np.asarray(reference, dtype=float) - f)
    d_min, d_max = delta.min(), delta.max()
    if d_max == 0:
        coeff = np.ones_like(delta)
    else:
        coeff = (d_min + zeta * d_max) / (delta + zeta * d_max)
    return coeff @ np.asarray(weights, dtype=float)


def select_mode_config(front: ParetoFront, spec: ModeSpec, zeta: float = 1.0) -> OperationMode:
    """Filter, grade, and pick the best member; equal grades go to the lowest canonical index."""
    filtered = filter_front(front, spec.thresholds)
    members = filtered.members
    if len(members) == 1:
        only = members[0]
        return OperationMode(spec, only.config, only.objectives, 1.0)
    f = normalize(filtered.objective_matrix(), filtered.directions)
    grades = grg(f, reference_network(f), spec.weights, zeta)
    best = max(range(len(members)), key=lambda i: (grades[i], -members[i].index))
    chosen = members[best]
    return OperationMode(spec, chosen.config, chosen.objectives, float(grades[best]))


def select_modes(front: ParetoFront, specs: Sequence[ModeSpec], zeta: float = 1.0) -> list[OperationMode]:
    return [select_mode_config(front, s, zeta) for s in specs]
