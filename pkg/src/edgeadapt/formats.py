"""File formats: front exports, mode tables, simulation reports, comparisons, manifests."""

from __future__ import annotations

import contextlib
import dataclasses
import datetime as _dt
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from . import __version__
from .objectives import DIRECTIONS, ObjectiveVector, Trial
from .pareto import ParetoFront
from .scenario import ComparisonTable, SimulationReport, WindowRecord
from .space import SearchSpace, canonical_index, normalize_conf
from .wgra import ModeSpec, OperationMode


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def front_to_json(space: SearchSpace, front: ParetoFront) -> str:
    members = [
        {"config": space.as_dict(t.config), "acc": t.objectives.acc, "eng": t.objectives.eng,
         "rate": t.objectives.rate, "sampler_tag": t.sampler_tag, "seed": t.seed}
        for t in sorted(front.members, key=lambda t: t.index)
    ]
    return dumps({"directions": dict(zip(ObjectiveVector._fields, front.directions)), "members": members})


def front_from_json(space: SearchSpace, text: str) -> ParetoFront:
    doc = json.loads(text)
    members = []
    for i, m in enumerate(doc["members"]):
        conf = normalize_conf(space, space.from_dict(m["config"]))
        members.append(Trial(conf, ObjectiveVector(float(m["acc"]), float(m["eng"]), int(m["rate"])),
                             m.get("sampler_tag", "oracle"), int(m.get("seed", 0)), i,
                             canonical_index(space, conf)))
    directions = tuple(doc.get("directions", {}).get(k, d) for k, d in zip(ObjectiveVector._fields, DIRECTIONS))
    return ParetoFront(members, directions)


def modes_to_json(space: SearchSpace, modes: Iterable[OperationMode], zeta: float) -> str:
    rows = [
        {"name": m.name, "weights": list(m.spec.weights), "thresholds": list(m.spec.thresholds),
         "config": space.as_dict(m.chosen), "acc": m.objectives.acc, "eng": m.objectives.eng,
         "rate": m.objectives.rate, "grg": m.grg}
        for m in modes
    ]
    return dumps({"zeta": zeta, "modes": rows})


def modes_from_json(space: SearchSpace, text: str) -> dict[str, OperationMode]:
    out = {}
    for row in json.loads(text)["modes"]:
        spec = ModeSpec(row["name"], tuple(row["weights"]), tuple(row["thresholds"]))
        conf = normalize_conf(space, space.from_dict(row["config"]))
        out[spec.name] = OperationMode(
            spec, conf, ObjectiveVector(float(row["acc"]), float(row["eng"]), int(row["rate"])), float(row["grg"]))
    return out


def report_to_json(report: SimulationReport) -> str:
    doc = {
        "subject": report.subject,
        "scenario": report.scenario,
        "scenario_digest": report.scenario_digest,
        "window_seconds": report.window_seconds,
        "aggregates": report.aggregates(),
        "windows": [dataclasses.asdict(w) for w in report.windows],
    }
    return dumps(doc)


def report_from_json(text: str) -> SimulationReport:
    doc = json.loads(text)
    windows = [WindowRecord(**w) for w in doc["windows"]]
    return SimulationReport(doc["subject"], doc["scenario"], windows, doc.get("scenario_digest", ""),
                            float(doc.get("window_seconds", 120.0)))


def comparison_to_json(table: ComparisonTable) -> str:
    return dumps({"kind": "comparison", **dataclasses.asdict(table)})


def comparison_from_json(text: str) -> ComparisonTable:
    doc = json.loads(text)
    doc.pop("kind", None)
    return ComparisonTable(**doc)


def load_result(path: str | Path) -> SimulationReport | ComparisonTable:
    text = Path(path).read_text()
    if json.loads(text).get("kind") == "comparison":
        return comparison_from_json(text)
    return report_from_json(text)


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(output: str | Path, command: str, inputs: dict, seeds: dict | None = None,
                   params: dict | None = None) -> Path:
    """Write ``<output>.manifest.json`` describing how ``output`` was produced."""
    path = Path(f"{output}.manifest.json")
    doc = {
        "command": command,
        "inputs": {k: ({"path": str(v), "sha256": sha256(v)} if v and Path(v).is_file() else {"builtin": str(v)})
                   for k, v in inputs.items()},
        "seeds": seeds or {},
        "params": params or {},
        "output": {"path": str(output), "sha256": sha256(output)},
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    atomic_write(path, dumps(doc))
    return path


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary sibling so a failure never leaves a partial file."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise
