"""Discrete configuration search spaces.

A space is an ordered list of parameters, each with a finite ordered domain.
Configurations are plain tuples holding one value per parameter, in the
space's canonical (document) order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterator, Sequence

import yaml

Configuration = tuple


class SpaceError(ValueError):
    """Raised when a space document is malformed."""


def _key(value: Any) -> tuple:
    # bool is an int subclass; keep True distinct from 1.
    if isinstance(value, bool):
        return ("b", value)
    if isinstance(value, (int, float)):
        # absorb binary drift such as 0.1 * 3 == 0.30000000000000004
        return ("n", round(float(value), 12))
    return ("s", value)


@dataclass(frozen=True)
class ParameterDef:
    name: str
    kind: str
    domain: tuple
    _positions: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.domain:
            raise SpaceError(f"parameter {self.name!r}: empty domain")
        positions = {}
        for i, v in enumerate(self.domain):
            k = _key(v)
            if k in positions:
                raise SpaceError(f"parameter {self.name!r}: duplicate value {v!r} at position {i}")
            positions[k] = i
        object.__setattr__(self, "_positions", positions)

    def __len__(self) -> int:
        return len(self.domain)

    def position(self, value: Any) -> int:
        """Index of ``value`` in the domain; raises ``KeyError`` if absent."""
        try:
            return self._positions[_key(value)]
        except (KeyError, TypeError):
            raise KeyError(value) from None

    def __contains__(self, value: Any) -> bool:
        try:
            self.position(value)
        except KeyError:
            return False
        return True


def stepped_domain(low: float, high: float, step: float) -> tuple:
    """Expand a (low, high, step) grid, rounding to the step's decimal places."""
    lo, hi, st = Decimal(str(low)), Decimal(str(high)), Decimal(str(step))
    if st <= 0:
        raise SpaceError(f"non-positive step {step!r}")
    if hi < lo:
        raise SpaceError(f"high {high!r} below low {low!r}")
    count = int((hi - lo) // st) + 1
    places = max(-st.as_tuple().exponent, -lo.as_tuple().exponent, 0)
    values = [lo + i * st for i in range(count)]
    if all(v == v.to_integral_value() for v in values) and places == 0:
        return tuple(int(v) for v in values)
    return tuple(round(float(v), places) for v in values)


@dataclass(frozen=True)
class SearchSpace:
    parameters: tuple

    def __post_init__(self):
        seen = set()
        for i, p in enumerate(self.parameters):
            if p.name in seen:
                raise SpaceError(f"duplicate parameter name {p.name!r} at position {i}")
            seen.add(p.name)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    @property
    def sizes(self) -> list[int]:
        return [len(p) for p in self.parameters]

    def __len__(self) -> int:
        return cardinality(self)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def as_dict(self, conf: Configuration) -> dict:
        return dict(zip(self.names, conf))

    def from_dict(self, values: dict) -> Configuration:
        missing = [n for n in self.names if n not in values]
        if missing:
            raise SpaceError(f"configuration is missing parameters {missing}")
        return tuple(values[n] for n in self.names)


def parse_space(document: dict | str) -> SearchSpace:
    """Build a :class:`SearchSpace` from a parsed document or YAML/JSON text."""
    if isinstance(document, str):
        document = yaml.safe_load(document)
    if not isinstance(document, dict) or not isinstance(document.get("parameters"), list):
        raise SpaceError("space document needs a top-level 'parameters' list")

    params = []
    for pos, entry in enumerate(document["parameters"]):
        if not isinstance(entry, dict) or "name" not in entry:
            raise SpaceError(f"parameter at position {pos}: missing 'name'")
        name = entry["name"]
        kind = entry.get("kind")
        where = f"parameter {name!r} at position {pos}"
        if kind == "categorical":
            values = entry.get("values")
            if not isinstance(values, list):
                raise SpaceError(f"{where}: categorical parameter needs a 'values' list")
            domain = tuple(values)
        elif kind == "stepped":
            try:
                low, high, step = entry["low"], entry["high"], entry["step"]
            except KeyError as exc:
                raise SpaceError(f"{where}: stepped parameter missing {exc.args[0]!r}") from None
            try:
                domain = stepped_domain(low, high, step)
            except SpaceError as exc:
                raise SpaceError(f"{where}: {exc}") from None
        else:
            raise SpaceError(f"{where}: unknown kind {kind!r}")
        try:
            params.append(ParameterDef(name, kind, domain))
        except SpaceError as exc:
            raise SpaceError(f"{exc} (position {pos})") from None
    return SearchSpace(tuple(params))


def load_space(path: str | Path) -> SearchSpace:
    return parse_space(Path(path).read_text())


def cardinality(space: SearchSpace) -> int:
    return math.prod(space.sizes)


def canonical_index(space: SearchSpace, conf: Configuration) -> int:
    """Mixed-radix position of ``conf``; the first parameter is most significant."""
    if len(conf) != len(space.parameters):
        raise ValueError(f"configuration has {len(conf)} values, space has {len(space.parameters)}")
    index = 0
    for p, v in zip(space.parameters, conf):
        try:
            pos = p.position(v)
        except KeyError:
            raise ValueError(f"value {v!r} not in domain of {p.name!r}") from None
        index = index * len(p) + pos
    return index


def decode_index(space: SearchSpace, index: int) -> Configuration:
    """Inverse of :func:`canonical_index`."""
    n = cardinality(space)
    if not 0 <= index < n:
        raise ValueError(f"index {index} outside [0, {n})")
    values = []
    for p in reversed(space.parameters):
        index, pos = divmod(index, len(p))
        values.append(p.domain[pos])
    return tuple(reversed(values))


def enumerate_space(space: SearchSpace) -> Iterator[Configuration]:
    """Yield every configuration once, in canonical index order."""
    return itertools.product(*(p.domain for p in space.parameters))


def validate_conf(space: SearchSpace, conf: Sequence) -> list[str]:
    """Return diagnostics for ``conf``; an empty list means it is valid."""
    if len(conf) != len(space.parameters):
        return [f"arity mismatch: got {len(conf)} values, expected {len(space.parameters)}"]
    for i, (p, v) in enumerate(zip(space.parameters, conf)):
        if v not in p:
            return [f"position {i} ({p.name}): value {v!r} not in domain {list(p.domain)}"]
    return []


def normalize_conf(space: SearchSpace, conf: Sequence) -> Configuration:
    """Replace each value by the domain's own representative (e.g. 0.30000000000000004 -> 0.3)."""
    problems = validate_conf(space, conf)
    if problems:
        raise ValueError(problems[0])
    return tuple(p.domain[p.position(v)] for p, v in zip(space.parameters, conf))
