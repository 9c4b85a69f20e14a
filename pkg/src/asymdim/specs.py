"""Space specifications: parsing, validation and canonical hashing.

A specification is a ``kind`` tag plus a flat ``params`` mapping.  ``union``
and ``product`` nest further specifications under ``params["specs"]``.

Config documents (YAML or JSON) look like::

    kind: union
    params:
      bridge: 1
      specs:
        - {kind: lattice, params: {d: 1}}
        - {kind: lattice, params: {d: 2}}

Inline tags used on the command line are ``kind:key=value,key=value``,
e.g. ``lattice:d=2,metric=sup`` or ``torus:d=2,side=128``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import SpecError

_REQUIRED = object()

# kind -> {param: default}; _REQUIRED marks mandatory keys
KINDS: dict[str, dict[str, Any]] = {
    "lattice": {"d": _REQUIRED, "metric": "graph", "budget": 64},
    "cycle_torus": {"d": _REQUIRED, "side": _REQUIRED, "metric": "graph"},
    "graph": {"edges": _REQUIRED, "n": None, "vertex_weights": None, "base": 0},
    "points": {"coords": _REQUIRED, "metric": "l2", "weights": None, "base": 0},
    "grid_cube": {"d": 2, "step": _REQUIRED},
    "region_alpha": {"alpha": _REQUIRED, "resolution": 0.25, "budget": 256.0},
    "union": {"specs": _REQUIRED, "bridge": 1.0},
    "product": {"specs": _REQUIRED},
    "standard_end": {"N": _REQUIRED, "D": _REQUIRED, "omega": None},
    "davies_remark_end": {"omega": None},
    "oscillating_end": {"omega": 1.0},
    "cantor": {"depth": _REQUIRED},
    "disk_chain": {"count": _REQUIRED, "resolution": 1 / 32},
}

ALIASES = {"torus": "cycle_torus", "region": "region_alpha", "Z": "lattice"}

ANALYTIC_KINDS = frozenset({"standard_end", "davies_remark_end", "oscillating_end"})
METRICS = ("l1", "l2", "linf")


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    params: dict = field(default_factory=dict)
    children: tuple = ()

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.children:
            params["specs"] = [c.to_dict() for c in self.children]
        return {"kind": self.kind, "params": params}

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """Short stable hash used to key caches and stamp reports."""
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    @property
    def is_analytic(self) -> bool:
        return self.kind in ANALYTIC_KINDS


def _positive(name, value, *, integer=False, strict=True):
    if integer:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            else:
                raise SpecError(f"expected an integer, got {value!r}", name)
    elif not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SpecError(f"expected a number, got {value!r}", name)
    if not math.isfinite(value) or (value <= 0 if strict else value < 0):
        raise SpecError(f"must be {'> 0' if strict else '>= 0'}, got {value!r}", name)
    return value


def _validate(kind: str, params: dict) -> dict:
    p = params
    if kind == "lattice":
        p["d"] = _positive("d", p["d"], integer=True)
        if p["metric"] not in ("graph", "sup"):
            raise SpecError("must be 'graph' or 'sup'", "metric")
        p["budget"] = _positive("budget", p["budget"])
    elif kind == "cycle_torus":
        p["d"] = _positive("d", p["d"], integer=True)
        p["side"] = _positive("side", p["side"], integer=True)
        if p["side"] < 3:
            raise SpecError("must be >= 3", "side")
        if p["metric"] not in ("graph", "sup"):
            raise SpecError("must be 'graph' or 'sup'", "metric")
    elif kind == "grid_cube":
        p["d"] = _positive("d", p["d"], integer=True)
        p["step"] = _positive("step", p["step"])
    elif kind == "region_alpha":
        a = p["alpha"]
        if not isinstance(a, (int, float)) or not 0 < a <= 1:
            raise SpecError(f"must lie in (0, 1], got {a!r}", "alpha")
        p["alpha"] = float(a)
        p["resolution"] = float(_positive("resolution", p["resolution"]))
        p["budget"] = float(_positive("budget", p["budget"]))
    elif kind == "points":
        if p["metric"] not in METRICS:
            raise SpecError(f"must be one of {METRICS}", "metric")
        if not p["coords"]:
            raise SpecError("must be non-empty", "coords")
    elif kind == "graph":
        if not isinstance(p["edges"], (list, tuple)):
            raise SpecError("must be a list of [u, v] or [u, v, w]", "edges")
        for e in p["edges"]:
            if len(e) not in (2, 3):
                raise SpecError(f"bad edge {e!r}", "edges")
            if len(e) == 3 and not e[2] > 0:
                raise SpecError(f"edge weight must be > 0 in {e!r}", "edges")
    elif kind == "union":
        p["bridge"] = float(_positive("bridge", p["bridge"], strict=False))
    elif kind == "standard_end":
        p["N"] = _positive("N", p["N"], integer=True)
        p["D"] = float(_positive("D", p["D"]))
        if p["D"] < p["N"]:
            raise SpecError(f"must satisfy D >= N, got D={p['D']}, N={p['N']}", "D")
    elif kind == "cantor":
        p["depth"] = _positive("depth", p["depth"], integer=True)
        if p["depth"] > 20:
            raise SpecError("must be <= 20", "depth")
    elif kind == "disk_chain":
        p["count"] = _positive("count", p["count"], integer=True)
        p["resolution"] = float(_positive("resolution", p["resolution"]))
    if "omega" in p and p["omega"] is not None:
        p["omega"] = float(_positive("omega", p["omega"]))
    return p


def make_spec(kind: str, **params) -> SpaceSpec:
    """Build and validate a spec from keyword parameters."""
    return parse_spec({"kind": kind, "params": params})


def parse_spec(doc: dict) -> SpaceSpec:
    """Validate a ``{kind, params}`` mapping (nested for union/product)."""
    if not isinstance(doc, dict):
        raise SpecError(f"expected a mapping, got {type(doc).__name__}", "spec")
    extra = set(doc) - {"kind", "params"}
    if extra:
        raise SpecError(f"unknown keys {sorted(extra)}", "spec")
    if "kind" not in doc:
        raise SpecError("missing", "kind")
    kind = ALIASES.get(doc["kind"], doc["kind"])
    if kind not in KINDS:
        raise SpecError(f"unknown kind {doc['kind']!r}; known: {sorted(KINDS)}", "kind")
    given = dict(doc.get("params") or {})
    schema = KINDS[kind]
    unknown = set(given) - set(schema)
    if unknown:
        raise SpecError(f"unknown keys {sorted(unknown)} for kind {kind!r}", "params")
    params = {}
    for key, default in schema.items():
        if key in given:
            params[key] = given[key]
        elif default is _REQUIRED:
            raise SpecError(f"required for kind {kind!r}", key)
        else:
            params[key] = default
    children = ()
    if kind in ("union", "product"):
        specs = params.pop("specs")
        if not isinstance(specs, (list, tuple)) or len(specs) < 2:
            raise SpecError("needs at least two nested specs", "specs")
        children = tuple(s if isinstance(s, SpaceSpec) else parse_spec(s) for s in specs)
        for c in children:
            if c.is_analytic:
                raise SpecError(f"{kind} of analytic ends is not supported", "specs")
    return SpaceSpec(kind, _validate(kind, params), children)


def _scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_inline(tag: str) -> SpaceSpec:
    """Parse ``kind:key=value,...`` into a spec."""
    kind, _, rest = tag.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise SpecError(f"expected key=value, got {item!r}", "space")
        params[key.strip()] = _scalar(value.strip())
    return parse_spec({"kind": kind.strip(), "params": params})


def load_spec(source: str | Path) -> SpaceSpec:
    """Load a spec from a YAML/JSON file path, or parse an inline tag."""
    path = Path(source)
    if path.suffix in (".yaml", ".yml", ".json") or path.is_file():
        try:
            doc = yaml.safe_load(path.read_text())
        except OSError as exc:
            raise SpecError(f"cannot read {source}: {exc}", "space") from exc
        except yaml.YAMLError as exc:
            raise SpecError(f"malformed document: {exc}", "space") from exc
        return parse_spec(doc)
    return parse_inline(str(source))
