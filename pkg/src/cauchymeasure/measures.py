"""Finite complex measures built from atoms and analytic densities on circles
and segments.

A density component is a measure ``f(w) dw`` (complex line element along the
oriented circle), ``f(w) dt`` (angle parameter ``w = c + R e^{it}``) or, on a
segment, ``f(w) |dw|``.  For every node count ``n`` a component discretises
to weighted point masses at quadrature nodes; transforms, moments and masses
are computed from that discretisation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Union

import numpy as np

from .errors import LinkError, PreconditionError, SchemaError
from .expr import (Expr, Z, as_expr, lit, parse_density, referenced_measures, references,
                   substitute, to_text)
from .expr import evaluate, link
from .numerics import (CCW, CW, DEFAULT_NODES, Circle, Segment, circle_rule,
                       circle_through_moebius, guard_distance, segment_rule)

DW = "dw"
DT = "dt"

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


@dataclass(frozen=True)
class Atom:
    location: complex
    mass: complex

    def __post_init__(self):
        object.__setattr__(self, "location", complex(self.location))
        object.__setattr__(self, "mass", complex(self.mass))
        if not np.isfinite(self.mass) or not np.isfinite(self.location):
            raise PreconditionError("atom location and mass must be finite")
        if self.mass == 0:
            raise PreconditionError("atom mass must be nonzero")

    @property
    def carrier(self):
        return None


class _Discretised:
    """Mixin caching (nodes, coefficients) per node count."""

    def discretize(self, n: int = DEFAULT_NODES):
        cache = self._cache
        if n not in cache:
            cache[n] = self._discretize(n)
        return cache[n]


@dataclass(frozen=True)
class CircleDensity(_Discretised):
    circle: Circle
    density: Expr
    differential: str = DW
    _cache: dict = field(default_factory=dict, init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "density", as_expr(self.density))
        if self.differential not in (DW, DT):
            raise PreconditionError(f"differential must be 'dw' or 'dt', got {self.differential!r}")

    @property
    def carrier(self):
        return self.circle

    def rule(self, n=DEFAULT_NODES):
        return circle_rule(self.circle, n)

    def _discretize(self, n):
        rule = self.rule(n)
        f = evaluate(self.density, rule.nodes, n=n)
        if self.differential == DW:
            c = f * rule.weights
        else:
            c = f * rule.arc_weights / self.circle.radius
        return rule.nodes, np.asarray(c, dtype=complex)

    def dw_density(self) -> Expr:
        """Equivalent density with respect to ``dw`` on the same oriented circle."""
        if self.differential == DW:
            return self.density
        # dw = +-i (w - c) dt
        return self.density / (lit(self.circle.sign * 1j) * (Z - lit(self.circle.center)))


@dataclass(frozen=True)
class SegmentDensity(_Discretised):
    segment: Segment
    density: Expr
    _cache: dict = field(default_factory=dict, init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "density", as_expr(self.density))

    @property
    def carrier(self):
        return self.segment

    def rule(self, n=DEFAULT_NODES):
        return segment_rule(self.segment.canonical(), n)

    def _discretize(self, n):
        rule = self.rule(n)
        f = evaluate(self.density, rule.nodes, n=n)
        return rule.nodes, np.asarray(f * rule.arc_weights, dtype=complex)


MeasureComponent = Union[Atom, CircleDensity, SegmentDensity]


@dataclass(frozen=True)
class MeasureSpec:
    name: str
    components: tuple = ()

    def __post_init__(self):
        if not _NAME_RE.match(self.name or ""):
            raise PreconditionError(f"measure name must be an identifier, got {self.name!r}")
        object.__setattr__(self, "components", tuple(self.components))

    def support(self):
        """(atom locations, distinct carriers)."""
        points, carriers = [], []
        for c in self.components:
            if isinstance(c, Atom):
                points.append(c.location)
            elif not any(c.carrier.same_carrier(k) for k in carriers):
                carriers.append(c.carrier)
        return points, carriers

    def requires(self) -> list:
        names = set()
        for c in self.components:
            if not isinstance(c, Atom):
                names |= references(c.density)
        return sorted(names)

    def renamed(self, name: str) -> "MeasureSpec":
        return MeasureSpec(name, self.components)

    def plus(self, *components, name=None) -> "MeasureSpec":
        return MeasureSpec(name or self.name, self.components + tuple(components))


def combine(name: str, *measures: MeasureSpec) -> MeasureSpec:
    comps = []
    for m in measures:
        comps.extend(m.components)
    return MeasureSpec(name, tuple(comps))


def zero_measure(name="zero") -> MeasureSpec:
    return MeasureSpec(name, ())


def atoms(name: str, locations, masses) -> MeasureSpec:
    return MeasureSpec(name, tuple(Atom(a, m) for a, m in zip(locations, masses)))


# {{{ total variation


def total_variation(m: MeasureSpec, n: int = DEFAULT_NODES) -> float:
    """Total variation ``|m|(C)``.

    Components sharing a carrier (or an atom location) are summed pointwise
    before taking absolute values, so the result is the variation of the
    measure, not of its presentation.
    """
    atom_mass = {}
    circles, segments = {}, {}
    for c in m.components:
        if isinstance(c, Atom):
            atom_mass[c.location] = atom_mass.get(c.location, 0) + c.mass
        elif isinstance(c, CircleDensity):
            circles.setdefault((c.circle.center, c.circle.radius), []).append(c)
        else:
            segments.setdefault(c.segment.canonical(), []).append(c)
    tv = sum(abs(v) for v in atom_mass.values())
    for (center, radius), group in circles.items():
        rule = circle_rule(Circle(center, radius), n)
        g = sum(_arc_values(c, rule, n) for c in group)
        tv += float(np.sum(np.abs(g) * rule.arc_weights))
    for seg, group in segments.items():
        rule = segment_rule(seg, n)
        g = sum(evaluate(c.density, rule.nodes, n=n) for c in group)
        tv += float(np.sum(np.abs(g) * rule.arc_weights))
    return float(tv)


def _arc_values(c: CircleDensity, rule, n):
    f = evaluate(c.density, rule.nodes, n=n)
    if c.differential == DT:
        return f / c.circle.radius
    tangent = c.circle.sign * 1j * (rule.nodes - c.circle.center) / c.circle.radius
    return f * tangent


def component_mass(c: MeasureComponent, n: int = DEFAULT_NODES) -> complex:
    if isinstance(c, Atom):
        return c.mass
    _, coeffs = c.discretize(n)
    return complex(np.sum(coeffs))


# }}}

# {{{ Moebius transport


def moebius_pushforward(m: MeasureSpec, x0: complex, name: str | None = None,
                        n: int = DEFAULT_NODES) -> MeasureSpec:
    """Transport ``m`` by ``M(z) = 1/(x0 - z)`` with ``d~m(w) = w dm(x0 - 1/w)``.

    Atoms map to atoms at ``M(a)`` with mass ``M(a) * mass``; circle densities
    map to densities on the image circle.  The transformed measure satisfies
    ``~m^(M(y)) = (x0 - y) m^(y)``.
    """
    x0 = complex(x0)
    out = []
    for c in m.components:
        if isinstance(c, Atom):
            if c.location == x0:
                raise PreconditionError(f"x0={x0} is an atom of {m.name}")
            w = 1.0 / (x0 - c.location)
            out.append(Atom(w, w * c.mass))
        elif isinstance(c, CircleDensity):
            d = float(c.circle.distance(x0))
            if d < guard_distance(c.circle, n):
                raise PreconditionError(f"x0={x0} lies on the support of {m.name} (distance {d:.3g})")
            image, _ = circle_through_moebius(c.circle, x0)
            pulled = substitute(c.dw_density(), lit(x0) - 1.0 / Z)
            out.append(CircleDensity(image, pulled / Z, DW))
        else:
            raise PreconditionError("segment densities cannot be transported (their image is an arc)")
    return MeasureSpec(name or f"{m.name}_moebius", tuple(out))


# }}}

# {{{ JSON documents


def _cpair(z: complex):
    z = complex(z)
    return [z.real, z.imag]


def _component_doc(c: MeasureComponent) -> dict:
    if isinstance(c, Atom):
        return {"kind": "atom", "location": _cpair(c.location), "mass": _cpair(c.mass)}
    if isinstance(c, CircleDensity):
        return {
            "kind": "circle_density",
            "circle": {"center": _cpair(c.circle.center), "radius": c.circle.radius,
                       "orientation": c.circle.orientation},
            "density": to_text(c.density),
            "differential": c.differential,
        }
    return {
        "kind": "segment_density",
        "segment": {"a": _cpair(c.segment.a), "b": _cpair(c.segment.b)},
        "density": to_text(c.density),
    }


def _measure_doc(m: MeasureSpec) -> dict:
    return {"name": m.name, "components": [_component_doc(c) for c in m.components],
            "requires": m.requires()}


def dependencies(m: MeasureSpec) -> list:
    """Measures referenced by ``m``, transitively, dependencies first."""
    seen, order = {}, []

    def visit(x, stack):
        for c in x.components:
            if isinstance(c, Atom):
                continue
            for dep in referenced_measures(c.density):
                if dep.name in stack:
                    raise LinkError(f"reference cycle through {dep.name!r}")
                if dep.name in seen:
                    if seen[dep.name] != dep:
                        raise LinkError(f"two different measures are named {dep.name!r}")
                    continue
                seen[dep.name] = dep
                visit(dep, stack | {dep.name})
                order.append(dep)

    visit(m, {m.name})
    return order


def to_document(m: MeasureSpec) -> dict:
    doc = _measure_doc(m)
    deps = dependencies(m)
    if deps:
        doc["definitions"] = [_measure_doc(d) for d in deps]
    return doc


def dumps(m: MeasureSpec) -> str:
    return json.dumps(to_document(m), indent=2) + "\n"


def schema() -> dict:
    text = resources.files("cauchymeasure").joinpath("measure_spec.schema.json").read_text()
    return json.loads(text)


def validate_document(doc) -> None:
    import jsonschema

    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"schema violation at /{path}: {exc.message}") from None


def _complex(pair) -> complex:
    return complex(pair[0], pair[1])


def _parse_component(doc: dict, registry) -> MeasureComponent:
    kind = doc["kind"]
    if kind == "atom":
        return Atom(_complex(doc["location"]), _complex(doc["mass"]))
    density = link(parse_density(doc["density"]), registry)
    if kind == "circle_density":
        cd = doc["circle"]
        circle = Circle(_complex(cd["center"]), cd["radius"], cd.get("orientation", CCW))
        return CircleDensity(circle, density, doc.get("differential", DW))
    sd = doc["segment"]
    return SegmentDensity(Segment(_complex(sd["a"]), _complex(sd["b"])), density)


def from_document(doc: dict) -> MeasureSpec:
    """Build a linked :class:`MeasureSpec` from a measure-spec document.

    The document's ``definitions`` form the registry against which
    ``cauchy_of`` names are resolved; reference cycles are rejected.
    """
    validate_document(doc)
    pending = {d["name"]: d for d in doc.get("definitions", [])}
    if doc["name"] in pending:
        raise LinkError(f"definition shadows the main measure {doc['name']!r}")
    registry = {}

    def build(name, stack):
        if name in registry:
            return registry[name]
        if name in stack:
            raise LinkError(f"reference cycle through {name!r}")
        if name not in pending:
            raise LinkError(f"unresolved measure reference {name!r}")
        d = pending[name]
        for dep in _doc_refs(d):
            build(dep, stack | {name})
        registry[name] = MeasureSpec(name, tuple(_parse_component(c, registry) for c in d["components"]))
        return registry[name]

    for dep in _doc_refs(doc):
        if dep == doc["name"]:
            raise LinkError(f"measure {dep!r} references itself")
        build(dep, {doc["name"]})
    return MeasureSpec(doc["name"], tuple(_parse_component(c, registry) for c in doc["components"]))


def _doc_refs(d: dict) -> list:
    names = set(d.get("requires", []))
    for c in d["components"]:
        if c["kind"] != "atom":
            names |= references(parse_density(c["density"]))
    return sorted(names)


def loads(text: str) -> MeasureSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    return from_document(doc)


def load(path) -> MeasureSpec:
    with open(path) as f:
        return loads(f.read())


def dump(m: MeasureSpec, path) -> None:
    with open(path, "w") as f:
        f.write(dumps(m))


__all__ = [
    "DW", "DT", "CCW", "CW", "Atom", "CircleDensity", "SegmentDensity", "MeasureSpec",
    "MeasureComponent", "combine", "zero_measure", "atoms", "total_variation",
    "component_mass", "moebius_pushforward", "to_document", "from_document", "dumps", "loads",
    "load", "dump", "schema", "validate_document", "dependencies",
]
