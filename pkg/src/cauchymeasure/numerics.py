"""Carriers (circles, segments) and the quadrature rules living on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import GuardError, PoleError, PreconditionError

DEFAULT_NODES = 512
MIN_NODES = 8
GUARD_FACTOR = 2.0

CCW = "ccw"
CW = "cw"


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float
    orientation: str = CCW

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise PreconditionError(f"circle radius must be positive, got {self.radius}")
        if self.orientation not in (CCW, CW):
            raise PreconditionError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")

    @property
    def sign(self) -> int:
        return 1 if self.orientation == CCW else -1

    def reversed(self) -> "Circle":
        return Circle(self.center, self.radius, CW if self.orientation == CCW else CCW)

    def with_orientation(self, orientation: str) -> "Circle":
        return Circle(self.center, self.radius, orientation)

    def point(self, t):
        return self.center + self.radius * np.exp(1j * np.asarray(t))

    def length(self) -> float:
        return 2 * math.pi * self.radius

    def distance(self, z):
        """Distance from ``z`` (scalar or array) to the circle."""
        return np.abs(np.abs(np.asarray(z) - self.center) - self.radius)

    def contains(self, z, strict=True):
        d = np.abs(np.asarray(z) - self.center)
        return d < self.radius if strict else d <= self.radius

    def same_carrier(self, other) -> bool:
        return isinstance(other, Circle) and other.center == self.center and other.radius == self.radius


@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.a == self.b:
            raise PreconditionError("segment endpoints must differ")

    def length(self) -> float:
        return abs(self.b - self.a)

    def canonical(self) -> "Segment":
        """Same point set, endpoints ordered lexicographically by (re, im)."""
        if (self.a.real, self.a.imag) <= (self.b.real, self.b.imag):
            return self
        return Segment(self.b, self.a)

    def distance(self, z):
        z = np.asarray(z)
        d = self.b - self.a
        s = ((z - self.a) * np.conj(d)).real / abs(d) ** 2
        s = np.clip(s, 0.0, 1.0)
        return np.abs(z - (self.a + s * d))

    def same_carrier(self, other) -> bool:
        return isinstance(other, Segment) and other.canonical() == self.canonical()


Carrier = Union[Circle, Segment]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes on a carrier and complex weights including ``dz`` and orientation.

    ``spacing`` is the largest gap between neighbouring nodes; the guard
    distance of the rule is ``GUARD_FACTOR * spacing``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    carrier: Carrier
    spacing: float

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise PreconditionError("nodes and weights differ in length")
        if len(self.nodes) < MIN_NODES:
            raise PreconditionError(f"a quadrature rule needs at least {MIN_NODES} nodes")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    @property
    def guard(self) -> float:
        return GUARD_FACTOR * self.spacing

    @property
    def arc_weights(self) -> np.ndarray:
        """Weights of the arc-length element |dz|."""
        return np.abs(self.weights)

    def reversed(self) -> "QuadratureRule":
        carrier = self.carrier.reversed() if isinstance(self.carrier, Circle) else self.carrier
        return QuadratureRule(self.nodes, -self.weights, carrier, self.spacing)

    def distance(self, z):
        return self.carrier.distance(z)


def _check_n(n):
    if int(n) != n or n < MIN_NODES:
        raise PreconditionError(f"node count must be an integer >= {MIN_NODES}, got {n}")
    return int(n)


@lru_cache(maxsize=256)
def circle_rule(circle: Circle, n: int = DEFAULT_NODES) -> QuadratureRule:
    """Equispaced trapezoidal rule on ``circle``.

    Nodes do not depend on the orientation, so reversing a circle negates the
    weights and nothing else.
    """
    n = _check_n(n)
    t = 2 * np.pi * np.arange(n) / n
    e = np.exp(1j * t)
    nodes = circle.center + circle.radius * e
    weights = circle.sign * 1j * circle.radius * e * (2 * np.pi / n)
    return QuadratureRule(nodes, weights, circle, 2 * math.pi * circle.radius / n)


def _panel_order(n):
    if n % 16 == 0:
        return 16
    if n % 8 == 0:
        return 8
    return n


@lru_cache(maxsize=256)
def segment_rule(segment: Segment, n: int = DEFAULT_NODES) -> QuadratureRule:
    """Composite Gauss-Legendre rule from ``segment.a`` to ``segment.b``.

    Panels have 16 nodes when 16 divides ``n``, 8 when 8 does, otherwise a
    single ``n``-point panel is used.
    """
    n = _check_n(n)
    p = _panel_order(n)
    panels = n // p
    x, w = np.polynomial.legendre.leggauss(p)
    s_left = np.arange(panels) / panels
    h = 1.0 / panels
    s = (s_left[:, None] + h * (x[None, :] + 1) / 2).ravel()
    ws = np.tile(w * h / 2, panels)
    d = segment.b - segment.a
    nodes = segment.a + s * d
    weights = ws * d
    gaps = np.diff(np.concatenate(([0.0], s, [1.0])))
    return QuadratureRule(nodes, weights.astype(complex), segment, float(gaps.max() * abs(d)))


def rule_for(carrier: Carrier, n: int = DEFAULT_NODES) -> QuadratureRule:
    if isinstance(carrier, Circle):
        return circle_rule(carrier, n)
    return segment_rule(carrier, n)


def guard_distance(carrier: Carrier, n: int = DEFAULT_NODES) -> float:
    return rule_for(carrier, n).guard


def check_points_off_rule(points, rule: QuadratureRule, what="singularity"):
    """Raise :class:`GuardError` when a point sits inside the guard band of ``rule``."""
    for p in points:
        d = float(rule.distance(p))
        if d < rule.guard:
            raise GuardError(
                f"{what} at {p} lies {d:.3g} from the contour, inside the guard distance {rule.guard:.3g}",
                component=rule.carrier, point=p, distance=d, guard=rule.guard)


def contour_integral(f, rule: QuadratureRule, n: int = DEFAULT_NODES) -> complex:
    """Sum of ``f(node) * weight`` over the rule.

    ``f`` is an :class:`~cauchymeasure.expr.Expr` or any vectorised callable.
    For expressions, known poles within the guard band of the contour are
    refused up front; ``n`` is the node count used for nested Cauchy
    transforms inside ``f``.
    """
    from .expr import Expr, evaluate, singularities

    if isinstance(f, Expr):
        check_points_off_rule(singularities(f).points, rule, "pole")
        values = evaluate(f, rule.nodes, n=n)
    else:
        with np.errstate(divide="raise", invalid="raise"):
            try:
                values = np.asarray(f(rule.nodes), dtype=complex)
            except FloatingPointError as exc:
                raise PoleError(f"integrand not finite on the contour: {exc}") from exc
    values = np.broadcast_to(values, rule.nodes.shape)
    if not np.all(np.isfinite(values)):
        raise PoleError("integrand not finite at a quadrature node")
    return complex(np.sum(values * rule.weights))


def circle_through_moebius(circle: Circle, x0: complex) -> tuple[Circle, bool]:
    """Image of ``circle`` under ``z -> 1/(x0 - z)``.

    Returns the image circle and whether the orientation flips, which happens
    when ``x0`` lies inside the circle (the interior then maps to the
    exterior).
    """
    c = complex(x0) - circle.center
    den = abs(c) ** 2 - circle.radius ** 2
    if den == 0:
        raise PreconditionError("circle passes through the Moebius pole")
    center = c.conjugate() / den
    radius = circle.radius / abs(den)
    flips = den < 0
    orientation = circle.orientation
    if flips:
        orientation = CW if orientation == CCW else CCW
    return Circle(center, radius, orientation), flips


__all__ = [
    "CCW", "CW", "Circle", "Segment", "Carrier", "QuadratureRule", "DEFAULT_NODES",
    "circle_rule", "segment_rule", "rule_for", "guard_distance", "contour_integral",
    "circle_through_moebius", "check_points_off_rule",
]
