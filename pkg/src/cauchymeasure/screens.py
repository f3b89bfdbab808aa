"""Screen measures: circle densities that cancel a Cauchy transform on one
side of a circle, and factories for the standard screened scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GuardError, LinkError, PoleError, PreconditionError
from .expr import Expr, as_expr, cauchy_of, evaluate, lit, singularities
from .hardy import CircularDomain
from .measures import Atom, CircleDensity, MeasureSpec, zero_measure
from .numerics import CCW, DEFAULT_NODES, Circle, Segment, circle_rule, guard_distance

TWO_PI_I = 2j * math.pi
KILL_EXTERIOR = "kill_exterior"
KILL_INTERIOR = "kill_interior"
UNIT_CIRCLE = Circle(0j, 1.0)


def _support_margin(m: MeasureSpec, c: Circle) -> float:
    """Signed distance from the support of ``m`` to ``c``, positive when the
    support lies inside the open disk."""
    margin = math.inf
    for comp in m.components:
        if isinstance(comp, Atom):
            far = abs(comp.location - c.center)
        elif isinstance(comp.carrier, Segment):
            s = comp.carrier
            far = max(abs(s.a - c.center), abs(s.b - c.center))
        else:
            far = abs(comp.carrier.center - c.center) + comp.carrier.radius
        margin = min(margin, c.radius - far)
    return margin


def _required_margin(m: MeasureSpec, c: Circle, n: int) -> float:
    g = guard_distance(c, n)
    for comp in m.components:
        if not isinstance(comp, Atom):
            g = max(g, guard_distance(comp.carrier, n))
    return g


def outer_screen(m: MeasureSpec, c: Circle, n: int = DEFAULT_NODES) -> CircleDensity:
    """Density ``cauchy_of(m) dw / (2 pi i)`` on ``c`` (counterclockwise).

    Added to ``m`` it kills the transform outside ``c`` and leaves it
    unchanged inside.  The support of ``m`` must sit inside ``c`` by at
    least the guard distance of every rule involved at ``n`` nodes.
    """
    c = c.with_orientation(CCW)
    margin, need = _support_margin(m, c), _required_margin(m, c, n)
    if margin < need:
        raise PreconditionError(
            f"support of {m.name!r} must lie inside {c} with margin >= {need:.3g}, got {margin:.3g}")
    return CircleDensity(c, lit(1 / TWO_PI_I) * cauchy_of(m))


def _carrier_gap(carrier, c: Circle) -> float:
    """Distance between a carrier and the closed disk bounded by ``c``."""
    if isinstance(carrier, Segment):
        return float(carrier.distance(c.center)) - c.radius
    d = abs(carrier.center - c.center)
    return max(d - carrier.radius - c.radius, carrier.radius - d - c.radius)


def check_holomorphic_on_disk(g: Expr, c: Circle, n: int = DEFAULT_NODES) -> None:
    """Refuse ``g`` unless it is holomorphic near the closed disk of ``c``."""
    guard = guard_distance(c, n)
    s = singularities(g)
    for p in s.points:
        if abs(p - c.center) <= c.radius + guard:
            raise PreconditionError(f"g has a pole at {p}, within the closed disk of {c} plus guard {guard:.3g}")
    for carrier in s.carriers:
        if _carrier_gap(carrier, c) <= guard:
            raise PreconditionError(f"g is singular on {carrier}, which comes within {guard:.3g} of {c}")
    if s.opaque:
        pts = [circle_rule(Circle(c.center, rho * c.radius), n).nodes for rho in (0.5, 1.0)]
        pts.append(np.array([c.center]))
        try:
            vals = evaluate(g, np.concatenate(pts), n=n)
        except (GuardError, PoleError, LinkError) as exc:
            raise PreconditionError(f"g cannot be evaluated on the disk of {c}: {exc}") from exc
        if not np.all(np.isfinite(vals)):
            raise PreconditionError(f"g is not finite on the disk of {c}")


def inner_screen(g: Expr, c: Circle, n: int = DEFAULT_NODES) -> CircleDensity:
    """Density ``-g dw / (2 pi i)`` on ``c`` (counterclockwise).

    Its transform is ``-g`` inside ``c`` and zero outside, for ``g``
    holomorphic on the closed disk.
    """
    g = as_expr(g)
    c = c.with_orientation(CCW)
    check_holomorphic_on_disk(g, c, n)
    return CircleDensity(c, lit(-1 / TWO_PI_I) * g)


@dataclass(frozen=True)
class ScreenPlan:
    """What is screened, by which circles, and which side is killed."""

    source: object
    circles: tuple
    side: str = KILL_EXTERIOR

    def __post_init__(self):
        if self.side not in (KILL_EXTERIOR, KILL_INTERIOR):
            raise PreconditionError(f"unknown side {self.side!r}")
        if self.side == KILL_EXTERIOR and not isinstance(self.source, MeasureSpec):
            raise PreconditionError("an exterior screen needs a measure source")

    def build(self, n: int = DEFAULT_NODES) -> list:
        if self.side == KILL_EXTERIOR:
            return [outer_screen(self.source, c, n) for c in self.circles]
        return [inner_screen(self.source, c, n) for c in self.circles]


def build_sv_scenario(nuK: MeasureSpec, n: int = DEFAULT_NODES, name: str | None = None) -> MeasureSpec:
    """``nuK`` plus its outer screen on the unit circle."""
    name = name or f"{nuK.name}_screened"
    if name == nuK.name:
        raise PreconditionError("the composite needs a name different from its source")
    return MeasureSpec(name, nuK.components + (outer_screen(nuK, UNIT_CIRCLE, n),))


# {{{ disks screened inside the unit disk


def van_der_corput(k: int) -> float:
    """Base-2 radical inverse of ``k`` (k >= 1): 1/2, 1/4, 3/4, 1/8, ..."""
    x, f = 0.0, 0.5
    while k:
        x += f * (k & 1)
        k >>= 1
        f /= 2
    return x


@dataclass
class ExIIILayout:
    disks: list
    distances: list
    tv_bound: float
    tv_bound_unnormalized: float

    @property
    def radii(self):
        return [d.radius for d in self.disks]

    @property
    def centers(self):
        return [d.center for d in self.disks]


def _placement_ok(c: Circle, placed: Sequence[Circle]) -> bool:
    if abs(c.center) + c.radius > 0.9:
        return False
    if abs(c.center) - c.radius < 0.1 * c.radius:
        return False
    return all(abs(c.center - p.center) - c.radius - p.radius >= 0.1 * max(c.radius, p.radius)
               for p in placed)


def _auto_centers(radii, n, max_tries=4096):
    placed = []
    k = 1
    for r in radii:
        depth = r + 2 * math.pi * r / n
        for _ in range(max_tries):
            c = Circle(complex(van_der_corput(k), -depth), r)
            k += 1
            if _placement_ok(c, placed):
                placed.append(c)
                break
        else:
            raise PreconditionError(f"could not place a disk of radius {r}")
    return [p.center for p in placed]


def exIII_layout(m: int = 3, radii=None, centers=None, n: int = DEFAULT_NODES) -> ExIIILayout:
    """Disks inside the unit disk, away from 0, with disjoint closures.

    Default radii are ``4**-j`` for ``j = 1..m``; default centers sit just
    below the segment [0, 1] at van der Corput abscissae, each disk kept one
    node spacing off the segment.
    """
    if int(m) != m or m < 1:
        raise PreconditionError("m must be a positive integer")
    radii = [4.0 ** -j for j in range(1, m + 1)] if radii is None else [float(r) for r in radii]
    if len(radii) != m:
        raise PreconditionError(f"expected {m} radii, got {len(radii)}")
    centers = _auto_centers(radii, n) if centers is None else [complex(c) for c in centers]
    if len(centers) != m:
        raise PreconditionError(f"expected {m} centers, got {len(centers)}")
    disks = [Circle(c, r) for c, r in zip(centers, radii)]
    unit_guard = guard_distance(UNIT_CIRCLE, n)
    for i, d in enumerate(disks):
        g = guard_distance(d, n)
        if abs(d.center) + d.radius > 1 - max(g, unit_guard):
            raise PreconditionError(f"disk {d} is not inside the unit disk with guard margin")
        if abs(d.center) - d.radius <= g:
            raise PreconditionError(f"disk {d} does not keep 0 outside its guard band")
        for e in disks[:i]:
            if abs(d.center - e.center) - d.radius - e.radius <= max(g, guard_distance(e, n)):
                raise PreconditionError(f"disks {e} and {d} are not separated by the guard distance")
    dist = [abs(d.center) - d.radius for d in disks]
    s = sum(d.radius / dj for d, dj in zip(disks, dist))
    return ExIIILayout(disks, dist, 2 + s, 1 + 2 * math.pi * (1 + s))


DELTA0 = MeasureSpec("delta0", (Atom(0j, 1.0),))


def build_exIII_scenario(m: int = 3, radii=None, centers=None, n: int = DEFAULT_NODES,
                         name: str = "ex3") -> MeasureSpec:
    """``delta_0`` + its outer screen on the unit circle + inner screens of
    its transform on ``m`` disks.

    The transform is ``-1/z`` in the unit disk off the closed disks and zero
    inside each disk and outside the unit circle, exactly for every ``m``.
    """
    layout = exIII_layout(m, radii, centers, n)
    g = cauchy_of(DELTA0)
    comps = DELTA0.components + (outer_screen(DELTA0, UNIT_CIRCLE, n),)
    comps += tuple(inner_screen(g, d, n) for d in layout.disks)
    return MeasureSpec(name, comps)


# }}}


def build_problem42(domains: Sequence[CircularDomain], name: str = "indicator") -> MeasureSpec:
    """Measure whose transform is 1 on each domain and 0 off their closures.

    Each domain contributes ``dw / (2 pi i)`` on its boundary oriented as
    the boundary of the domain (holes clockwise).
    """
    domains = list(domains)
    if not domains:
        return zero_measure(name)
    for i, a in enumerate(domains):
        for b in domains[:i]:
            if not a.closure_disjoint(b):
                raise PreconditionError("domain closures must be pairwise disjoint")
    density = lit(1 / TWO_PI_I)
    comps = tuple(CircleDensity(c, density) for d in domains for c in d.boundary())
    return MeasureSpec(name, comps)


__all__ = [
    "outer_screen", "inner_screen", "ScreenPlan", "build_sv_scenario", "build_exIII_scenario",
    "exIII_layout", "ExIIILayout", "build_problem42", "van_der_corput", "DELTA0",
    "KILL_EXTERIOR", "KILL_INTERIOR", "check_holomorphic_on_disk",
]
