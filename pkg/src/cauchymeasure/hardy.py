"""Hardy-space tools on circular domains.

A circular domain is an open disk with finitely many closed disks removed.
Its boundary is oriented as the boundary of the domain: the outer circle
counterclockwise, the holes clockwise.  Shrinking by ``eps`` moves every
boundary circle a distance ``eps`` into the domain.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import BoundViolation, DivergenceError, GuardError, PoleError, PreconditionError
from .expr import Expr, cauchy_of, evaluate, lit, singularities
from .measures import DT, Atom, CircleDensity, MeasureSpec, total_variation
from .numerics import CCW, CW, DEFAULT_NODES, Circle, Segment, circle_rule

TWO_PI_I = 2j * math.pi
_MAX_ADAPTIVE_NODES = 2 ** 16
_RESOLUTION = 40.0


@dataclass(frozen=True)
class CircularDomain:
    outer: Circle
    holes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "outer", self.outer.with_orientation(CCW))
        object.__setattr__(self, "holes", tuple(h.with_orientation(CW) for h in self.holes))
        for h in self.holes:
            if abs(h.center - self.outer.center) + h.radius >= self.outer.radius:
                raise PreconditionError(f"hole {h} is not inside the open outer disk")
        for i, a in enumerate(self.holes):
            for b in self.holes[:i]:
                if abs(a.center - b.center) <= a.radius + b.radius:
                    raise PreconditionError("hole closures must be pairwise disjoint")

    @classmethod
    def disk(cls, center=0j, radius=1.0) -> "CircularDomain":
        return cls(Circle(center, radius))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        inside = np.abs(z - self.outer.center) < self.outer.radius
        for h in self.holes:
            inside &= np.abs(z - h.center) > h.radius
        return inside

    def boundary(self, eps: float = 0.0) -> list:
        """Boundary circles of the domain shrunk by ``eps``, oriented as ∂D."""
        out = [Circle(self.outer.center, self.outer.radius - eps, CCW)]
        out += [Circle(h.center, h.radius + eps, CW) for h in self.holes]
        return out

    def hole_gaps(self) -> list:
        """For every hole, the distance to the nearest other boundary circle."""
        gaps = []
        for i, h in enumerate(self.holes):
            g = self.outer.radius - abs(h.center - self.outer.center) - h.radius
            for j, k in enumerate(self.holes):
                if j != i:
                    g = min(g, abs(h.center - k.center) - h.radius - k.radius)
            gaps.append(g)
        return gaps

    def min_gap(self) -> float:
        gaps = self.hole_gaps()
        return min(gaps) if gaps else self.outer.radius

    def closure_disjoint(self, other: "CircularDomain") -> bool:
        a, b = self, other
        d = abs(a.outer.center - b.outer.center)
        if d > a.outer.radius + b.outer.radius:
            return True
        for x, y in ((a, b), (b, a)):
            for h in x.holes:
                if abs(h.center - y.outer.center) + y.outer.radius < h.radius:
                    return True
        return False

    def perimeter(self) -> float:
        return sum(c.length() for c in self.boundary())


def check_holomorphic(kappa: Expr, d: CircularDomain, n: int = DEFAULT_NODES):
    """Refuse ``kappa`` with a known singularity in the closed domain."""
    s = singularities(kappa)
    for p in s.points:
        if bool(d.contains(p)) or any(float(c.distance(p)) == 0 for c in d.boundary()):
            raise PreconditionError(f"kappa has a pole at {p} inside the domain")
    for carrier in s.carriers:
        if _carrier_meets(carrier, d):
            raise PreconditionError(f"kappa is singular on {carrier}, which meets the domain")


def _carrier_meets(carrier, d: CircularDomain) -> bool:
    if isinstance(carrier, Segment):
        pts = carrier.a + np.linspace(0, 1, 257) * (carrier.b - carrier.a)
        return bool(np.any(d.contains(pts)))
    pts = circle_rule(carrier, 256).nodes
    return bool(np.any(d.contains(pts)))


# {{{ H1 norm


@dataclass(frozen=True)
class EpsilonSchedule:
    eps0: float = 0.1
    ratio: float = 0.1
    steps: int = 10

    def __post_init__(self):
        if not self.eps0 > 0:
            raise PreconditionError("eps0 must be positive")
        if not 0 < self.ratio < 1:
            raise PreconditionError("ratio must lie in (0, 1)")
        if self.steps < 2:
            raise PreconditionError("the schedule needs at least two steps")

    def epsilons(self) -> list:
        return [self.eps0 * self.ratio ** k for k in range(self.steps)]


@dataclass
class H1Report:
    raw: float | None
    normalized: float | None
    converged: bool
    epsilons: list
    values: list
    nodes: list = field(default_factory=list)
    reason: str = ""

    def to_dict(self):
        return asdict(self)


def _adapted_nodes(circle: Circle, poles, n: int):
    need = n
    for p in poles:
        delta = float(circle.distance(p))
        if delta == 0:
            return None
        need = max(need, _RESOLUTION * circle.radius / delta)
    if need <= n:
        return n
    m = 1 << math.ceil(math.log2(need))
    return m if m <= _MAX_ADAPTIVE_NODES else None


def contour_abs_integral(kappa: Expr, circles: Sequence[Circle], n: int = DEFAULT_NODES,
                         poles=None) -> tuple:
    """``sum over circles of int |kappa| |dw|`` and the node counts used.

    Node counts grow (powers of two, capped at 65536) until every known pole
    is resolved; ``None`` is returned for an unresolvable contour.
    """
    if poles is None:
        poles = singularities(kappa).points
    total, used = 0.0, []
    for c in circles:
        m = _adapted_nodes(c, poles, n)
        if m is None:
            return None, used
        rule = circle_rule(c, m)
        vals = evaluate(kappa, rule.nodes, n=n)
        total += float(np.sum(np.abs(vals) * rule.arc_weights))
        used.append(m)
    return total, used


def h1_norm(kappa: Expr, d: CircularDomain, sched: EpsilonSchedule = EpsilonSchedule(),
            n: int = DEFAULT_NODES, rtol: float = 1e-6) -> H1Report:
    """Estimate ``limsup_{eps->0} int_{∂D_eps} |kappa| |dw|``.

    The limsup is the larger of the last two schedule values; it is reported
    only when those two agree to ``rtol``.  A contour that cannot be
    resolved (a singularity on the boundary) ends the schedule with
    ``converged=False``.
    """
    if sched.eps0 >= d.min_gap() / 2:
        raise PreconditionError(f"eps0={sched.eps0} must be below half the minimal boundary gap {d.min_gap()}")
    poles = singularities(kappa).points
    epsilons, values, nodes = [], [], []
    reason = ""
    for eps in sched.epsilons():
        try:
            v, used = contour_abs_integral(kappa, d.boundary(eps), n, poles)
        except (GuardError, PoleError) as exc:
            reason = f"evaluation failed at eps={eps:g}: {exc}"
            break
        if v is None:
            reason = f"singularity within eps={eps:g} of the boundary cannot be resolved"
            break
        epsilons.append(eps)
        values.append(v)
        nodes.append(max(used))
    converged = False
    if not reason:
        a, b = values[-2], values[-1]
        converged = abs(b - a) <= rtol * max(abs(a), abs(b), 1e-300)
        if not converged:
            reason = f"relative change {abs(b - a) / max(abs(a), abs(b)):.3g} over the last step exceeds {rtol:g}"
    if converged:
        raw = max(values[-2:])
        return H1Report(raw, raw / (2 * math.pi), True, epsilons, values, nodes, "")
    if len(values) >= 2 and all(y > x for x, y in zip(values, values[1:])):
        reason += "; values grow monotonically"
    return H1Report(None, None, False, epsilons, values, nodes, reason)


def converged_tail(report: H1Report, rtol: float = 1e-6) -> float:
    """Largest schedule eps whose value is within ``rtol`` of the reported limit."""
    if not report.converged:
        return 0.0
    ok = [e for e, v in zip(report.epsilons, report.values) if abs(v - report.raw) <= rtol * report.raw]
    return max(ok)


# }}}

# {{{ nu^kappa and the Riesz decomposition


def nu_kappa(kappa: Expr, d: CircularDomain, eps: float | None = None,
             sched: EpsilonSchedule = EpsilonSchedule(), n: int = DEFAULT_NODES,
             name: str = "nu_kappa") -> MeasureSpec:
    """Boundary measure ``kappa(w) dw / (2 pi i)`` on ``∂D_eps``.

    Its transform is ``kappa`` inside ``D_eps`` and zero outside the closure
    of ``D``.  ``eps`` defaults to the last step of ``sched``; a
    non-convergent H1 norm is refused with :class:`DivergenceError`.
    """
    report = h1_norm(kappa, d, sched, n)
    if not report.converged:
        raise DivergenceError(f"H1 norm of kappa did not converge: {report.reason}")
    check_holomorphic(kappa, d, n)
    if eps is None:
        eps = report.epsilons[-1]
    elif not 0 < eps <= converged_tail(report):
        raise PreconditionError(f"eps={eps} is outside the converged tail (0, {converged_tail(report)}]")
    density = lit(1 / TWO_PI_I) * kappa
    return MeasureSpec(name, tuple(CircleDensity(c, density) for c in d.boundary(eps)))


def riesz_decompose(parts: Sequence[tuple], eps: float | None = None,
                    sched: EpsilonSchedule = EpsilonSchedule(), n: int = DEFAULT_NODES,
                    name: str = "nu") -> MeasureSpec:
    """Sum of ``nu_kappa`` over ``(domain, kappa)`` pairs with disjoint closures.

    The transform of the result equals each ``kappa_i`` in its domain and
    vanishes off the union of the closures.  Components live on disjoint
    carriers, so they are mutually singular and total variations add.
    """
    domains = [d for d, _ in parts]
    for i, a in enumerate(domains):
        for b in domains[:i]:
            if not a.closure_disjoint(b):
                raise PreconditionError("domain closures must be pairwise disjoint")
    comps = []
    for i, (d, kappa) in enumerate(parts):
        comps.extend(nu_kappa(kappa, d, eps, sched, n, name=f"{name}_{i + 1}").components)
    return MeasureSpec(name, tuple(comps))


# }}}

# {{{ decomposition F = F_1 + ... + F_p


def decomposition_domain(d: CircularDomain) -> CircularDomain:
    """The sub-domain bounded by the intermediate contours.

    The outer contour sits a quarter of the outer gap inside the outer
    circle, each hole contour a quarter of that hole's gap outside the hole.
    """
    gaps = d.hole_gaps()
    outer_gap = min([d.outer.radius - abs(h.center - d.outer.center) - h.radius for h in d.holes],
                    default=d.outer.radius)
    outer = Circle(d.outer.center, d.outer.radius - outer_gap / 4)
    holes = tuple(Circle(h.center, h.radius + g / 4) for h, g in zip(d.holes, gaps))
    return CircularDomain(outer, holes)


def hardy_decompose(F: Expr, d: CircularDomain, n: int = DEFAULT_NODES, name: str = "F") -> list:
    """Split ``F`` holomorphic in ``d`` into ``F_1 + ... + F_p``.

    ``F_1`` (holomorphic inside the outer circle) and ``F_j`` for each hole
    (holomorphic outside it, vanishing at infinity) are returned as
    ``cauchy_of`` expressions over Cauchy integrals on the contours of
    :func:`decomposition_domain`; the parts reproduce ``F`` inside that
    sub-domain.
    """
    mid = decomposition_domain(d)
    density = lit(1 / TWO_PI_I) * F
    parts = []
    for j, c in enumerate(mid.boundary()):
        comp = CircleDensity(c, density)
        try:
            comp.discretize(n)
        except (GuardError, PoleError) as exc:
            raise PreconditionError(f"F is not evaluable on the contour {c}: {exc}") from exc
        parts.append(cauchy_of(MeasureSpec(f"{name}_{j + 1}", (comp,))))
    return parts


# }}}

# {{{ Poisson kernel, Tumarkin functional, harmonic measure


def poisson_kernel(r, angle):
    """``(1 - r^2) / (1 + r^2 - 2 r cos(angle))`` for ``0 <= r < 1``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise PreconditionError("the Poisson kernel needs 0 <= r < 1")
    out = (1 - r ** 2) / (1 + r ** 2 - 2 * r * np.cos(angle))
    return float(out) if np.ndim(out) == 0 else out


def kernel_identity_check(r, theta, t):
    """Residual of ``1/(w - r z) - 1/(w - z/r) = e^{-it} P_r(theta - t)``
    with ``z = e^{i theta}``, ``w = e^{it}``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r >= 1):
        raise PreconditionError("the identity needs 0 < r < 1")
    zeta, w = np.exp(1j * np.asarray(theta)), np.exp(1j * np.asarray(t))
    lhs = 1 / (w - r * zeta) - 1 / (w - zeta / r)
    rhs = np.exp(-1j * np.asarray(t)) * poisson_kernel(r, np.asarray(theta) - np.asarray(t))
    res = np.abs(lhs - rhs)
    return float(res) if np.ndim(res) == 0 else res


UNIT_CIRCLE = Circle(0j, 1.0)


def _on_unit_circle(eta: MeasureSpec):
    for c in eta.components:
        if isinstance(c, Atom):
            if abs(abs(c.location) - 1) > 1e-12:
                raise PreconditionError(f"atom at {c.location} is not on the unit circle")
        elif not (isinstance(c.carrier, Circle) and c.carrier.same_carrier(UNIT_CIRCLE)):
            raise PreconditionError("tumarkin_functional needs a measure on the unit circle")


def tumarkin_functional(eta: MeasureSpec, r_grid=(0.5, 0.7, 0.9), n: int = DEFAULT_NODES,
                        tol: float = 1e-6) -> float:
    """``max over r of int |g(r zeta) - g(zeta / r)| dtheta`` with ``g = eta^``.

    Raises :class:`BoundViolation` if the value exceeds ``2 pi |eta| + tol``.
    """
    _on_unit_circle(eta)
    from .cauchy import transform

    guard = circle_rule(UNIT_CIRCLE, n).guard
    has_density = any(not isinstance(c, Atom) for c in eta.components)
    theta = 2 * np.pi * np.arange(n) / n
    zeta = np.exp(1j * theta)
    best = 0.0
    for r in r_grid:
        if not 0 < r < 1:
            raise PreconditionError(f"radius {r} is not in (0, 1)")
        if has_density and (1 - r) < guard:
            raise PreconditionError(f"r={r} is inside the guard band {guard:.3g} of the unit circle at n={n}")
        diff = transform(eta, r * zeta, n) - transform(eta, zeta / r, n)
        best = max(best, float(np.sum(np.abs(diff)) * 2 * np.pi / n))
    bound = 2 * np.pi * total_variation(eta, n)
    if best > bound + tol:
        raise BoundViolation(f"Tumarkin functional {best} exceeds 2 pi |eta| = {bound}", best, bound)
    return best


def _normalised_basepoint(disk: Circle, basepoint):
    b = (complex(basepoint) - disk.center) / disk.radius
    if abs(b) >= 1:
        raise PreconditionError(f"basepoint {basepoint} is not inside the disk")
    return abs(b), np.angle(b)


def harmonic_measure_density(disk: Circle, basepoint, theta):
    """``d omega / d theta`` at ``center + R e^{i theta}`` seen from ``basepoint``."""
    rho, phi = _normalised_basepoint(disk, basepoint)
    return poisson_kernel(rho, np.asarray(theta) - phi) / (2 * np.pi)


@dataclass
class RadonNikodym:
    theta: np.ndarray
    values: np.ndarray
    omega: np.ndarray

    def total_variation(self) -> float:
        """``int |d nu / d omega| d omega`` by the trapezoidal rule in theta."""
        h = 2 * np.pi / len(self.theta)
        return float(np.sum(np.abs(self.values) * self.omega) * h)


def radon_nikodym(component: CircleDensity, d: Circle, basepoint, n: int = DEFAULT_NODES) -> RadonNikodym:
    """Sampled ``d nu / d omega`` for a circle density against harmonic measure."""
    if not isinstance(component, CircleDensity) or not component.circle.same_carrier(d):
        raise PreconditionError("the component is not carried by the given circle")
    theta = 2 * np.pi * np.arange(n) / n
    w = d.center + d.radius * np.exp(1j * theta)
    f = evaluate(component.density, w, n=n)
    if component.differential == DT:
        per_theta = f
    else:
        per_theta = f * component.circle.sign * 1j * d.radius * np.exp(1j * theta)
    omega = harmonic_measure_density(d, basepoint, theta)
    return RadonNikodym(theta, per_theta / omega, omega)


# }}}

__all__ = [
    "CircularDomain", "EpsilonSchedule", "H1Report", "h1_norm", "nu_kappa", "riesz_decompose",
    "hardy_decompose", "decomposition_domain", "poisson_kernel", "kernel_identity_check",
    "tumarkin_functional", "harmonic_measure_density", "radon_nikodym", "RadonNikodym",
    "contour_abs_integral", "check_holomorphic", "converged_tail",
]
