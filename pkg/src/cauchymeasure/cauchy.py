"""Cauchy transforms ``m^(z) = int dm(w) / (w - z)`` and checks built on them."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.stats import qmc

from .errors import ConsistencyError, GuardError, PoleError, PreconditionError
from .expr import Expr, as_expr, evaluate, singularities
from .measures import Atom, MeasureSpec, component_mass
from .numerics import (
    DEFAULT_NODES, Circle, QuadratureRule, check_points_off_rule, circle_rule, contour_integral,
)

_CHUNK = 1024
MAX_MOMENT = 50


# {{{ transform


def reliability(m: MeasureSpec, z, n: int = DEFAULT_NODES) -> np.ndarray:
    """Mask of points where every density component is outside its guard band
    and no atom is hit exactly."""
    z = np.asarray(z, dtype=complex)
    ok = np.isfinite(z)
    for c in m.components:
        if isinstance(c, Atom):
            ok &= z != c.location
        else:
            ok &= c.carrier.distance(z) >= c.rule(n).guard
    return ok


def _offender(m, z, n):
    for c in m.components:
        if isinstance(c, Atom):
            if z == c.location:
                return c, 0.0, 0.0
        else:
            d, g = float(c.carrier.distance(z)), c.rule(n).guard
            if d < g:
                return c, d, g
    return None, None, None


def _sum_components(m, z, n):
    """Transform at points ``z`` that are known to be reliable."""
    out = np.zeros(z.shape, dtype=complex)
    if z.size == 0:
        return out
    for c in m.components:
        if isinstance(c, Atom):
            out += c.mass / (c.location - z)
            continue
        nodes, coeffs = c.discretize(n)
        for s in range(0, z.size, _CHUNK):
            zc = z[s:s + _CHUNK]
            out[s:s + _CHUNK] += np.sum(coeffs[None, :] / (nodes[None, :] - zc[:, None]), axis=1)
    return out


def transform(m: MeasureSpec, z, n: int = DEFAULT_NODES):
    """Cauchy transform of ``m`` at a point or an array of points.

    Atoms are summed in closed form; density components use their
    ``n``-node discretisation.  Points inside the guard band of a density
    carrier (or exactly on an atom) raise :class:`GuardError`.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    ok = reliability(m, zz, n)
    if not ok.all():
        bad = complex(zz[np.argmin(ok)])
        comp, d, g = _offender(m, bad, n)
        if comp is None:
            raise GuardError(f"cannot evaluate the transform of {m.name} at {bad}", point=bad)
        raise GuardError(
            f"unreliable point {bad}: distance {d:.3g} to the support of {m.name} is below the guard {g:.3g}",
            component=comp, point=bad, distance=d, guard=g)
    out = _sum_components(m, zz, n)
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


@dataclass
class TransformField:
    grid: np.ndarray
    values: np.ndarray
    reliable: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=complex).ravel()
        self.values = np.asarray(self.values, dtype=complex).ravel()
        self.reliable = np.asarray(self.reliable, dtype=bool).ravel()
        if not (len(self.grid) == len(self.values) == len(self.reliable)):
            raise PreconditionError("grid, values and reliable flags differ in length")

    def __len__(self):
        return len(self.grid)

    COLUMNS = ("re_z", "im_z", "re_val", "im_val", "reliable")

    def rows(self):
        for z, v, r in zip(self.grid, self.values, self.reliable):
            yield (z.real, z.imag, v.real, v.imag, bool(r))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for a, b, c, d, r in self.rows():
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c)), repr(float(d)), int(r)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TransformField":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != cls.COLUMNS:
            raise PreconditionError(f"expected header {','.join(cls.COLUMNS)}")
        data = rows[1:]
        grid = [complex(float(r[0]), float(r[1])) for r in data]
        vals = [complex(float(r[2]), float(r[3])) for r in data]
        rel = [r[4] == "1" for r in data]
        return cls(grid, vals, rel)

    def to_json(self) -> str:
        """Columns as JSON arrays; non-finite numbers (unreliable values) become null."""

        def num(x):
            return float(x) if math.isfinite(x) else None

        doc = {k: [] for k in self.COLUMNS}
        for a, b, c, d, r in self.rows():
            for k, v in zip(self.COLUMNS, (num(a), num(b), num(c), num(d), r)):
                doc[k].append(v)
        return json.dumps(doc) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TransformField":
        doc = json.loads(text)

        def f(x):
            return float("nan") if x is None else x

        grid = [complex(a, b) for a, b in zip(doc["re_z"], doc["im_z"])]
        vals = [complex(f(a), f(b)) for a, b in zip(doc["re_val"], doc["im_val"])]
        return cls(grid, vals, doc["reliable"])


def transform_grid(m: MeasureSpec, grid, n: int = DEFAULT_NODES) -> TransformField:
    """Transform at every grid point; unreliable points get NaN and a False flag."""
    z = np.asarray(grid, dtype=complex).ravel()
    ok = reliability(m, z, n)
    vals = np.full(z.shape, complex(np.nan, np.nan))
    vals[ok] = _sum_components(m, z[ok], n)
    return TransformField(z, vals, ok)


def grid_points(xmin, xmax, ymin, ymax, steps) -> np.ndarray:
    x = np.linspace(xmin, xmax, steps)
    y = np.linspace(ymin, ymax, steps)
    return (x[None, :] + 1j * y[:, None]).ravel()


# }}}

# {{{ moments and mass


def moment(m: MeasureSpec, k: int, n: int = DEFAULT_NODES) -> complex:
    """``int w^k dm(w)``; refused for ``k > 50``."""
    if int(k) != k or k < 0:
        raise PreconditionError(f"moment order must be a non-negative integer, got {k}")
    if k > MAX_MOMENT:
        raise PreconditionError(f"moments above order {MAX_MOMENT} are refused")
    total = 0j
    for c in m.components:
        if isinstance(c, Atom):
            total += c.location ** k * c.mass
        else:
            nodes, coeffs = c.discretize(n)
            total += complex(np.sum(nodes ** k * coeffs))
    return complex(total)


def moments(m: MeasureSpec, ks, n: int = DEFAULT_NODES) -> np.ndarray:
    return np.array([moment(m, k, n) for k in ks])


def support_radius(m: MeasureSpec) -> float:
    r = 0.0
    points, carriers = m.support()
    for p in points:
        r = max(r, abs(p))
    for c in carriers:
        if isinstance(c, Circle):
            r = max(r, abs(c.center) + c.radius)
        else:
            r = max(r, abs(c.a), abs(c.b))
    return r


def mass_at_infinity(m: MeasureSpec, n: int = DEFAULT_NODES, tol: float = 1e-6) -> complex:
    """Total mass ``m(C)``, cross-checked against ``-lim z m^(z)``.

    The limit is Richardson-extrapolated (quadratic in ``1/R``) from
    ``R = s*1e2, s*1e3, s*1e4`` on the positive real axis, where ``s`` is
    ``max(1, support radius)``.  Disagreement beyond ``tol`` raises
    :class:`ConsistencyError`.
    """
    direct = sum((component_mass(c, n) for c in m.components), 0j)
    s = max(1.0, support_radius(m))
    radii = s * np.array([1e2, 1e3, 1e4])
    y = np.array([-r * transform(m, complex(r), n) for r in radii])
    x = 1.0 / radii
    # Lagrange interpolation at x = 0
    limit = 0j
    for i in range(3):
        li = 1.0
        for j in range(3):
            if j != i:
                li *= (0 - x[j]) / (x[i] - x[j])
        limit += li * y[i]
    if abs(limit - direct) > tol * max(1.0, abs(direct)):
        raise ConsistencyError(
            f"mass of {m.name}: component sum {direct} but -lim z m^(z) = {limit}")
    return complex(direct)


# }}}

# {{{ Havin functional


def havin_functional(g: Expr, h: Expr, contour_set: Sequence[QuadratureRule],
                     n: int = DEFAULT_NODES) -> complex:
    """``T_g(h) = -(1/2 pi i) * sum of contour integrals of g h``.

    The contours must form the positively oriented boundary of a
    neighbourhood of the compact (outer circles counterclockwise, inner ones
    clockwise); :func:`neighborhood_contours` builds such a set.
    """
    return complex(havin_functionals(g, [h], contour_set, n)[0])


def havin_functionals(g: Expr, hs: Sequence[Expr], contour_set: Sequence[QuadratureRule],
                      n: int = DEFAULT_NODES) -> np.ndarray:
    """:func:`havin_functional` for several ``h``, evaluating ``g`` once per contour."""
    g = as_expr(g)
    hs = [as_expr(h) for h in hs]
    total = np.zeros(len(hs), dtype=complex)
    for rule in contour_set:
        check_points_off_rule(singularities(g).points, rule, "pole")
        gv = evaluate(g, rule.nodes, n=n)
        for i, h in enumerate(hs):
            check_points_off_rule(singularities(h).points, rule, "pole")
            total[i] += contour_integral(lambda w, gv=gv, h=h: gv * evaluate(h, w, n=n), rule, n)
    return -total / (2j * np.pi)


def _neighborhoods(m, margin):
    hoods = []
    points, carriers = m.support()
    for p in points:
        hoods.append((complex(p), margin, 0.0))
    for c in carriers:
        if isinstance(c, Circle):
            d = min(margin, c.radius / 2)
            hoods.append((c.center, c.radius + d, c.radius - d))
        else:
            hoods.append(((c.a + c.b) / 2, c.length() / 2 + margin, 0.0))
    return hoods


def _disjoint(a, b):
    (ca, oa, ia), (cb, ob, ib) = a, b
    d = abs(ca - cb)
    return d > oa + ob or d + ob < ia or d + oa < ib


def neighborhood_contours(m: MeasureSpec, margin: float = 0.05,
                          n: int = DEFAULT_NODES) -> list:
    """Boundary of a neighbourhood of ``supp m`` as circle rules.

    Each atom gets a disk of radius ``margin``; each circle carrier an
    annulus of half-width ``min(margin, R/2)``; each segment the disk on its
    midpoint.  Overlapping neighbourhoods are refused.
    """
    hoods = _neighborhoods(m, margin)
    for i in range(len(hoods)):
        for j in range(i):
            if not _disjoint(hoods[i], hoods[j]):
                raise PreconditionError("neighbourhoods of the support overlap; use a smaller margin")
    rules = []
    for center, outer, inner in hoods:
        rules.append(circle_rule(Circle(center, outer, "ccw"), n))
        if inner > 0:
            rules.append(circle_rule(Circle(center, inner, "cw"), n))
    return rules


def sup_on_support(h: Expr, m: MeasureSpec, n: int = 4096) -> float:
    """``max |h|`` over the support, sampled at atoms and ``n`` carrier nodes."""
    points, carriers = m.support()
    vals = [abs(evaluate(h, p)) for p in points]
    for c in carriers:
        nodes = circle_rule(c, n).nodes if isinstance(c, Circle) else _segment_nodes(c, n)
        vals.append(float(np.max(np.abs(evaluate(h, nodes)))))
    return float(max(vals, default=0.0))


def _segment_nodes(seg, n):
    return seg.a + np.linspace(0.0, 1.0, n) * (seg.b - seg.a)


# }}}

# {{{ regions and verification


@dataclass(frozen=True)
class Annulus:
    r_in: float
    r_out: float
    center: complex = 0j

    def describe(self):
        return f"annulus {self.r_in} <= |z - {self.center}| <= {self.r_out}"


@dataclass(frozen=True)
class Disk:
    radius: float
    center: complex = 0j

    def describe(self):
        return f"disk |z - {self.center}| <= {self.radius}"


@dataclass(frozen=True)
class PointList:
    points: tuple

    def describe(self):
        return f"{len(self.points)} listed points"


Region = Union[Annulus, Disk, PointList]


def _map_unit_square(region, u):
    if isinstance(region, Annulus):
        r = np.sqrt(region.r_in ** 2 + u[:, 0] * (region.r_out ** 2 - region.r_in ** 2))
    else:
        r = region.radius * np.sqrt(u[:, 0])
    return region.center + r * np.exp(2j * np.pi * u[:, 1])


def sample_region(region: Region, samples: int, exclude: Sequence[Circle] = ()) -> np.ndarray:
    """Quasi-uniform samples from the unscrambled 2-d Halton sequence.

    Deterministic by construction.  Points inside any closed disk listed in
    ``exclude`` are skipped and replaced by later points of the sequence.
    """
    if isinstance(region, PointList):
        return np.asarray(region.points, dtype=complex)
    engine = qmc.Halton(d=2, scramble=False)
    out = np.empty(0, dtype=complex)
    for _ in range(100):
        z = _map_unit_square(region, engine.random(max(2 * samples, 64)))
        keep = np.ones(z.shape, dtype=bool)
        for c in exclude:
            keep &= np.abs(z - c.center) > c.radius
        out = np.concatenate([out, z[keep]])
        if len(out) >= samples:
            return out[:samples]
    raise PreconditionError("exclusions leave too little of the region to sample")


@dataclass
class VerificationReport:
    scenario: str
    region: str
    max_error: float
    samples: int
    reliable_samples: int
    tolerance: float
    passed: bool
    status: str
    worst_point: list | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _safe_eval(expr, z, n):
    """Evaluate ``expr`` at each point; points where evaluation fails are flagged."""
    try:
        return evaluate(expr, z, n=n), np.ones(z.shape, dtype=bool)
    except (GuardError, PoleError):
        vals = np.full(z.shape, complex(np.nan, np.nan))
        ok = np.zeros(z.shape, dtype=bool)
        for i, p in enumerate(z):
            try:
                vals[i] = evaluate(expr, p, n=n)
                ok[i] = True
            except (GuardError, PoleError):
                pass
        return vals, ok


def verify_vanishing(m: MeasureSpec, region: Region, expected: Expr | None = None,
                     tol: float = 1e-9, samples: int = 200, n: int = DEFAULT_NODES,
                     scenario: str | None = None, exclude: Sequence[Circle] = ()) -> VerificationReport:
    """Compare ``m^`` with ``expected`` (zero by default) over a sampled region.

    The report passes when the largest error over reliable samples is at
    most ``tol``; it is inconclusive when fewer than half the samples are
    reliable.
    """
    if samples < 50 and not isinstance(region, PointList):
        raise PreconditionError("at least 50 samples are required")
    z = sample_region(region, samples, exclude)
    fieldv = transform_grid(m, z, n)
    ok = fieldv.reliable.copy()
    if expected is None:
        target = np.zeros(z.shape, dtype=complex)
    else:
        target, ok_t = _safe_eval(expected, z, n)
        ok &= ok_t
    err = np.abs(fieldv.values - target)
    reliable = int(ok.sum())
    if reliable:
        i = int(np.argmax(np.where(ok, err, -1.0)))
        max_err, worst = float(err[i]), [float(z[i].real), float(z[i].imag)]
    else:
        max_err, worst = float("nan"), None
    if reliable < 0.5 * len(z):
        status = "inconclusive"
    else:
        status = "pass" if max_err <= tol else "fail"
    return VerificationReport(
        scenario=scenario or m.name, region=region.describe(), max_error=max_err,
        samples=int(len(z)), reliable_samples=reliable, tolerance=tol,
        passed=status == "pass", status=status, worst_point=worst)


def moments_vanish(m: MeasureSpec, kmax: int = 20, tol: float = 1e-10,
                   n: int = DEFAULT_NODES) -> bool:
    """All moments of order 1..kmax below ``tol`` in modulus."""
    return bool(np.all(np.abs(moments(m, range(1, kmax + 1), n)) < tol))


# }}}


__all__ = [
    "transform", "transform_grid", "reliability", "TransformField", "grid_points", "moment",
    "moments", "mass_at_infinity", "havin_functional", "havin_functionals", "neighborhood_contours",
    "sup_on_support", "Annulus", "Disk", "PointList", "sample_region", "VerificationReport",
    "verify_vanishing", "moments_vanish", "support_radius",
]
