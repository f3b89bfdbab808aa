"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also repeated in the terminal summary.
"""

import json
import math
import time
from pathlib import Path

import numpy as np

from _acceptance_log import record
from _trees import trees
from cauchymeasure import cli
from cauchymeasure.errors import PreconditionError
from cauchymeasure.cauchy import (
    Annulus, Disk, havin_functional, havin_functionals, moments, neighborhood_contours, sample_region,
    sup_on_support, transform, verify_vanishing,
)
from cauchymeasure.expr import Moebius, Z, cauchy_of, evaluate, lit, parse_density, to_text
from cauchymeasure.hardy import (
    CircularDomain, h1_norm, hardy_decompose, harmonic_measure_density, kernel_identity_check,
    nu_kappa, poisson_kernel, radon_nikodym, riesz_decompose, tumarkin_functional,
)
from cauchymeasure.measures import (
    DT, Atom, CircleDensity, MeasureSpec, SegmentDensity, atoms, dumps, loads,
    moebius_pushforward, total_variation,
)
from cauchymeasure.numerics import Circle, Segment, circle_rule
from cauchymeasure.screens import build_exIII_scenario, build_problem42, build_sv_scenario, exIII_layout

N = 1024
SCENARIOS = Path(__file__).resolve().parents[1] / "docs" / "scenarios"
UNIT = Circle(0j, 1.0)
DW_2PI_I = lit(1 / (2j * math.pi))

# int_0^{2 pi} dt / |e^{it} - 2| from the complete elliptic integral, divided by 2 pi
H1_POLE_2_NORMALIZED = 0.536591003574682


def _atoms_in_disk(rng, k, rmax=0.7, rmin=0.05):
    r = rng.uniform(rmin, rmax, k)
    z = r * np.exp(2j * np.pi * rng.random(k))
    masses = rng.normal(size=k) + 1j * rng.normal(size=k)
    return z, masses


# {{{ 1. screened delta at 1/2


def test_c1_sv_delta_half():
    t0 = time.perf_counter()
    nuK = atoms("nuK", [0.5], [1.0])
    sv = build_sv_scenario(nuK, N)
    out = verify_vanishing(sv, Annulus(1.1, 3.0), tol=1e-9, samples=200, n=N)
    inside = verify_vanishing(sv, Disk(0.9), expected=cauchy_of(nuK), tol=1e-9, samples=200, n=N,
                              exclude=[Circle(0.5, 0.05)])
    elapsed = time.perf_counter() - t0
    ok = out.passed and inside.passed and out.reliable_samples == 200 and inside.reliable_samples == 200 \
        and elapsed < 2.0
    record(1, "screened delta_0.5 vanishes outside, matches inside", ok,
           f"outside {out.max_error:.2e}, inside {inside.max_error:.2e}, {elapsed:.2f}s")
    assert ok


# }}}

# {{{ 2. moments vs exterior vanishing


def _screened_composites():
    seg = MeasureSpec("seg", (SegmentDensity(Segment(0j, 0.9 + 0j), Z * Z + 1),))
    rng = np.random.default_rng(2)
    z, w = _atoms_in_disk(rng, 4)
    return [
        build_sv_scenario(atoms("nuK", [0.5], [1.0]), N),
        build_sv_scenario(seg, N),
        build_sv_scenario(atoms("rand", z, w), N),
        build_exIII_scenario(1, n=N),
        build_exIII_scenario(3, n=N),
        build_exIII_scenario(6, n=N),
    ]


def test_c2_moments_and_pairing():
    worst = max(float(np.max(np.abs(moments(m, range(1, 21), N)))) for m in _screened_composites())
    moments_ok = worst < 1e-10

    # the pairing holds for measures whose transform has no 1/z part at 0;
    # atoms at the origin are kept out of the random draws
    rng = np.random.default_rng(7)
    agree = 0
    for i in range(10):
        z, w = _atoms_in_disk(rng, int(rng.integers(1, 5)))
        m = atoms(f"r{i}", z, w)
        if i % 2 == 0:
            m = build_sv_scenario(m, N)
        mom = bool(np.all(np.abs(moments(m, range(1, 21), N)) < 1e-10))
        ext = verify_vanishing(m, Annulus(1.1, 3.0), tol=1e-9, n=N).passed
        agree += mom == ext and mom == (i % 2 == 0)
    ok = moments_ok and agree == 10
    record(2, "moments vanish on screened composites, pairing agrees", ok,
           f"max |m_k| {worst:.2e}, {agree}/10 agree")
    assert ok


# }}}

# {{{ 3. disks screened inside the unit disk


def _exIII_errors(m):
    sc = build_exIII_scenario(m, n=N)
    layout = exIII_layout(m, n=N)
    errs = []
    for d in layout.disks:
        r = verify_vanishing(sc, Disk(0.9 * d.radius, d.center), samples=50, n=N, tol=1e-8)
        errs.append(r.max_error if r.reliable_samples == r.samples else math.inf)
    r = verify_vanishing(sc, Annulus(1.1, 3.0), n=N, tol=1e-8)
    errs.append(r.max_error if r.reliable_samples == r.samples else math.inf)
    excl = [Circle(d.center, 1.1 * d.radius) for d in layout.disks] + [Circle(0j, 0.05)]
    r = verify_vanishing(sc, Disk(0.9), expected=lit(-1.0) / Z, samples=100, n=N, tol=1e-8, exclude=excl)
    errs.append(r.max_error if r.reliable_samples == r.samples else math.inf)
    return max(errs)


def test_c3_exIII():
    errs = {m: _exIII_errors(m) for m in (1, 3, 6)}
    ok = all(e < 1e-8 for e in errs.values())
    record(3, "inner-screened disks: zero in disks and outside, -1/z between", ok,
           ", ".join(f"m={m}: {e:.2e}" for m, e in errs.items()))
    assert ok


# }}}

# {{{ 4. Moebius transport


def test_c4_moebius_transport():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(20):
        z, w = _atoms_in_disk(rng, int(rng.integers(1, 6)), rmax=2.0)
        m = atoms("m", z, w)
        x0 = complex(*rng.uniform(-2, 2, 2))
        while np.min(np.abs(z - x0)) < 0.2:
            x0 = complex(*rng.uniform(-2, 2, 2))
        mt = moebius_pushforward(m, x0)
        y = complex(*rng.uniform(-3, 3, 2)) + 3 * np.exp(2j * np.pi * rng.random(50))
        y = y[(np.abs(y - x0) > 0.1) & (np.min(np.abs(y[:, None] - z[None, :]), axis=1) > 0.1)]
        lhs = transform(mt, 1 / (x0 - y), N)
        rhs = (x0 - y) * transform(m, y, N)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs)))))
    ok = worst < 1e-10
    record(4, "Moebius transport identity", ok, f"max error {worst:.2e}")
    assert ok


# }}}

# {{{ 5. Havin functional


def _direct_integral(h, m):
    total = 0j
    for c in m.components:
        if isinstance(c, Atom):
            total += complex(evaluate(h, c.location)) * c.mass
        else:
            nodes, coeffs = c.discretize(N)
            total += complex(np.sum(evaluate(h, nodes, n=N) * coeffs))
    return total


POLE_CANDIDATES = [2.0, -2.5j, 1.7 + 1.7j, -3.0, 0.2 + 0.6j, -0.6 - 0.3j, 1.5 - 0.4j, 0.3j - 1.4, 4j]


def _test_functions(contours, m):
    radii = [(r.carrier.center, r.carrier.radius) for r in contours]
    points, carriers = m.support()

    def clear(p):
        if any(abs(abs(p - c) - R) < 0.1 for c, R in radii):
            return False
        return all(abs(p - q) > 0.1 for q in points)

    poles = [p for p in POLE_CANDIDATES if clear(p)][:5]
    assert len(poles) == 5
    hs = [lit(1.0), Z, Z ** 2, Z ** 3, Z + lit(2j)]
    for p in poles:
        hs += [1 / (Z - lit(p)), (Z - lit(p)) ** -2, Z / (Z - lit(p)), Moebius(p, Z) ** 3]
    return hs


def _havin_scenarios():
    two = [CircularDomain.disk(-3, 1), CircularDomain.disk(3, 1)]
    return [
        build_sv_scenario(atoms("nuK", [0.5], [1.0]), N),
        build_sv_scenario(MeasureSpec("seg", (SegmentDensity(Segment(0j, 0.9 + 0j), Z * Z + 1),)), N),
        build_exIII_scenario(3, n=N),
        build_problem42(two),
        riesz_decompose([(two[0], lit(1.0)), (two[1], 1 / (Z - lit(6.0)))], n=N),
        atoms("plain", [0.3, -0.4j], [1.0, 2j]),
    ]


def test_c5_havin():
    worst_slack, worst_dual, count = -math.inf, 0.0, 0
    for m in _havin_scenarios():
        margin = 0.05
        while True:
            try:
                contours = neighborhood_contours(m, margin, N)
                break
            except PreconditionError:
                margin /= 2
        g = cauchy_of(m)
        tv = total_variation(m, N)
        hs = _test_functions(contours, m)
        for h, T in zip(hs, havin_functionals(g, hs, contours, N)):
            worst_slack = max(worst_slack, abs(T) - tv * sup_on_support(h, m) - 1e-8)
            worst_dual = max(worst_dual, abs(T - _direct_integral(h, m)) / max(1, abs(T)))
            count += 1
    U = MeasureSpec("U", (CircleDensity(UNIT, DW_2PI_I),))
    eq = havin_functional(cauchy_of(U), 1 / Z,
                          [circle_rule(Circle(0j, 1.2, "ccw"), N), circle_rule(Circle(0j, 0.8, "cw"), N)], N)
    ok = worst_slack <= 0 and worst_dual < 1e-8 and abs(eq - 1) < 1e-10
    record(5, "Havin functional bounded by |nu| sup|h|, equality case", ok,
           f"{count} pairs, max excess {worst_slack + 1e-8:.2e}, dual route {worst_dual:.1e}, "
           f"|T-1| {abs(eq - 1):.1e}")
    assert ok


# }}}

# {{{ 6. Tumarkin bound and Poisson kernel


def _unit_circle_measures():
    rng = np.random.default_rng(6)
    ang = np.exp(2j * np.pi * rng.random(3))
    return [
        MeasureSpec("U", (CircleDensity(UNIT, DW_2PI_I),)),
        atoms("delta1", [1.0], [1.0]),
        MeasureSpec("zero", ()),
        atoms("three", ang, rng.normal(size=3) + 1j * rng.normal(size=3)),
        MeasureSpec("zdw", (CircleDensity(UNIT, Z * DW_2PI_I),)),
        MeasureSpec("quad", (CircleDensity(UNIT, (Z * Z + 2) * DW_2PI_I),)),
        MeasureSpec("cos", (CircleDensity(UNIT, (Z + 1 / Z) / 2, DT),)),
        MeasureSpec("pole", (CircleDensity(UNIT, 1 / (Z - lit(2.0)) * DW_2PI_I),)),
        MeasureSpec("mixed", (Atom(1j, 0.5), CircleDensity(UNIT, lit(0.3), DT))),
        MeasureSpec("cw", (CircleDensity(Circle(0j, 1.0, "cw"), (Z - lit(0.5j)) * DW_2PI_I),)),
    ]


def test_c6_tumarkin_and_poisson():
    ms = _unit_circle_measures()
    excess = max(tumarkin_functional(m, n=N) - 2 * np.pi * total_variation(m, N) for m in ms)
    eq = [abs(tumarkin_functional(m, n=N) - 2 * np.pi) for m in ms[:2]]
    r = np.linspace(0.05, 0.95, 10)
    th = np.linspace(0, 2 * np.pi, 30)
    R, TH, T = np.meshgrid(r, th, th, indexing="ij")
    resid = float(np.max(kernel_identity_check(R, TH, T)))
    t = 2 * np.pi * np.arange(4096) / 4096
    mass = max(abs(np.sum(poisson_kernel(rr, t)) * 2 * np.pi / 4096 - 2 * np.pi) for rr in (0.3, 0.7, 0.95))
    ok = excess <= 1e-6 and max(eq) < 1e-8 and resid < 1e-12 and mass < 1e-12
    record(6, "Tumarkin bound, equality cases, Poisson identity and mass", ok,
           f"excess {excess:.1e}, equality {max(eq):.1e}, identity {resid:.1e}, mass {mass:.1e}")
    assert ok


# }}}

# {{{ 7. H1 norm, nu_kappa, decomposition


def test_c7_h1_and_decomposition():
    D = CircularDomain.disk()
    errs = []
    for kappa in (lit(1.0), 1 / (Z - lit(2.0)), Z):
        rep = h1_norm(kappa, D, n=N)
        nu = nu_kappa(kappa, D, n=N)
        errs.append(abs(total_variation(nu, N) - rep.normalized))
    oracle = abs(h1_norm(1 / (Z - lit(2.0)), D, n=N).normalized - H1_POLE_2_NORMALIZED)
    diverges = not h1_norm(1 / (Z - lit(1.0)), D, n=N).converged

    ann = CircularDomain(Circle(0j, 1.0), (Circle(0j, 0.3),))
    F = Z + 1 / Z
    parts = hardy_decompose(F, ann, N)
    z = sample_region(Annulus(0.5, 0.8), 200)
    dec = float(np.max(np.abs(sum(evaluate(p, z, n=N) for p in parts) - evaluate(F, z))))
    ok = max(errs) < 1e-8 and oracle < 1e-8 and diverges and dec < 1e-10
    record(7, "|nu_kappa| equals the normalized H1 norm, 1/(z-1) diverges, decomposition", ok,
           f"TV gap {max(errs):.1e}, oracle {oracle:.1e}, diverges={diverges}, decomposition {dec:.1e}")
    assert ok


# }}}

# {{{ 8. two disks


def test_c8_two_disks():
    plain = [CircularDomain.disk(-3, 1), CircularDomain.disk(3, 1)]
    nu = riesz_decompose([(d, lit(1.0)) for d in plain], eps=1e-7, n=N)
    ind = build_problem42(plain)
    key = np.array([-3, 3, 0], dtype=complex)
    vals = max(float(np.max(np.abs(transform(m, key, N) - [1, 1, 0]))) for m in (nu, ind))
    pts = np.concatenate([sample_region(Disk(0.9, 3), 50), sample_region(Disk(0.9, -3), 50),
                          sample_region(Annulus(1.1, 5.0, 3), 50)])
    agree = float(np.max(np.abs(transform(nu, pts, N) - transform(ind, pts, N))))
    # the Riesz route sits on circles of radius 1 - eps
    tv = max(abs(total_variation(ind, N) - 2), abs(total_variation(nu, N) - 2 * (1 - 1e-7)))

    holed = CircularDomain(Circle(-3, 1.0), (Circle(-3, 0.3),))
    hole = max(abs(transform(m, -3 + 0j, N)) for m in
               (build_problem42([holed]), riesz_decompose([(holed, lit(1.0))], eps=1e-7, n=N)))
    ok = vals < 1e-9 and agree < 1e-9 and tv < 1e-9 and hole < 1e-9
    record(8, "indicator of two disjoint disks, both routes agree, holed variant", ok,
           f"centres/origin {vals:.1e}, routes {agree:.1e}, TV {tv:.1e}, hole centre {hole:.1e}")
    assert ok


# }}}

# {{{ 9. serialization round trips


def test_c9_round_trips(capsys, tmp_path):
    bad = [t for t in trees(1000, seed=9) if parse_density(to_text(t)) != t]
    canon_ok = True
    for name in ("example1.json", "ex3.json", "two_disks.json", "segment.json"):
        cli.main(["canon", str(SCENARIOS / name)])
        once = capsys.readouterr().out
        assert dumps(loads(once)) == once
        p = tmp_path / name
        p.write_text(once)
        cli.main(["canon", str(p)])
        canon_ok &= capsys.readouterr().out == once
        canon_ok &= json.loads(once) == json.loads(dumps(loads((SCENARIOS / name).read_text())))
    ok = not bad and canon_ok
    record(9, "expression and measure spec round trips", ok,
           f"{1000 - len(bad)}/1000 trees, canonical output stable={canon_ok}")
    assert ok


# }}}

# {{{ 10. harmonic measure


def test_c10_harmonic_measure():
    rng = np.random.default_rng(10)
    disk = Circle(0.5 - 0.2j, 1.7)
    t = 2 * np.pi * np.arange(4096) / 4096
    worst_mass = 0.0
    for _ in range(10):
        b = disk.center + disk.radius * 0.9 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        mass = np.sum(harmonic_measure_density(disk, b, t)) * 2 * np.pi / 4096
        worst_mass = max(worst_mass, abs(mass - 1))
    dens = [DW_2PI_I, Z * DW_2PI_I, 1 / (Z - lit(4.0)), (Z - lit(0.5)) ** 2 * lit(1j), lit(0.3)]
    worst_rn = 0.0
    for i, f in enumerate(dens):
        comp = CircleDensity(disk, f, DT if i == 4 else "dw")
        rn = radon_nikodym(comp, disk, disk.center + 0.3 + 0.4j, n=4096)
        tv = total_variation(MeasureSpec("c", (comp,)), 512)
        worst_rn = max(worst_rn, abs(rn.total_variation() - tv))
    ok = worst_mass < 1e-12 and worst_rn < 1e-8
    record(10, "harmonic measure has mass 1, Radon-Nikodym variation consistent", ok,
           f"mass {worst_mass:.1e}, variation {worst_rn:.1e}")
    assert ok


# }}}
