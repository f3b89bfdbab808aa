import math

import numpy as np
import pytest

from cauchymeasure.errors import ExprSyntaxError, LinkError, PoleError, UnknownIdentifierError
from cauchymeasure.expr import (
    CauchyOf, Const, Div, Moebius, Pow, Sub, Var, Z, cauchy_of, evaluate, link, lit,
    parse_density, singularities, substitute, to_text,
)
from cauchymeasure.measures import CircleDensity, MeasureSpec, atoms
from cauchymeasure.numerics import Circle, Segment

from _trees import trees

UNIT_CIRC = MeasureSpec("unit_circ", (CircleDensity(Circle(0, 1), 1 / (2j * math.pi)),))


# {{{ parsing

def test_parse_tree_shape():
    assert parse_density("1/(z-2)") == Div(Const(1), Sub(Var(), Const(2)))
    assert parse_density("z**2") == Pow(Var(), 2)
    assert parse_density("2i") == Const(2j)
    assert parse_density("-3") == Const(-3)
    assert parse_density("moebius(1 + 2i)") == Moebius(1 + 2j)


@pytest.mark.parametrize("text,line,col", [
    ("1/(z-", 1, 5),
    ("1 +\n  * z", 2, 2),
    ("z $ 2", 1, 2),
    ("(z", 1, 2),
    ("z^1.5", 1, 2),
])
def test_syntax_error_position(text, line, col):
    with pytest.raises(ExprSyntaxError) as info:
        parse_density(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_density("sin(z)")
    with pytest.raises(ExprSyntaxError):
        parse_density("moebius(z)")


def test_round_trip_fixed_cases():
    for text in ["((-(z)) ^ 3)", "cauchy_of(mu, (1.0 / z))", "moebius((0.5 + -2.0i), (z * z))",
                 "((-2.0) ^ -2)", "-(-(z))", "(z - -1e-300)"]:
        e = parse_density(text)
        assert parse_density(to_text(e)) == e


def test_round_trip_random_trees():
    for t in trees(300, seed=7):
        assert parse_density(to_text(t)) == t

# }}}


# {{{ evaluation

def test_evaluate_basics():
    assert abs(evaluate(parse_density("z^2 + 1"), 1j)) < 1e-15
    assert evaluate(parse_density("moebius(2)"), 1) == 1
    z = np.array([0.5, 2j])
    assert np.allclose(evaluate(1 / (Z - 2), z), 1 / (z - 2))


def test_cauchy_of_atom_and_circle():
    nuK = atoms("nuK", [0.5], [1])
    e = link(parse_density("cauchy_of(nuK)"), {"nuK": nuK})
    assert evaluate(e, 2) == pytest.approx(-2 / 3, abs=1e-15)
    e = link(parse_density("cauchy_of(unit_circ)"), {"unit_circ": UNIT_CIRC})
    assert abs(evaluate(e, 0.3) - 1) < 1e-12


def test_unlinked_and_pole():
    with pytest.raises(LinkError):
        evaluate(parse_density("cauchy_of(nuK)"), 2)
    with pytest.raises(LinkError):
        link(parse_density("cauchy_of(nuK)"), {})
    with pytest.raises(PoleError):
        evaluate(1 / Z, 0)
    with pytest.raises(PoleError):
        evaluate(Pow(Z - 1, -2), np.array([0, 1]))


def test_substitute_composes():
    e = substitute(Z ** 2 + 1, 1 / Z)
    assert evaluate(e, 0.5) == pytest.approx(5)
    nuK = atoms("nuK", [0.5], [2])
    comp = cauchy_of(nuK, lit(3) - Z)
    assert evaluate(comp, 1) == pytest.approx(2 / (0.5 - 2))

# }}}


def test_singularities():
    s = singularities(1 / ((Z - 1) * (Z + 2j)))
    assert sorted(s.points, key=abs) == pytest.approx([1, -2j])
    assert not s.opaque
    # removable singularity is dropped
    assert singularities((Z - 1) / (Z - 1)).points == ()
    assert singularities(Moebius(0.5)).points == pytest.approx((0.5,))
    s = singularities(cauchy_of(atoms("a", [0.1], [1])) + 1 / Z)
    assert 0 in s.points and pytest.approx(0.1) in s.points
    s = singularities(cauchy_of(UNIT_CIRC))
    assert s.carriers == (Circle(0, 1),)
    assert singularities(CauchyOf("x")).opaque


def test_lit_splits_complex():
    e = lit(1 + 2j)
    assert evaluate(e, 0) == 1 + 2j
    assert parse_density(to_text(e)) == e
    with pytest.raises(ValueError):
        Const(1 + 1j)


def test_segment_carrier_in_singularities():
    from cauchymeasure.measures import SegmentDensity

    m = MeasureSpec("s", (SegmentDensity(Segment(0, 1), 1),))
    assert singularities(cauchy_of(m)).carriers == (Segment(0, 1),)
