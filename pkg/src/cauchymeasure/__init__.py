"""Cauchy transforms of finite complex measures in the plane."""

from .errors import *  # noqa: F401,F403
from .numerics import Circle, Segment, circle_rule, segment_rule, contour_integral
from .expr import Z, cauchy_of, evaluate, lit, parse_density, to_text
from .measures import (
    Atom, CircleDensity, MeasureSpec, SegmentDensity, dumps, loads, moebius_pushforward,
    total_variation,
)
from .cauchy import mass_at_infinity, moment, moments, transform, verify_vanishing
from .hardy import CircularDomain, EpsilonSchedule, h1_norm, nu_kappa, riesz_decompose
from .screens import build_exIII_scenario, build_problem42, build_sv_scenario, inner_screen, outer_screen

__version__ = "0.1.0"
