"""Expression trees for densities and test functions.

Grammar (usual precedence, ``^`` binds tightest and takes an integer
exponent)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := NUMBER ['i'] | 'z' | 'pi' | 'i'
            | 'cauchy_of' '(' NAME [',' expr] ')'
            | 'moebius' '(' const_expr [',' expr] ')'
            | '(' expr ')'

``cauchy_of(nu)`` is the Cauchy transform of the measure named ``nu``;
``cauchy_of(nu, e)`` composes it with ``e``.  ``moebius(x0)`` is
``1/(x0 - z)``.  A minus sign directly in front of a number literal is part
of the literal, so ``-2`` parses to a negative constant while ``-(2)`` is a
negation node.

:func:`to_text` prints fully parenthesised text which parses back to a
structurally equal tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ExprSyntaxError, LinkError, PoleError, UnknownIdentifierError

# {{{ tree


class Expr:
    """Base of all expression nodes; supports arithmetic with numbers."""

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k):
        return Pow(self, k)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    """Numeric literal; either purely real or purely imaginary (see :func:`lit`)."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"constant must be finite, got {v}")
        if v.real != 0 and v.imag != 0:
            raise ValueError("Const holds a real or an imaginary number; use lit() for general complex values")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    left: Expr
    right: Expr
    symbol = "?"


@dataclass(frozen=True)
class Add(BinOp):
    symbol = "+"


@dataclass(frozen=True)
class Sub(BinOp):
    symbol = "-"


@dataclass(frozen=True)
class Mul(BinOp):
    symbol = "*"


@dataclass(frozen=True)
class Div(BinOp):
    symbol = "/"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if int(self.exponent) != self.exponent:
            raise ValueError("only integer powers are supported")
        object.__setattr__(self, "exponent", int(self.exponent))


Z = Var()


@dataclass(frozen=True)
class CauchyOf(Expr):
    """Cauchy transform of a named measure, evaluated at ``arg``.

    ``measure`` is filled in by :func:`link` and takes no part in equality.
    """

    name: str
    arg: Expr = Z
    measure: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Moebius(Expr):
    """``1/(x0 - arg)``."""

    x0: complex
    arg: Expr = Z

    def __post_init__(self):
        object.__setattr__(self, "x0", complex(self.x0))


def lit(value) -> Expr:
    """Literal for any finite complex number."""
    v = complex(value)
    if v.real != 0 and v.imag != 0:
        return Add(Const(v.real), Const(1j * v.imag))
    return Const(v)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return lit(x)


def cauchy_of(measure, arg: Expr = Z) -> CauchyOf:
    """Linked ``cauchy_of`` node for a :class:`~cauchymeasure.measures.MeasureSpec`."""
    return CauchyOf(measure.name, arg, measure)


def children(e: Expr):
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, (CauchyOf, Moebius)):
        return (e.arg,)
    return ()


def walk(e: Expr):
    yield e
    for c in children(e):
        yield from walk(c)


def references(e: Expr) -> set:
    return {n.name for n in walk(e) if isinstance(n, CauchyOf)}


def referenced_measures(e: Expr) -> list:
    """Linked measures referenced by ``e`` (unlinked references are skipped)."""
    out = {}
    for n in walk(e):
        if isinstance(n, CauchyOf) and n.measure is not None:
            prev = out.setdefault(n.name, n.measure)
            if prev != n.measure:
                raise LinkError(f"two different measures are named {n.name!r}")
    return list(out.values())


def is_constant(e: Expr) -> bool:
    return not any(isinstance(n, (Var, CauchyOf, Moebius)) for n in walk(e))


def _rebuild(e: Expr, fn) -> Expr:
    if isinstance(e, BinOp):
        return type(e)(fn(e.left), fn(e.right))
    if isinstance(e, Neg):
        return Neg(fn(e.arg))
    if isinstance(e, Pow):
        return Pow(fn(e.base), e.exponent)
    if isinstance(e, CauchyOf):
        return CauchyOf(e.name, fn(e.arg), e.measure)
    if isinstance(e, Moebius):
        return Moebius(e.x0, fn(e.arg))
    return e


def substitute(e: Expr, replacement: Expr) -> Expr:
    """Compose: every occurrence of the variable becomes ``replacement``."""
    if isinstance(e, Var):
        return replacement
    return _rebuild(e, lambda c: substitute(c, replacement))


def link(e: Expr, registry: Mapping[str, Any]) -> Expr:
    """Attach measures from ``registry`` to every ``cauchy_of`` node."""
    if isinstance(e, CauchyOf):
        if e.name not in registry:
            raise LinkError(f"unresolved measure reference {e.name!r}")
        return CauchyOf(e.name, link(e.arg, registry), registry[e.name])
    return _rebuild(e, lambda c: link(c, registry))


# }}}

# {{{ printing


def _num(x: float) -> str:
    return repr(float(x))


def _const_text(v: complex) -> str:
    if v.imag != 0:
        return _num(v.imag) + "i"
    return _num(v.real)


def _complex_text(v: complex) -> str:
    v = complex(v)
    if v.real != 0 and v.imag != 0:
        return f"({_num(v.real)} + {_num(v.imag)}i)"
    return _const_text(v)


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return "z"
    if isinstance(e, Neg):
        return f"-({to_text(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.symbol} {to_text(e.right)})"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if isinstance(e.base, (Const, Neg)):
            base = f"({base})"
        return f"({base} ^ {e.exponent})"
    if isinstance(e, CauchyOf):
        if isinstance(e.arg, Var):
            return f"cauchy_of({e.name})"
        return f"cauchy_of({e.name}, {to_text(e.arg)})"
    if isinstance(e, Moebius):
        if isinstance(e.arg, Var):
            return f"moebius({_complex_text(e.x0)})"
        return f"moebius({_complex_text(e.x0)}, {to_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# }}}

# {{{ parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, line, pos - line_start)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        else:
            tok = m.group()
            if kind == "op" and tok == "**":
                tok = "^"
            tokens.append(Token(kind, tok, line, pos - line_start))
        pos = m.end()
    tokens.append(Token("end", "", line, len(text) - line_start))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message, tok=None, cls=ExprSyntaxError):
        tok = tok or self.tok
        return cls(message, self.text, tok.line, tok.column)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == "end":
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected {text!r}, found {what}")
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self):
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self):
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            r = self.unary()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            if self.peek().kind == "number" and self.peek(2).text != "^":
                self.advance()
                return Const(-self.number(self.advance()))
            self.advance()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            paren = self.tok.text == "("
            if paren:
                self.advance()
            sign = 1
            if self.tok.text in ("-", "+") and self.tok.kind == "op":
                sign = -1 if self.advance().text == "-" else 1
            t = self.tok
            if t.kind != "number" or not t.text.isdigit():
                raise self.error("exponent must be an integer literal")
            self.advance()
            if paren:
                self.expect(")")
            return Pow(base, sign * int(t.text))
        return base

    @staticmethod
    def number(tok) -> complex:
        if tok.text.endswith("i"):
            return complex(0.0, float(tok.text[:-1]))
        return complex(float(tok.text))

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Const(self.number(t))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if t.text == "z":
                return Var()
            if t.text == "pi":
                return Const(math.pi)
            if t.text == "i":
                return Const(1j)
            if t.text == "cauchy_of":
                self.expect("(")
                name = self.tok
                if name.kind != "ident":
                    raise self.error("cauchy_of expects a measure name")
                self.advance()
                arg = Z
                if self.tok.text == ",":
                    self.advance()
                    arg = self.expr()
                self.expect(")")
                return CauchyOf(name.text, arg)
            if t.text == "moebius":
                self.expect("(")
                start = self.tok
                x0 = self.expr()
                if not is_constant(x0):
                    raise self.error("moebius expects a constant pole location", start)
                arg = Z
                if self.tok.text == ",":
                    self.advance()
                    arg = self.expr()
                self.expect(")")
                return Moebius(complex(evaluate(x0, 0j)), arg)
            raise self.error(f"unknown identifier {t.text!r}", t, UnknownIdentifierError)
        if t.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {t.text!r}")


def parse_density(text: str) -> Expr:
    """Parse density source text into an (unlinked) expression tree."""
    return _Parser(text).parse()


# }}}

# {{{ evaluation


def evaluate(e: Expr, z, n: int | None = None):
    """Evaluate ``e`` at a scalar or an array of points.

    ``cauchy_of`` nodes call the transform with ``n`` quadrature nodes per
    density component.  Hitting a pole raises :class:`PoleError`; a point too
    close to the carrier of a referenced measure raises
    :class:`~cauchymeasure.errors.GuardError`.
    """
    from .numerics import DEFAULT_NODES

    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        out = _eval(e, zz, DEFAULT_NODES if n is None else n)
    out = np.broadcast_to(out, zz.shape)
    if scalar:
        return complex(out)
    return np.array(out)


def _divide(num, den):
    if np.any(den == 0):
        raise PoleError("division by zero: expression evaluated at a pole")
    return num / den


def _eval(e, z, n):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return z
    if isinstance(e, Add):
        return _eval(e.left, z, n) + _eval(e.right, z, n)
    if isinstance(e, Sub):
        return _eval(e.left, z, n) - _eval(e.right, z, n)
    if isinstance(e, Mul):
        return _eval(e.left, z, n) * _eval(e.right, z, n)
    if isinstance(e, Div):
        return _divide(_eval(e.left, z, n), np.asarray(_eval(e.right, z, n)))
    if isinstance(e, Neg):
        return -_eval(e.arg, z, n)
    if isinstance(e, Pow):
        b = np.asarray(_eval(e.base, z, n), dtype=complex)
        if e.exponent < 0:
            return _divide(1.0, b ** (-e.exponent))
        return b ** e.exponent
    if isinstance(e, Moebius):
        return _divide(1.0, e.x0 - np.asarray(_eval(e.arg, z, n)))
    if isinstance(e, CauchyOf):
        if e.measure is None:
            raise LinkError(f"cauchy_of({e.name}) is not linked to a measure")
        from .cauchy import transform

        w = np.asarray(_eval(e.arg, z, n), dtype=complex)
        return transform(e.measure, np.broadcast_to(w, z.shape), n=n)
    raise TypeError(f"not an expression node: {e!r}")


eval_expr = evaluate

# }}}

# {{{ singularities

_MAX_DEGREE = 40


class Singularities(NamedTuple):
    """Known singular set of an expression.

    ``points`` are poles, ``carriers`` the supports (circles and segments)
    of referenced measures, ``opaque`` is set when part of the singular set
    could not be determined symbolically.
    """

    points: tuple
    carriers: tuple
    opaque: bool

    def __or__(self, other):
        return Singularities(self.points + other.points, self.carriers + other.carriers,
                             self.opaque or other.opaque)


_EMPTY = Singularities((), (), False)


def _rational(e):
    """(numerator, denominator) polynomials when ``e`` is rational in z."""
    if isinstance(e, Const):
        return Polynomial([e.value]), Polynomial([1.0 + 0j])
    if isinstance(e, Var):
        return Polynomial([0j, 1.0]), Polynomial([1.0 + 0j])
    if isinstance(e, Neg):
        r = _rational(e.arg)
        return None if r is None else (-r[0], r[1])
    if isinstance(e, BinOp):
        a, b = _rational(e.left), _rational(e.right)
        if a is None or b is None:
            return None
        (p, q), (r, s) = a, b
        if isinstance(e, Add):
            out = (p * s + r * q, q * s)
        elif isinstance(e, Sub):
            out = (p * s - r * q, q * s)
        elif isinstance(e, Mul):
            out = (p * r, q * s)
        else:
            out = (p * s, q * r)
    elif isinstance(e, Pow):
        r = _rational(e.base)
        if r is None:
            return None
        p, q = r
        k = abs(e.exponent)
        if k * max(p.degree(), q.degree()) > _MAX_DEGREE:
            return None
        out = (p ** k, q ** k) if e.exponent >= 0 else (q ** k, p ** k)
    elif isinstance(e, Moebius):
        r = _rational(e.arg)
        if r is None:
            return None
        p, q = r
        out = (q, e.x0 * q - p)
    else:
        return None
    if max(out[0].degree(), out[1].degree()) > _MAX_DEGREE:
        return None
    return out


def _roots(p: Polynomial):
    p = p.trim(tol=0)
    if p.degree() < 1:
        return ()
    return tuple(complex(r) for r in p.roots())


def _poles(num: Polynomial, den: Polynomial):
    poles = []
    scale = np.sum(np.abs(num.coef)) or 1.0
    for r in _roots(den):
        if abs(num(r)) <= 1e-9 * scale * max(1.0, abs(r)) ** num.degree():
            continue  # removable
        poles.append(r)
    return tuple(poles)


def _zeros(e):
    r = _rational(e)
    if r is None:
        return Singularities((), (), True)
    return Singularities(_roots(r[0]), (), False)


def singularities(e: Expr) -> Singularities:
    r = _rational(e)
    if r is not None:
        return Singularities(_poles(*r), (), False)
    if isinstance(e, (Add, Sub, Mul)):
        return singularities(e.left) | singularities(e.right)
    if isinstance(e, Div):
        return singularities(e.left) | singularities(e.right) | _zeros(e.right)
    if isinstance(e, Neg):
        return singularities(e.arg)
    if isinstance(e, Pow):
        s = singularities(e.base)
        return s | _zeros(e.base) if e.exponent < 0 else s
    if isinstance(e, Moebius):
        return singularities(e.arg) | _zeros(e.arg - e.x0)
    if isinstance(e, CauchyOf):
        inner = singularities(e.arg)
        if not isinstance(e.arg, Var):
            return inner | Singularities((), (), True)
        if e.measure is None:
            return inner | Singularities((), (), True)
        points, carriers = e.measure.support()
        return inner | Singularities(tuple(points), tuple(carriers), False)
    return _EMPTY


# }}}
