"""Seeded random expression trees for round-trip testing."""

import random

from cauchymeasure.expr import (
    Add, CauchyOf, Const, Div, Moebius, Mul, Neg, Pow, Sub, Z,
)

NAMES = ("nuK", "mu", "eta_1", "delta0", "F_2")


def _number(rng):
    kind = rng.random()
    if kind < 0.3:
        x = float(rng.randint(-9, 9))
    elif kind < 0.6:
        x = rng.uniform(-10, 10)
    else:
        x = rng.choice([1, -1]) * 10 ** rng.uniform(-12, 12)
    return x


def _const(rng):
    x = _number(rng)
    return Const(1j * x) if rng.random() < 0.3 else Const(x)


def _x0(rng):
    r = rng.random()
    if r < 0.4:
        return complex(_number(rng), 0)
    if r < 0.6:
        return complex(0, _number(rng))
    return complex(_number(rng), _number(rng))


def random_tree(rng, depth=4):
    if depth == 0 or rng.random() < 0.2:
        return Z if rng.random() < 0.5 else _const(rng)
    k = rng.randrange(8)
    sub = lambda: random_tree(rng, depth - 1)  # noqa: E731
    if k == 0:
        return Neg(sub())
    if k in (1, 2, 3, 4):
        return (Add, Sub, Mul, Div)[k - 1](sub(), sub())
    if k == 5:
        return Pow(sub(), rng.randint(-4, 6))
    if k == 6:
        arg = Z if rng.random() < 0.5 else sub()
        return CauchyOf(rng.choice(NAMES), arg)
    arg = Z if rng.random() < 0.5 else sub()
    return Moebius(_x0(rng), arg)


def trees(count, seed=0, depth=5):
    rng = random.Random(seed)
    return [random_tree(rng, depth) for _ in range(count)]
