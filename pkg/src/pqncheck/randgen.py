"""Seeded random scalar fields, forms, vector fields, and tensors.

Used by the checkers for function-rescaled probes and by the test suite for
property checks.  Everything is driven by a caller-supplied ``random.Random``
so identical seeds give identical objects.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from .exterior import Form, Tensor11, VectorField
from .scalar import Chart, Coord, Exp, Node, Product, ScalarField, Sum, Const


def random_scalar_field(
    chart: Chart,
    rng: random.Random,
    *,
    max_terms: int = 3,
    allow_exp: bool = True,
    allow_negative_powers: bool = False,
) -> ScalarField:
    """A small random field: a few monomials, optionally times exp of an affine form."""
    terms: list[Node] = []
    for _ in range(rng.randint(1, max_terms)):
        coeff = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        if coeff == 0:
            coeff = Fraction(1)
        factors: list[Node] = [Const(coeff)]
        for _ in range(rng.randint(0, 2)):
            idx = rng.randrange(chart.dim)
            factors.extend([Coord(idx)] * rng.randint(1, 2))
        if allow_exp and rng.random() < 0.4:
            arg_terms: list[Node] = []
            for _ in range(rng.randint(1, 2)):
                arg_terms.append(Product((Const(Fraction(rng.choice([-1, 1]))), Coord(rng.randrange(chart.dim)))))
            factors.append(Exp(Sum(tuple(arg_terms))))
        if allow_negative_powers and chart.n >= 2 and rng.random() < 0.3:
            i = rng.randrange(chart.n)
            j = rng.randrange(chart.n)
            if i != j:
                from .scalar import Power

                diff = Sum((Coord(i), Product((Const(Fraction(-1)), Coord(j)))))
                factors.append(Power(diff, -rng.randint(1, 2)))
        terms.append(Product(tuple(factors)))
    return ScalarField(chart, Sum(tuple(terms)))


def random_form(
    chart: Chart,
    degree: int,
    rng: random.Random,
    *,
    max_terms: int = 3,
    allow_exp: bool = True,
) -> Form:
    """A random form of the given degree with a few nonzero components."""
    keys = list(combinations(range(chart.dim), degree))
    if not keys:
        return Form.zero(chart, degree)
    rng.shuffle(keys)
    picked = keys[: max(1, min(max_terms, len(keys)))]
    return Form(
        chart,
        degree,
        {key: random_scalar_field(chart, rng, allow_exp=allow_exp) for key in picked},
    )


def random_vector_field(chart: Chart, rng: random.Random, *, allow_exp: bool = True) -> VectorField:
    return VectorField(
        chart,
        [
            random_scalar_field(chart, rng, max_terms=2, allow_exp=allow_exp)
            if rng.random() < 0.7
            else chart.zero()
            for _ in range(chart.dim)
        ],
    )


def random_tensor(chart: Chart, rng: random.Random, *, allow_exp: bool = False) -> Tensor11:
    entries = [
        [
            random_scalar_field(chart, rng, max_terms=1, allow_exp=allow_exp)
            if rng.random() < 0.4
            else 0
            for _ in range(chart.dim)
        ]
        for _ in range(chart.dim)
    ]
    return Tensor11(chart, entries)
