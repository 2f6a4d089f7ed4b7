"""Named polynomial preimages with known reference data.

Each entry builds its polynomial from parameters and carries the published or
closed-form reference values used by the demo command and the regression tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ValidationError
from .polycore import ComplexPoly


def chebyshev_t(n: int) -> ComplexPoly:
    """Chebyshev polynomial of the first kind via T_{k+1} = 2 z T_k - T_{k-1}."""
    t_prev, t = ComplexPoly([1]), ComplexPoly([0, 1])
    if n == 0:
        return t_prev
    two_z = ComplexPoly([0, 2])
    for _ in range(n - 1):
        t_prev, t = t, two_z * t - t_prev
    return t


# --- polynomials ---------------------------------------------------------

def two_intervals_poly(alpha: float) -> ComplexPoly:
    # 1 + (z - 1)(2z + 1 + alpha^2)^2 / (1 - alpha^2)^2
    a2 = alpha * alpha
    d = (1 - a2) ** 2
    return ComplexPoly([-4 * a2 / d, (a2 * a2 - 2 * a2 - 3) / d, 4 * a2 / d, 4 / d])


def symmetric_two_intervals_poly(alpha: float, beta: float) -> ComplexPoly:
    s = 2.0 / (beta ** 2 - alpha ** 2)
    return ComplexPoly([1 - s * beta ** 2, 0, s])


def intersecting_arcs_poly(alpha: float) -> ComplexPoly:
    a2 = alpha * alpha
    return ComplexPoly([a2 * a2, 0, -2 * a2, 0, 1])


def three_intervals_gammas(alpha: float, beta: float) -> tuple[float, float]:
    return 0.5 * (alpha ** 2 - beta ** 2 - 1), 0.5 * (alpha ** 2 - beta ** 2 + 1)


def three_intervals_poly(alpha: float, beta: float) -> ComplexPoly:
    g1, _ = three_intervals_gammas(alpha, beta)
    d = (1 + g1) ** 2 - alpha ** 2
    return ComplexPoly([-(alpha ** 2 - beta ** 2) / d, -(g1 ** 2 - beta ** 2 - 1) / d,
                        -(beta ** 2 - alpha ** 2) / d, -1 / d])


def symmetric_three_intervals_poly(alpha: float) -> ComplexPoly:
    d = alpha * (1 - alpha)
    return ComplexPoly([0, -(1 - alpha + alpha ** 2) / d, 0, 1 / d])


DEGREE7_COEFFS = (-0.010502912343433701, 7.668606949720056, -1.793124210064775,
                  -63.44786532361087, 7.91625847587283, 130.38101983617594,
                  -6.112631353464664, -75.60176146228515)

FIVE_INTERVALS_COEFFS = (0.5, 7, -5, -32, 5, 26)


# --- closed-form centers -------------------------------------------------

def two_intervals_centers(alpha: float) -> tuple[float, float]:
    a2 = alpha * alpha
    big = (2 * a2 ** 3 - 9 * a2 ** 2 + 108 * a2 + 27
           + 2 * alpha * (9 - a2) * (3 + a2) ** 1.5) ** (1 / 3)
    c = 4 ** (1 / 3)
    return (-a2 / 3 - big / (6 * c), -a2 / 3 + big / (3 * c))


def two_intervals_h1(alpha: float) -> float:
    a2 = alpha * alpha
    return -(2 * a2 ** 3 - 9 * a2 ** 2 + 108 * a2 + 27
             + 2 * alpha * (9 - a2) * (3 + a2) ** 1.5) / (27 * (1 - a2) ** 2)


def symmetric_two_intervals_centers(alpha: float, beta: float) -> tuple[float, float]:
    a = 0.5 * (alpha + beta)
    return (-a, a)


def intersecting_arcs_centers(alpha: float) -> tuple[float, float]:
    a = (0.5 * (alpha ** 4 + math.sqrt(alpha ** 8 - 1))) ** 0.25
    return (-a, a)


def symmetric_three_intervals_centers(alpha: float) -> tuple[float, float, float]:
    s = 1 - alpha + alpha ** 2
    a3 = (0.5 * s ** 1.5 + 0.25 * (2 - 3 * alpha - 3 * alpha ** 2 + 2 * alpha ** 3)) ** (1 / 3)
    return (-a3, 0.0, a3)


@dataclass(frozen=True)
class Example:
    """A named fixture: polynomial builder, default parameters and reference values."""

    key: str
    aliases: tuple
    description: str
    build: Callable[..., ComplexPoly]
    params: dict = field(default_factory=dict)
    exact_centers: Optional[Callable[..., tuple]] = None
    published_centers: Optional[tuple] = None
    published_tol: float = 0.0
    published_steps: Optional[int] = None
    published_max_error: Optional[float] = None

    def polynomial(self, **overrides) -> ComplexPoly:
        return self.build(**self._params(overrides))

    def centers(self, **overrides):
        if self.exact_centers is not None:
            return self.exact_centers(**self._params(overrides))
        return self.published_centers

    def _params(self, overrides) -> dict:
        p = dict(self.params)
        for k, v in overrides.items():
            if v is None:
                continue
            if k not in p:
                raise ValidationError(f"example {self.key} has no parameter {k!r}")
            p[k] = v
        return p


EXAMPLES: dict[str, Example] = {}


def _register(ex: Example) -> None:
    EXAMPLES[ex.key] = ex


_register(Example(
    "ex3.1", ("two-intervals",), "E = [-1, b2] u [b3, 1], degree 3, n = (2, 1)",
    two_intervals_poly, {"alpha": 0.1}, exact_centers=two_intervals_centers,
    published_steps=4, published_max_error=3.6637e-15))
_register(Example(
    "ex3.2", ("symmetric-two-intervals",), "E = [-beta, -alpha] u [alpha, beta], degree 2",
    symmetric_two_intervals_poly, {"alpha": 0.2, "beta": 2.0},
    exact_centers=symmetric_two_intervals_centers, published_steps=0, published_max_error=0.0))
_register(Example(
    "ex3.3", ("intersecting-arcs",), "P = (z^2 - alpha^2)^2, two components made of arcs",
    intersecting_arcs_poly, {"alpha": 1.01}, exact_centers=intersecting_arcs_centers,
    published_steps=1, published_max_error=0.0))
_register(Example(
    "ex4.1", ("three-intervals",), "three intervals built from (alpha, beta), degree 3",
    three_intervals_poly, {"alpha": 0.05, "beta": 0.3},
    published_centers=(-0.7751, -0.1648, 0.8525), published_tol=5e-5, published_steps=4))
_register(Example(
    "ex4.2", ("symmetric-three-intervals",), "E = [-1, -(1-alpha)] u [-alpha, alpha] u [1-alpha, 1]",
    symmetric_three_intervals_poly, {"alpha": 0.2},
    exact_centers=symmetric_three_intervals_centers, published_steps=4,
    published_max_error=1.1102e-16))
_register(Example(
    "ex5.2", ("degree7",), "degree 7, four intervals, n = (2, 1, 3, 1)",
    lambda: ComplexPoly(DEGREE7_COEFFS), {},
    published_centers=(-0.807906463544657, -0.367217238438923,
                       0.341284084426686, 0.878324884021925),
    published_tol=1e-10, published_steps=5))
_register(Example(
    "ex5.3", ("five-intervals",), "26 z^5 + 5 z^4 - 32 z^3 - 5 z^2 + 7 z + 1/2",
    lambda: ComplexPoly(FIVE_INTERVALS_COEFFS), {},
    published_centers=(-0.957893296657925, -0.570567929561560, -0.079252067054220,
                       0.464367835203743, 0.951037765762270),
    published_tol=1e-10, published_steps=4))
_register(Example(
    "ex5.4-T10", ("chebyshev-10",), "1.05 T_10, ten intervals",
    lambda alpha: chebyshev_t(10) * alpha, {"alpha": 1.05}, published_steps=5))
_register(Example(
    "ex5.4-T20", ("chebyshev-20",), "1.05 T_20, twenty intervals",
    lambda alpha: chebyshev_t(20) * alpha, {"alpha": 1.05}, published_steps=6))


def get_example(name: str) -> Example:
    if name in EXAMPLES:
        return EXAMPLES[name]
    for ex in EXAMPLES.values():
        if name in ex.aliases:
            return ex
    known = ", ".join(sorted(list(EXAMPLES) + [a for e in EXAMPLES.values() for a in e.aliases]))
    raise ValidationError(f"unknown example {name!r}; known: {known}")
