"""Exact sup-norm geometry on Q^d.

Points are plain tuples of :class:`fractions.Fraction`; a :class:`FormalBall`
is a (center, radius) pair compared symbolically rather than as a point set.
Every predicate here is decided with exact rational arithmetic.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

# game radii routinely exceed the default 4300-digit str/int conversion limit
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

Point = Tuple[Fraction, ...]
RationalLike = Union[Fraction, int, str]


class DimensionError(ValueError):
    """Raised when two geometric objects live in different dimensions."""


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a Fraction, refusing floats.

    Strings are accepted in the ``"p/q"`` or ``"p"`` form used by transcripts.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text for ch in ".eE") or not text:
            raise ValueError(f"not an exact rational string: {value!r}")
        return Fraction(text)
    if isinstance(value, float):
        raise TypeError(f"floats are not accepted (got {value!r}); pass 'p/q'")
    # numbers.Rational implementations other than Fraction (e.g. gmpy2.mpq)
    try:
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        raise TypeError(f"cannot interpret {value!r} as a rational") from None


def format_rational(value: Fraction) -> str:
    """Serialize as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def as_point(coords: Union[Iterable[RationalLike], RationalLike]) -> Point:
    if isinstance(coords, (Fraction, int, str)):
        return (as_rational(coords),)
    point = tuple(as_rational(c) for c in coords)
    if not point:
        raise ValueError("points need at least one coordinate")
    return point


def _check_dims(p: Sequence, q: Sequence) -> None:
    if len(p) != len(q):
        raise DimensionError(f"dimension mismatch: {len(p)} vs {len(q)}")


def dist(p: Point, q: Point) -> Fraction:
    """Sup-norm distance ``max_i |p_i - q_i|``."""
    _check_dims(p, q)
    return max(abs(a - b) for a, b in zip(p, q))


@dataclass(frozen=True)
class FormalBall:
    """A formal ball: a center in Q^d with a positive rational radius."""

    center: Point
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", as_rational(self.radius))
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def scaled(self, factor: RationalLike) -> "FormalBall":
        """Concentric ball with radius multiplied by ``factor``."""
        return FormalBall(self.center, self.radius * as_rational(factor))

    def to_json(self) -> dict:
        return {
            "center": [format_rational(c) for c in self.center],
            "radius": format_rational(self.radius),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FormalBall":
        return cls(tuple(as_rational(c) for c in obj["center"]), as_rational(obj["radius"]))

    def __str__(self):
        coords = ", ".join(format_rational(c) for c in self.center)
        return f"B(({coords}), {format_rational(self.radius)})"


def ball(center, radius) -> FormalBall:
    """Convenience constructor: ``ball("1/2", "1/3")`` or ``ball((0, 0), 1)``."""
    return FormalBall(as_point(center), as_rational(radius))


def shrink_leq(inner: FormalBall, outer: FormalBall) -> bool:
    """The formal-ball order: ``inner.r + d(outer.x, inner.x) <= outer.r``."""
    return inner.radius + dist(outer.center, inner.center) <= outer.radius


def formally_disjoint(a: FormalBall, b: FormalBall) -> bool:
    """``d(a.x, b.x) >= a.r + b.r``; tangent balls count as disjoint."""
    return dist(a.center, b.center) >= a.radius + b.radius


def ball_contains_point(b: FormalBall, p: Point, closed: bool = True) -> bool:
    d = dist(b.center, p)
    return d <= b.radius if closed else d < b.radius


def point_ball_distance(p: Point, b: FormalBall) -> Fraction:
    """Distance from ``p`` to the closed ball ``b`` (zero if inside)."""
    return max(Fraction(0), dist(p, b.center) - b.radius)
