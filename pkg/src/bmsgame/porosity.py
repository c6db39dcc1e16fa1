"""Set oracles, porosity certificates and the K_m sampler.

A set oracle answers membership and ball queries about a target or an
exceptional set exactly on rational input; ``None`` means "cannot decide".
A porosity certificate bundles a witness procedure ``(x, r) -> y`` with the
oracle of the set it certifies, so that every claim can be re-checked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .diophantine import stern_brocot
from .metric import (
    FormalBall,
    Point,
    as_point,
    as_rational,
    ball_contains_point,
    dist,
    shrink_leq,
)

THIRD = Fraction(1, 3)
TWO_THIRDS = Fraction(2, 3)
HALF = Fraction(1, 2)


class WitnessError(RuntimeError):
    """A witness procedure could not produce a porosity hole."""


class SetOracle:
    """Decision interface for a subset of R^d.

    Subclasses implement ``point_member``, ``ball_disjoint`` (the closed, or
    with ``open_ball=True`` the open, ball misses the set) and
    ``ball_inside`` (the closed ball lies in the set).
    """

    name = "set"
    dim = 1
    exceptional_prefix = None

    def point_member(self, p: Point) -> bool:
        raise NotImplementedError

    def ball_disjoint(self, b: FormalBall, open_ball: bool = False) -> Optional[bool]:
        return None

    def ball_inside(self, b: FormalBall) -> Optional[bool]:
        return None

    def ball_inside_complement(self, b: FormalBall) -> Optional[bool]:
        return self.ball_disjoint(b)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def cantor_member(x: Fraction) -> bool:
    """Membership of a rational in the middle-thirds Cantor set.

    Follows the ternary expansion digit by digit; a rational's orbit under the
    shift is eventually periodic, so revisiting a value means membership.
    """
    x = Fraction(x)
    seen = set()
    while True:
        if x < 0 or x > 1:
            return False
        if x in seen:
            return True
        seen.add(x)
        if x <= THIRD:
            x = 3 * x
        elif x >= TWO_THIRDS:
            x = 3 * x - 2
        else:
            return False


def cantor_interval_disjoint(a: Fraction, b: Fraction, a_open: bool = False, b_open: bool = False) -> bool:
    """Decide whether the interval with endpoints a <= b misses the Cantor set."""
    if a > b or (a == b and (a_open or b_open)):
        return True
    if a == b:
        return not cantor_member(a)
    while True:
        def contains(c):
            return (a < c or (a == c and not a_open)) and (c < b or (c == b and not b_open))

        if b < 0 or (b == 0 and b_open) or a > 1 or (a == 1 and a_open):
            return True
        if any(contains(c) for c in (0, THIRD, TWO_THIRDS, 1)):
            return False
        # now inside one of (0,1/3), (1/3,2/3), (2/3,1); length triples each step
        if a >= THIRD and b <= TWO_THIRDS:
            return True
        if b <= THIRD:
            a, b = 3 * a, 3 * b
        else:
            a, b = 3 * a - 2, 3 * b - 2


class CantorOracle(SetOracle):
    """The middle-thirds Cantor set C in [0, 1]."""

    name = "cantor"

    def point_member(self, p) -> bool:
        (x,) = as_point(p)
        return cantor_member(x)

    def ball_disjoint(self, b: FormalBall, open_ball: bool = False) -> bool:
        (x,) = b.center
        return cantor_interval_disjoint(x - b.radius, x + b.radius, open_ball, open_ball)

    def ball_inside(self, b: FormalBall) -> bool:
        return False  # C has empty interior


class FiniteSetOracle(SetOracle):
    def __init__(self, points: Iterable, name: Optional[str] = None):
        self.points = [as_point(p) for p in points]
        self.dim = len(self.points[0]) if self.points else 1
        self.name = name or "finite{" + ",".join(str(p[0] if len(p) == 1 else p) for p in self.points) + "}"

    def point_member(self, p) -> bool:
        return as_point(p) in self.points

    def ball_disjoint(self, b, open_ball=False):
        return not any(ball_contains_point(b, p, closed=not open_ball) for p in self.points)

    def ball_inside(self, b):
        return False


class AffineOracle(SetOracle):
    """The image ``scale * E + shift`` of a base set E (scale > 0)."""

    def __init__(self, base: SetOracle, scale, shift):
        self.base = base
        self.scale = as_rational(scale)
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        self.shift = as_point(shift)
        self.dim = len(self.shift)
        self.name = f"affine({base.name}; {scale}, {','.join(str(s) for s in self.shift)})"

    def pull(self, p: Point) -> Point:
        return tuple((c - t) / self.scale for c, t in zip(p, self.shift))

    def push(self, p: Point) -> Point:
        return tuple(c * self.scale + t for c, t in zip(p, self.shift))

    def pull_ball(self, b: FormalBall) -> FormalBall:
        return FormalBall(self.pull(b.center), b.radius / self.scale)

    def point_member(self, p):
        return self.base.point_member(self.pull(as_point(p)))

    def ball_disjoint(self, b, open_ball=False):
        return self.base.ball_disjoint(self.pull_ball(b), open_ball)

    def ball_inside(self, b):
        return self.base.ball_inside(self.pull_ball(b))


class UnionOracle(SetOracle):
    def __init__(self, parts: Sequence[SetOracle]):
        self.parts = list(parts)
        self.dim = self.parts[0].dim if self.parts else 1
        self.name = " u ".join(p.name for p in self.parts) or "empty"

    def point_member(self, p):
        return any(o.point_member(p) for o in self.parts)

    def ball_disjoint(self, b, open_ball=False):
        answers = [o.ball_disjoint(b, open_ball) for o in self.parts]
        if any(a is False for a in answers):
            return False
        return True if all(a is True for a in answers) else None

    def ball_inside(self, b):
        if not self.parts:
            return False
        return True if any(o.ball_inside(b) is True for o in self.parts) else None


class ComplementOracle(SetOracle):
    def __init__(self, base: SetOracle):
        self.base = base
        self.dim = base.dim
        self.name = f"complement({base.name})"

    def point_member(self, p):
        return not self.base.point_member(p)

    def ball_disjoint(self, b, open_ball=False):
        # a closed ball misses the complement iff it lies inside the base set
        if open_ball:
            return None
        return self.base.ball_inside(b)

    def ball_inside(self, b):
        return self.base.ball_disjoint(b)


class CoCountableOracle(SetOracle):
    """R^d minus a countable set, known through an enumerated prefix."""

    def __init__(self, points: Iterable, name: str = "co-countable", dim: Optional[int] = None):
        self.points = [as_point(p) for p in points]
        self.dim = dim or (len(self.points[0]) if self.points else 1)
        self.name = f"{name}[{len(self.points)}]"

    def point_member(self, p):
        return as_point(p) not in self.points

    def ball_disjoint(self, b, open_ball=False):
        return False  # a positive-radius ball is uncountable

    def ball_inside(self, b):
        if any(ball_contains_point(b, p) for p in self.points):
            return False
        return None

    def exceptional_prefix(self):
        return list(self.points)


Witness = Callable[[Point, Fraction], Point]


@dataclass
class PorosityCertificate:
    """Claims: for every ball B(x, r) with r <= r0 the witness y gives an open
    ball B°(y, beta*r) inside B(x, r) that misses ``oracle``'s set."""

    beta: Fraction
    r0: Fraction
    witness: Witness
    oracle: SetOracle
    name: str = ""

    def __post_init__(self):
        self.beta = as_rational(self.beta)
        self.r0 = as_rational(self.r0)
        if not self.name:
            self.name = self.oracle.name

    def hole(self, b: FormalBall) -> FormalBall:
        if b.radius > self.r0:
            raise ValueError(f"radius {b.radius} exceeds certificate scale r0 = {self.r0}")
        return FormalBall(as_point(self.witness(b.center, b.radius)), self.beta * b.radius)


def _cantor_straddle(x: Fraction, r: Fraction) -> Fraction:
    # B(x, r) meets both [0,1/3] and [2/3,1]; reflect so that x >= 1/2
    flip = x < HALF
    if flip:
        x = 1 - x
    if r / 5 <= Fraction(1, 6):
        y = HALF
    else:  # 3r/5 >= 1/2
        y = HALF + 4 * r / 5
    return 1 - y if flip else y


def cantor_witness(x, r, r0=Fraction(1), max_depth: Optional[int] = None) -> Point:
    """Hole of radius r/5 inside B(x, r) missing the Cantor set.

    Reduces to the case where the ball meets both outer thirds by the triadic
    similarities t -> 3t and t -> 3t - 2, then places the hole in the middle
    gap or, for large radii, beyond the unit interval.
    """
    (x,) = as_point(x)
    r = as_rational(r)
    if r > r0:
        raise ValueError(f"radius {r} exceeds r0 = {r0}")
    if max_depth is None:
        max_depth = r.denominator.bit_length() + 4
    # original coordinate = scale * current + offset
    scale, offset = Fraction(1), Fraction(0)
    for _ in range(max_depth + 1):
        lo, hi = x - r, x + r
        if hi < 0 or lo > 1:
            y = x
        elif lo <= THIRD and hi >= TWO_THIRDS:
            y = _cantor_straddle(x, r)
        elif x - 3 * r / 5 <= 0:
            y = x - 4 * r / 5
        elif x + 3 * r / 5 >= 1:
            y = x + 4 * r / 5
        elif hi < TWO_THIRDS:
            x, r, scale = 3 * x, 3 * r, scale / 3
            continue
        else:
            x, r, offset, scale = 3 * x - 2, 3 * r, offset + 2 * scale / 3, scale / 3
            continue
        return (scale * y + offset,)
    raise WitnessError(f"zoom depth cap {max_depth} exceeded")


def cantor_certificate() -> PorosityCertificate:
    return PorosityCertificate(Fraction(1, 5), Fraction(1), cantor_witness, CantorOracle(), "cantor")


def _grid_holes(x: Point, r: Fraction, beta: Fraction):
    reach = (1 - beta) * r
    step = 2 * beta * r
    n = int((1 - beta) / (2 * beta))
    offsets = sorted({Fraction(0), reach, -reach} | {j * step for j in range(-n, n + 1)}, key=abs)
    for shift in itertools.product(offsets, repeat=len(x)):
        yield tuple(c + s for c, s in zip(x, shift))


def finite_certificate(points: Iterable, beta, r0) -> PorosityCertificate:
    """Certificate for a finite set using the first free hole on a grid of candidates."""
    oracle = FiniteSetOracle(points)
    beta, r0 = as_rational(beta), as_rational(r0)

    def witness(x, r):
        x = as_point(x)
        for y in _grid_holes(x, r, beta):
            if oracle.ball_disjoint(FormalBall(y, beta * r), open_ball=True):
                return y
        raise WitnessError(f"no free hole of radius {beta * r} in B({x}, {r})")

    return PorosityCertificate(beta, r0, witness, oracle, oracle.name)


def affine_certificate(cert: PorosityCertificate, scale, shift) -> PorosityCertificate:
    """Conjugate a certificate by ``t -> scale*t + shift``."""
    oracle = AffineOracle(cert.oracle, scale, shift)

    def witness(x, r):
        y = cert.witness(oracle.pull(as_point(x)), as_rational(r) / oracle.scale)
        return oracle.push(as_point(y))

    return PorosityCertificate(cert.beta, cert.r0 * oracle.scale, witness, oracle, oracle.name)


@dataclass
class CertificateReport:
    checked: int = 0
    failures: List[Tuple[FormalBall, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok


def verify_certificate(cert: PorosityCertificate, samples: Iterable[FormalBall],
                       beta=None) -> CertificateReport:
    """Check both porosity clauses on each sample; ``beta`` overrides cert.beta."""
    beta = cert.beta if beta is None else as_rational(beta)
    report = CertificateReport()
    for b in samples:
        if b.radius > cert.r0:
            raise ValueError(f"sample {b} has radius above r0 = {cert.r0}")
        report.checked += 1
        try:
            y = as_point(cert.witness(b.center, b.radius))
        except Exception as exc:
            report.failures.append((b, f"witness failed: {exc}"))
            continue
        hole = FormalBall(y, beta * b.radius)
        if not shrink_leq(hole, b):
            report.failures.append((b, f"hole {hole} not inside {b}"))
        elif cert.oracle.ball_disjoint(hole, open_ball=True) is not True:
            report.failures.append((b, f"open hole {hole} meets {cert.oracle.name}"))
    return report


def certificate_map(cert: PorosityCertificate) -> Callable[[FormalBall], FormalBall]:
    """The positional BMS reply ``B(x, r) -> B(y, beta*r)`` of a certificate."""
    return cert.hole


@dataclass
class KmEstimate:
    kept: List[Point]
    deleted: Dict[Point, Tuple[FormalBall, FormalBall]]
    balls_sampled: int = 0


def _grid(center: Point, radius: Fraction, step: Fraction) -> List[Point]:
    axes = []
    for c in center:
        lo = -((-(c - radius)) // step)  # ceil
        hi = (c + radius) // step
        axes.append([k * step for k in range(int(lo), int(hi) + 1)])
    return [tuple(p) for p in itertools.product(*axes)]


def km_estimate(reply: Callable[[FormalBall], FormalBall], m: int, region: FormalBall,
                grid_step, game: str = "bms") -> KmEstimate:
    """Sample the complement of the union of g(B) over balls with r <= 1/m.

    ``reply`` is a positional Alice strategy. For BMS, g(B) is the open reply
    ball; for BMM it is B°(x, r) minus the closed reply ball. Returned points
    were never deleted by a sampled ball; every deleted point records the ball
    and reply that removed it.
    """
    step = as_rational(grid_step)
    top = Fraction(1, m)
    if step >= top:
        raise ValueError(f"grid step {step} must be finer than 1/m = {top}")
    points = _grid(region.center, region.radius, step)
    radii = []
    r = top
    while r >= step:
        radii.append(r)
        r /= 2
    centers = _grid(region.center, region.radius + top, step)
    deleted: Dict[Point, Tuple[FormalBall, FormalBall]] = {}
    sampled = 0
    for x in centers:
        for r in radii:
            b = FormalBall(x, r)
            g = reply(b)
            sampled += 1
            for p in points:
                if p in deleted:
                    continue
                if game == "bms":
                    hit = ball_contains_point(g, p, closed=False)
                else:
                    hit = ball_contains_point(b, p, closed=False) and not ball_contains_point(g, p)
                if hit:
                    deleted[p] = (b, g)
    kept = [p for p in points if p not in deleted]
    return KmEstimate(kept, deleted, sampled)


# ---------------------------------------------------------------------------
# spec strings
#
#   cert   := "cantor" | "finite{p;p;...}" | "affine(" cert ";" scale ";" shift ")"
#   oracle := cert | "complement(" oracle ")" | "union(" oracle "|" oracle ... ")"
#             | "cocountable{p;p;...}" | "cocountable:sb=N"

def split_top(text: str, sep: str) -> List[str]:
    """Split on ``sep`` outside (), {} and [] nesting."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _braced_points(body: str) -> List[Point]:
    body = body.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ValueError(f"expected a point list in braces, got {body!r}")
    items = [s for s in split_top(body[1:-1], ";") if s]
    out = []
    for it in items:
        if it.startswith("("):
            out.append(as_point(split_top(it[1:-1], ",")))
        else:
            out.append(as_point(it))
    return out


def parse_certificate(text: str, beta=None) -> PorosityCertificate:
    """Resolve a certificate name; ``beta`` fills in for sets without a natural one."""
    text = text.strip()
    if text == "cantor":
        return cantor_certificate()
    if text.startswith("finite"):
        points = _braced_points(text[len("finite"):])
        if beta is None:
            raise ValueError("finite certificates need the game's beta")
        gaps = [dist(p, q) for p, q in itertools.combinations(points, 2)]
        r0 = min([Fraction(1)] + [g / 4 for g in gaps])
        return finite_certificate(points, beta, r0)
    if text.startswith("affine(") and text.endswith(")"):
        inner, scale, shift = split_top(text[len("affine("):-1], ";")
        return affine_certificate(parse_certificate(inner, beta), as_rational(scale), as_rational(shift))
    raise ValueError(f"unknown certificate {text!r}")


def parse_oracle(text: str) -> SetOracle:
    text = text.strip()
    if text.startswith("complement(") and text.endswith(")"):
        return ComplementOracle(parse_oracle(text[len("complement("):-1]))
    if text.startswith("union(") and text.endswith(")"):
        return UnionOracle([parse_oracle(t) for t in split_top(text[len("union("):-1], "|")])
    if text.startswith("cocountable"):
        rest = text[len("cocountable"):]
        if rest.startswith(":sb="):
            return CoCountableOracle([(p,) for p in stern_brocot(int(rest[4:]))], text)
        return CoCountableOracle(_braced_points(rest), text)
    if text.startswith("finite"):
        return FiniteSetOracle(_braced_points(text[len("finite"):]), text)
    return parse_certificate(text, beta=Fraction(1, 5)).oracle
