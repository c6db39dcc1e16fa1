"""Exact Diophantine kernels.

Continued fractions, Dirichlet approximation, simplest rationals in
intervals, and truncated estimators for the irrationality exponent and the
Lagrange function. Irrational quantities are carried as rational enclosures;
nothing here returns a bare float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

from mpmath import iv

from .metric import Point, as_point, as_rational, dist, format_rational


# ---------------------------------------------------------------------------
# certified rational enclosures

@dataclass(frozen=True)
class Enclosure:
    """A closed interval [lo, hi] with rational endpoints known to contain a value."""

    lo: Fraction
    hi: Fraction

    @classmethod
    def exact(cls, value) -> "Enclosure":
        v = as_rational(value)
        return cls(v, v)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi

    def within(self, target, tol) -> bool:
        """Every point of the enclosure lies within ``tol`` of ``target``."""
        return self.lo >= target - tol and self.hi <= target + tol

    def decimal(self, digits: int = 12) -> str:
        with localcontext() as ctx:
            ctx.prec = digits
            return str(Decimal(self.mid.numerator) / Decimal(self.mid.denominator))

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi), "approx": self.decimal()}


INFINITE = "+inf"  # irrationality exponent of a rational point


def _mpf_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    value = Fraction(int(man)) * (Fraction(2) ** exp)
    return -value if sign else value


def _to_iv(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _iv_enclosure(value) -> Enclosure:
    a, b = value._mpi_
    return Enclosure(_mpf_to_fraction(a), _mpf_to_fraction(b))


def log_enclosure(e: Enclosure, prec: int = 96) -> Enclosure:
    """Certified enclosure of log over a positive rational interval."""
    if e.lo <= 0:
        raise ValueError("log of a non-positive interval")
    old = iv.prec
    try:
        iv.prec = prec
        lo = iv.log(_to_iv(e.lo))
        hi = iv.log(_to_iv(e.hi))
        return Enclosure(_iv_enclosure(lo).lo, _iv_enclosure(hi).hi)
    finally:
        iv.prec = old


def iroot(n: int, k: int) -> int:
    """Largest integer m with m**k <= n (n >= 0)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    m = 1 << ((n.bit_length() + k - 1) // k)  # upper bound
    while True:
        nxt = ((k - 1) * m + n // m ** (k - 1)) // k
        if nxt >= m:
            break
        m = nxt
    while m ** k > n:
        m -= 1
    while (m + 1) ** k <= n:
        m += 1
    return m


def root_enclosure(value: Fraction, k: int, prec: int = 96) -> Enclosure:
    """Enclosure of the k-th root of a non-negative rational, width <= 2**-prec."""
    value = as_rational(value)
    if value < 0:
        raise ValueError("negative radicand")
    if k == 1:
        return Enclosure.exact(value)
    scale = 1 << (k * prec)
    m = iroot(value.numerator * scale // value.denominator, k)
    lo = Fraction(m, 1 << prec)
    hi = lo if lo ** k == value else Fraction(m + 1, 1 << prec)
    return Enclosure(lo, hi)


# ---------------------------------------------------------------------------
# real-number descriptors

class RealDescriptor:
    """A real number known exactly enough to expand and enclose."""

    def enclosure(self, prec: int) -> Enclosure:
        raise NotImplementedError

    def quotients(self) -> Iterator[int]:
        raise NotImplementedError

    @property
    def is_rational(self) -> bool:
        return False


@dataclass(frozen=True)
class RationalNumber(RealDescriptor):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))

    def enclosure(self, prec: int) -> Enclosure:
        return Enclosure.exact(self.value)

    def quotients(self):
        p, q = self.value.numerator, self.value.denominator
        while q:
            a, r = divmod(p, q)
            yield a
            p, q = q, r

    @property
    def is_rational(self):
        return True

    def __str__(self):
        return format_rational(self.value)


@dataclass(frozen=True)
class QuadraticIrrational(RealDescriptor):
    """The number (P + sqrt(D)) / Q with D > 0 not a perfect square."""

    P: int
    Q: int
    D: int

    def __post_init__(self):
        if self.Q == 0:
            raise ValueError("Q must be non-zero")
        if self.D <= 0 or math.isqrt(self.D) ** 2 == self.D:
            raise ValueError(f"D = {self.D} must be a positive non-square")

    def enclosure(self, prec: int) -> Enclosure:
        root = root_enclosure(Fraction(self.D), 2, prec + self.Q.bit_length() + 2)
        a = (self.P + root.lo) / self.Q
        b = (self.P + root.hi) / self.Q
        return Enclosure(min(a, b), max(a, b))

    def _normalized(self) -> Tuple[int, int, int]:
        P, Q, D = self.P, self.Q, self.D
        if (D - P * P) % Q:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        return P, Q, D

    def _states(self):
        P, Q, D = self._normalized()
        s = math.isqrt(D)
        while True:
            if Q > 0:
                a = (P + s) // Q
            else:
                a = -((P + s) // -Q) - 1
            yield (P, Q), a
            P = a * Q - P
            Q = (D - P * P) // Q

    def quotients(self):
        for _, a in self._states():
            yield a

    def periodic_expansion(self) -> Tuple[List[int], List[int]]:
        """(pre-period, period) of the eventually periodic expansion."""
        seen, quotients = {}, []
        for i, (state, a) in enumerate(self._states()):
            if state in seen:
                start = seen[state]
                return quotients[:start], quotients[start:]
            seen[state] = i
            quotients.append(a)
        raise AssertionError("unreachable")

    def __str__(self):
        return f"({self.P} + sqrt({self.D}))/{self.Q}"


class CFStream(RealDescriptor):
    """A real given by its partial quotients: a finite prefix followed by a
    repeating period, or a callable ``k -> a_k``."""

    def __init__(self, terms: Union[Sequence[int], Callable[[int], int]], period: Sequence[int] = ()):
        self.terms = terms
        self.period = tuple(period)
        if not callable(terms) and not self.period:
            raise ValueError("a finite quotient list is a rational; use RationalNumber or give a period")
        for k, a in zip(range(64), self.quotients()):
            if k > 0 and a < 1:
                raise ValueError("partial quotients after the first must be positive")

    def quotients(self):
        if callable(self.terms):
            k = 0
            while True:
                yield int(self.terms(k))
                k += 1
        yield from self.terms
        while True:
            yield from self.period

    def enclosure(self, prec: int) -> Enclosure:
        target = Fraction(1, 1 << prec)
        pm, qm = 0, 1  # p_{-2}, q_{-2}
        p_prev, q_prev = 1, 0
        for a in self.quotients():
            p, q = a * p_prev + pm, a * q_prev + qm
            if q_prev and Fraction(1, q * q_prev) <= target:
                x, y = Fraction(p_prev, q_prev), Fraction(p, q)
                return Enclosure(min(x, y), max(x, y))
            pm, qm, p_prev, q_prev = p_prev, q_prev, p, q
        raise AssertionError("unreachable")

    def __str__(self):
        if callable(self.terms):
            return "cf(<generator>)"
        return f"cf[{';'.join(map(str, self.terms))};({','.join(map(str, self.period))})]"


def golden() -> QuadraticIrrational:
    return QuadraticIrrational(1, 2, 5)


def sqrt_of(n: int) -> QuadraticIrrational:
    return QuadraticIrrational(0, 1, n)


def parse_real(spec: str) -> RealDescriptor:
    """Parse CLI descriptors: ``sqrt2``, ``golden``, ``22/7``, ``quad:P,Q,D``,
    ``cf:a0,a1,...;p1,p2`` (prefix;period)."""
    s = spec.strip()
    if s == "golden":
        return golden()
    if s.startswith("sqrt"):
        return sqrt_of(int(s[4:]))
    if s.startswith("quad:"):
        P, Q, D = (int(t) for t in s[5:].split(","))
        return QuadraticIrrational(P, Q, D)
    if s.startswith("cf:"):
        body = s[3:]
        prefix, _, period = body.partition(";")
        nums = [int(t) for t in prefix.split(",") if t]
        per = [int(t) for t in period.split(",") if t]
        return CFStream(nums, per) if per else RationalNumber(convergents(nums)[-1])
    return RationalNumber(as_rational(s))


# ---------------------------------------------------------------------------
# continued fractions

def continued_fraction(x: Union[RealDescriptor, Fraction, int, str], n: Optional[int] = None) -> List[int]:
    """Partial quotients a_0..a_n (the whole expansion for a rational if shorter)."""
    if not isinstance(x, RealDescriptor):
        x = RationalNumber(as_rational(x))
    if n is None and not x.is_rational:
        raise ValueError("an irrational expansion needs an explicit length n")
    out = []
    for a in x.quotients():
        if n is not None and len(out) > n:
            break
        out.append(a)
    return out


def convergents(quotients: Sequence[int]) -> List[Fraction]:
    out = []
    p_prev, q_prev, p, q = 0, 1, 1, 0  # seeds p_{-2}, q_{-2}, p_{-1}, q_{-1}
    for a in quotients:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append(Fraction(p, q))
    return out


def convergents_upto(x: RealDescriptor, qmax: int) -> List[Fraction]:
    """Convergents of x with denominator <= qmax."""
    out = []
    p_prev, q_prev, p, q = 0, 1, 1, 0
    for a in x.quotients():
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        if q > qmax:
            break
        out.append(Fraction(p, q))
    return out


def stern_brocot(count: int, lo=Fraction(0), hi=Fraction(1)) -> List[Fraction]:
    """Breadth-first Stern-Brocot enumeration of the rationals in [lo, hi].

    With the default bounds this is 0, 1, 1/2, 1/3, 2/3, 1/4, 2/5, 3/5, 3/4, ...
    """
    out = [Fraction(lo), Fraction(hi)][:count]
    level = [(Fraction(lo), Fraction(hi))]
    while len(out) < count:
        nxt = []
        for a, b in level:
            m = Fraction(a.numerator + b.numerator, a.denominator + b.denominator)
            if len(out) < count:
                out.append(m)
            nxt += [(a, m), (m, b)]
        level = nxt
    return out


def _first_int(a: Fraction, a_open: bool) -> int:
    n = -((-a.numerator) // a.denominator)
    if a_open and n == a:
        n += 1
    return n


def simplest_in(a: Fraction, b: Optional[Fraction], a_open: bool = False, b_open: bool = False) -> Optional[Fraction]:
    """A rational of least denominator in the interval from a to b.

    ``b=None`` means +infinity. Returns None for an empty interval.
    """
    a = Fraction(a)
    if b is not None:
        b = Fraction(b)
        if a > b or (a == b and (a_open or b_open)):
            return None
    quotients = []
    for _ in range(1_000_000):
        n = _first_int(a, a_open)
        if b is None or n < b or (n == b and not b_open):
            quotients.append(n)
            break
        f = a.numerator // a.denominator  # floor; the interval sits in [f, f+1]
        quotients.append(f)
        fa, fb = a - f, b - f
        # t -> 1/t reverses order; a zero fractional part maps to +infinity
        a, b, a_open, b_open = (1 / fb, (1 / fa) if fa else None, b_open, a_open)
    else:  # pragma: no cover
        raise RuntimeError("simplest_in did not terminate")
    value = Fraction(quotients[-1])
    for q in reversed(quotients[:-1]):
        value = q + 1 / value
    return value


def min_denominator_at_least(a: Fraction, b: Fraction, lo: int) -> Optional[int]:
    """Least q >= lo such that some p/q in lowest terms lies in [a, b]."""
    a, b = Fraction(a), Fraction(b)
    if (b - a) * lo >= 1:
        # wide window: try denominators directly before splitting
        for q in range(lo, lo + 64):
            first, last = -((-a * q).__floor__()), (b * q).__floor__()
            for p in range(first, min(last, first + 64) + 1):
                if math.gcd(p, q) == 1:
                    return q
    best = None
    stack = [(Fraction(a), Fraction(b), False, False)]
    while stack:
        x, y, xo, yo = stack.pop()
        s = simplest_in(x, y, xo, yo)
        if s is None:
            continue
        if s.denominator >= lo:
            if best is None or s.denominator < best:
                best = s.denominator
            continue
        stack.append((x, s, xo, True))
        stack.append((s, y, True, yo))
    if best is None:
        # every rational of denominator < lo was split off; multiples reach lo
        raise AssertionError("non-degenerate interval always has rationals of large denominator")
    return best


def rationals_in(a: Fraction, b: Fraction, qmax: int) -> List[Fraction]:
    """All rationals in [a, b] with denominator at most ``qmax``, sorted."""
    out = []
    stack = [(Fraction(a), Fraction(b), False, False)]
    while stack:
        x, y, xo, yo = stack.pop()
        s = simplest_in(x, y, xo, yo)
        if s is None or s.denominator > qmax:
            continue
        out.append(s)
        stack.append((x, s, xo, True))
        stack.append((s, y, True, yo))
    return sorted(out)


# ---------------------------------------------------------------------------
# Dirichlet approximation

@dataclass(frozen=True)
class BestApproximation:
    p: Tuple[int, ...]
    q: int
    err: Fraction

    @property
    def point(self) -> Point:
        return tuple(Fraction(pi, self.q) for pi in self.p)


def _round_half_up(v: Fraction) -> int:
    return math.floor(v + Fraction(1, 2))


def nearest_numerators(x: Point, q: int) -> Tuple[int, ...]:
    return tuple(_round_half_up(q * c) for c in x)


def dirichlet_bound_holds(x: Point, approx: BestApproximation, Q: int) -> bool:
    """The guarantee ``||x - p/q|| <= 1/(q Q^(1/d))`` in the form (q err)^d <= 1/Q."""
    d = len(x)
    return Q * (approx.q * approx.err) ** d <= 1


def dirichlet_approx(x, Q: int) -> BestApproximation:
    """A rational point p/q with q <= Q meeting Dirichlet's bound.

    Returns the q <= Q minimizing ``||q x - p||`` (the smallest such q on ties),
    which is what the pigeonhole bound controls.
    """
    x = as_point(x)
    if Q < 1:
        raise ValueError("Q must be at least 1")
    d = len(x)
    if d == 1:
        conv = convergents_upto(RationalNumber(x[0]), Q)
        c = conv[-1]
        best = BestApproximation((c.numerator,), c.denominator, abs(x[0] - c))
    else:
        best = None
        for q in range(1, Q + 1):
            p = nearest_numerators(x, q)
            err = dist(x, tuple(Fraction(pi, q) for pi in p))
            if best is None or q * err < best.q * best.err:
                best = BestApproximation(p, q, err)
                if err == 0:
                    break
    assert dirichlet_bound_holds(x, best, Q), (x, best, Q)
    return best


# ---------------------------------------------------------------------------
# estimators

def _as_real_vector(x) -> List[RealDescriptor]:
    if isinstance(x, RealDescriptor):
        return [x]
    if isinstance(x, (Fraction, int, str)):
        return [RationalNumber(as_rational(x))]
    out = []
    for c in x:
        out.append(c if isinstance(c, RealDescriptor) else RationalNumber(as_rational(c)))
    return out


def _rational_value(xs: List[RealDescriptor]) -> Optional[Point]:
    if all(c.is_rational for c in xs):
        return tuple(c.value for c in xs)
    return None


def best_approximations(x, qmax: int) -> List[BestApproximation]:
    """Successive best approximations with q <= qmax.

    For d = 1 these are the continued-fraction convergents; for d >= 2 the
    record-breaking nearest lattice points found by scanning q = 1..qmax.
    """
    xs = _as_real_vector(x)
    if len(xs) == 1:
        out = []
        for c in convergents_upto(xs[0], qmax):
            out.append(BestApproximation((c.numerator,), c.denominator, None))
        return out
    # d >= 2: work from a tight enclosure of each coordinate
    prec = 4 * qmax.bit_length() + 64
    mids = tuple(c.enclosure(prec).mid for c in xs)
    out, best = [], None
    for q in range(1, qmax + 1):
        p = nearest_numerators(mids, q)
        err = dist(mids, tuple(Fraction(pi, q) for pi in p))
        if best is None or err < best:
            best = err
            out.append(BestApproximation(p, q, None))
    return out


def error_enclosure(x, approx: BestApproximation, prec: Optional[int] = None) -> Enclosure:
    """Certified enclosure of the sup-norm error ``||x - p/q||``."""
    xs = _as_real_vector(x)
    if prec is None:
        prec = 3 * approx.q.bit_length() + 64
    los, his = [], []
    for c, pi in zip(xs, approx.p):
        e = c.enclosure(prec)
        target = Fraction(pi, approx.q)
        a, b = e.lo - target, e.hi - target
        if a <= 0 <= b:
            lo_abs = Fraction(0)
        else:
            lo_abs = min(abs(a), abs(b))
        los.append(lo_abs)
        his.append(max(abs(a), abs(b)))
    return Enclosure(max(los), max(his))


def _exact_hit(xs, qmax) -> bool:
    point = _rational_value(xs)
    if point is None:
        return False
    den = math.lcm(*(c.denominator for c in point))
    return den <= qmax


def omega_estimate(x, Qmax: int, q_from: int = 10, prec: int = 96):
    """Two-scale estimate of the irrationality exponent.

    Takes best approximations with ``q_from <= q <= Qmax`` and returns the
    largest secant slope ``log(err_j / err_k) / log(q_k / q_j)`` over pairs
    with ``q_k >= q_j**2``, which cancels the constant in ``err ~ C q^-w``.
    Monotone nondecreasing in Qmax. Returns ``INFINITE`` at rational points
    hit exactly and None when no admissible pair exists yet.
    """
    xs = _as_real_vector(x)
    if _exact_hit(xs, Qmax):
        return INFINITE
    approx = [a for a in best_approximations(xs, Qmax) if a.q >= q_from]
    logs = []
    for a in approx:
        err = error_enclosure(xs, a)
        if err.lo <= 0:
            err = error_enclosure(xs, a, prec=8 * a.q.bit_length() + 256)
            if err.lo <= 0:
                raise ArithmeticError("precision exhausted separating x from p/q")
        logs.append((log_enclosure(Enclosure.exact(a.q), prec), log_enclosure(err, prec), a.q))
    best = None
    for j, (lqj, lej, qj) in enumerate(logs):
        for lqk, lek, qk in logs[j + 1:]:
            if qk < qj * qj:
                continue
            num = Enclosure(lej.lo - lek.hi, lej.hi - lek.lo)
            den = Enclosure(lqk.lo - lqj.hi, lqk.hi - lqj.lo)
            cands = [num.lo / den.lo, num.lo / den.hi, num.hi / den.lo, num.hi / den.hi]
            slope = Enclosure(min(cands), max(cands))
            # max of enclosed values is enclosed by the endpoint-wise max
            best = slope if best is None else Enclosure(max(best.lo, slope.lo), max(best.hi, slope.hi))
    return best


def omega_ratios(x, Qmax: int, prec: int = 96) -> List[Tuple[int, Enclosure]]:
    """The raw ratios ``-log ||x - p/q|| / log q`` along best approximations (q >= 2)."""
    xs = _as_real_vector(x)
    out = []
    for a in best_approximations(xs, Qmax):
        if a.q < 2:
            continue
        err = error_enclosure(xs, a)
        if err.hi == 0:
            continue
        le = log_enclosure(err, prec) if err.lo > 0 else None
        lq = log_enclosure(Enclosure.exact(a.q), prec)
        if le is None:
            continue
        out.append((a.q, Enclosure(-le.hi / lq.hi, -le.lo / lq.lo)))
    return out


def lagrange_estimate(x, Qmax: int, q_from: int = 10, prec: int = 96):
    """Upper estimate of liminf q^(1+1/d) ||x - p/q|| over q_from <= q <= Qmax.

    Returns an Enclosure (exactly 0 at rational points whose denominator is at
    most Qmax) or None if no best approximation lies in the window.
    Monotone nonincreasing in Qmax.
    """
    xs = _as_real_vector(x)
    d = len(xs)
    if _exact_hit(xs, Qmax):
        return Enclosure.exact(0)
    best = None
    for a in best_approximations(xs, Qmax):
        if a.q < q_from:
            continue
        err = error_enclosure(xs, a)
        # (q^(d+1) err^d)^(1/d)
        lo = root_enclosure(Fraction(a.q) ** (d + 1) * err.lo ** d, d, prec).lo
        hi = root_enclosure(Fraction(a.q) ** (d + 1) * err.hi ** d, d, prec).hi
        if best is None:
            best = Enclosure(lo, hi)
        else:
            best = Enclosure(min(best.lo, lo), min(best.hi, hi))
    return best


@dataclass(frozen=True)
class PsiFunction:
    """psi(q) = c * q^(-a) with rational c > 0 and a > 0."""

    c: Fraction
    a: Fraction
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "c", as_rational(self.c))
        object.__setattr__(self, "a", as_rational(self.a))
        if self.c <= 0 or self.a <= 0:
            raise ValueError("psi needs c > 0 and a > 0")

    @property
    def decays_fast_enough(self) -> bool:
        """q^(1+1/d) psi(q) -> 0."""
        return self.a > 1 + Fraction(1, self.dim)

    def __call__(self, q: int) -> Fraction:
        if self.a.denominator != 1:
            raise ValueError(f"psi(q) = {self.c}*q^-{self.a} is not rational for integer q")
        return self.c / Fraction(q) ** int(self.a)

    def compare(self, t: Fraction, q: int, k: Fraction = Fraction(1)) -> int:
        """Sign of ``t - k * psi(q)`` for t >= 0, decided exactly."""
        if t <= 0:
            return -1 if k > 0 else 0
        u, v = self.a.numerator, self.a.denominator
        lhs = (t / (k * self.c)) ** v * Fraction(q) ** u
        return (lhs > 1) - (lhs < 1)

    def leq(self, t: Fraction, q: int, k: Fraction = Fraction(1)) -> bool:
        """Exact test ``t <= k * psi(q)``."""
        return self.compare(t, q, k) <= 0

    def ratio(self, t: Fraction, q: int) -> Enclosure:
        """Enclosure of ``t / psi(q)``."""
        u, v = self.a.numerator, self.a.denominator
        return root_enclosure((t / self.c) ** v * Fraction(q) ** u, v)

    @classmethod
    def parse(cls, text: str, dim: int = 1) -> "PsiFunction":
        """Parse ``c*q^-a`` (``q^-3``, ``2*q^-5/2``)."""
        s = text.replace(" ", "")
        c, _, rest = s.rpartition("q^-")
        if not _:
            raise ValueError(f"cannot parse psi {text!r}; expected 'c*q^-a'")
        c = c.rstrip("*") or "1"
        return cls(as_rational(c), as_rational(rest), dim)

    def __str__(self):
        return f"{format_rational(self.c)}*q^-{format_rational(self.a)}"


@dataclass
class SMembershipReport:
    min_ratio: Optional[Enclosure]
    min_ratio_q: Optional[int]
    witnesses: List[int]
    cap: Fraction
    violations: List[int]

    @property
    def witness_count(self) -> int:
        return len(self.witnesses)


def s_membership_diagnostic(x_hat, psi: PsiFunction, Qmax: int, beta, q_from: int = 1,
                            radius=Fraction(0), candidates: Sequence = ()) -> SMembershipReport:
    """Ratios ``||x - p/q|| / psi(q)`` at the nearest p for each q in [q_from, Qmax].

    Only reduced fractions count: 2/4 is the rational 1/2 of denominator 2.

    ``candidates`` adds explicit rational points (e.g. those a strategy aimed
    at) whatever their denominator. Witnesses are the denominators whose ratio
    is at most ``1 + 6/beta``; violations are q whose ratio, even after
    subtracting the ball ``radius``, is below 1.
    """
    x_hat = as_point(x_hat)
    beta = as_rational(beta)
    radius = as_rational(radius)
    cap = 1 + 6 / beta
    pts = {}
    for q in range(max(1, q_from), Qmax + 1):
        p = nearest_numerators(x_hat, q)
        pts[(p, q)] = None
    for c in candidates:
        c = as_point(c)
        q = math.lcm(*(v.denominator for v in c))
        pts[(tuple(int(v * q) for v in c), q)] = None
    best, best_q, witnesses, violations = None, None, set(), []
    for p, q in pts:
        if math.gcd(q, *p) != 1:
            continue  # p/q is a rational of smaller denominator
        err = dist(x_hat, tuple(Fraction(pi, q) for pi in p))
        if psi.leq(err, q, cap):
            witnesses.add(q)
        if q_from <= q <= Qmax:
            r = psi.ratio(err, q)
            if best is None or r.lo < best.lo:
                best, best_q = r, q
            if psi.compare(err + radius, q) < 0:
                # the whole final ball sits inside B(p/q, psi(q))
                violations.append(q)
    return SMembershipReport(best, best_q, sorted(witnesses), cap, sorted(set(violations)))
