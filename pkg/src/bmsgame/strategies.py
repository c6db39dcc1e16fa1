"""Executable strategies for both players.

Alice: concentric dummy play, porosity avoidance for BMS, enumeration for
BMM, and the Dirichlet-based approach strategy for WA_d(eps). Bob: a seeded
random opponent and the good-ball strategy that steers the limit point into
the set S = {0 < liminf ||x - p/q|| / psi(q) < inf}.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .diophantine import (
    PsiFunction,
    dirichlet_approx,
    iroot,
    min_denominator_at_least,
    rationals_in,
    simplest_in,
    stern_brocot,
)
from .game import (
    ABSOLUTE,
    ALICE,
    BANACH_MAZUR,
    BMM,
    BMS,
    BOB,
    SCHMIDT,
    Game,
    Strategy,
    bmm_bob_reply,
)
from .metric import (
    FormalBall,
    Point,
    as_point,
    as_rational,
    dist,
    formally_disjoint,
    shrink_leq,
)
from .porosity import (
    CoCountableOracle,
    ComplementOracle,
    PorosityCertificate,
    UnionOracle,
    _braced_points,
    parse_certificate,
    split_top,
)

log = logging.getLogger(__name__)


class StrategyError(RuntimeError):
    """A strategy's hypotheses failed at run time (e.g. Q0 chosen too small)."""


def _concentric(game: Game, b: FormalBall) -> FormalBall:
    if game.kind == SCHMIDT:
        return b.scaled(game.alpha)
    if game.kind == BANACH_MAZUR:
        return b.scaled(Fraction(1, 2))
    return b.scaled(game.beta)


class AliceDummy(Strategy):
    """Concentric contraction of Bob's last ball by the game's Alice ratio."""

    name = "dummy"

    def next_move(self, state):
        return _concentric(state.game, state.last(BOB))


def alice_dummy() -> AliceDummy:
    return AliceDummy()


class AliceRandom(Strategy):
    """Seeded random Alice: a legal ball on a grid of centers.

    With ``seek_rationals`` the center is instead the simplest rational of the
    legal center region, the hardest input for Bob's hyperplane step.
    """

    def __init__(self, seed: int = 0, grid: int = 8, seek_rationals: bool = False):
        self.seed = seed
        self.rng = random.Random(seed)
        self.grid = grid
        self.seek_rationals = seek_rationals
        self.name = ("seeker" if seek_rationals else "alice-random") + f":seed={seed}"

    def next_move(self, state):
        game = state.game
        bob = state.last(BOB)
        if game.kind in (BMM, ABSOLUTE):
            r = game.beta * bob.radius / self.rng.randint(1, 2)
            c = tuple(x + Fraction(self.rng.randint(-self.grid, self.grid), self.grid) * bob.radius
                      for x in bob.center)
            return FormalBall(c, r)
        r = _concentric(game, bob).radius
        if game.kind == BANACH_MAZUR:
            r = bob.radius / 2 ** self.rng.randint(1, 3)
        room = bob.radius - r
        if self.seek_rationals:
            c = []
            for x in bob.center:
                lo, hi = x - room, x + room
                # random sub-window, so seeds differ
                k = self.rng.randint(0, self.grid - 1)
                w = (hi - lo) / self.grid
                c.append(simplest_in(lo + k * w, lo + (k + 1) * w))
            return FormalBall(tuple(c), r)
        c = tuple(x + Fraction(self.rng.randint(-self.grid, self.grid), self.grid) * room for x in bob.center)
        return FormalBall(c, r)


class BobRandom(Strategy):
    """Seeded random Bob: grid centers inside the legal region, radii from a
    geometric ladder ``r * 2^-j``."""

    def __init__(self, seed: int = 0, grid: int = 8, ladder: int = 4, random_opening: bool = False):
        self.seed = seed
        self.rng = random.Random(seed)
        self.grid = grid
        self.ladder = ladder
        self.random_opening = random_opening
        self.name = f"random:seed={seed}"

    def opening(self, game):
        if not self.random_opening:
            return game.default_opening()
        center = tuple(Fraction(self.rng.randint(-self.grid, self.grid), self.grid) for _ in range(game.dim))
        return FormalBall(center, Fraction(1))

    def _center_in(self, b: FormalBall, s: Fraction) -> Point:
        slack = b.radius - s
        return tuple(c + Fraction(self.rng.randint(-self.grid, self.grid), self.grid) * slack for c in b.center)

    def next_move(self, state):
        game = state.game
        alice = state.last(ALICE)
        if game.kind == SCHMIDT:
            s = game.beta * alice.radius
            return FormalBall(self._center_in(alice, s), s)
        if game.kind in (BMS, BANACH_MAZUR):
            s = alice.radius / 2 ** self.rng.randint(1, self.ladder)
            return FormalBall(self._center_in(alice, s), s)
        # BMM / absolute: inside own last ball, formally disjoint from Alice's
        own = state.last(BOB)
        js = list(range(1, self.ladder + 1))
        self.rng.shuffle(js)
        for j in js:
            s = own.radius / 2 ** j
            if game.kind == ABSOLUTE and s < game.beta * own.radius:
                continue
            slack = own.radius - s
            axes = [[c + Fraction(k, self.grid) * slack for k in range(-self.grid, self.grid + 1)] for c in own.center]
            options = [FormalBall(p, s) for p in itertools.product(*axes)]
            options = [o for o in options if formally_disjoint(alice, o)]
            if options:
                return self.rng.choice(options)
        return bmm_bob_reply(state)


def bob_random(seed: int = 0, **kwargs) -> BobRandom:
    return BobRandom(seed, **kwargs)


@dataclass
class Avoidance:
    target: str
    hole: FormalBall
    move_index: int
    cleared_at: Optional[int] = None


class AlicePorosity(Strategy):
    """BMS avoidance of a countable union of uniformly porous sets.

    For each certificate in turn: dummy moves until Bob's radius is at most
    its r0, then the witness hole B(y, beta*r), then one clearing move whose
    closed ball lies in the open hole, so the limit point misses the set.
    """

    def __init__(self, certs: Sequence[PorosityCertificate]):
        self.certs = list(certs)
        self.index = 0
        self.pending: Optional[Avoidance] = None
        self.avoided: List[Avoidance] = []
        self.flagged: List[str] = []
        self.name = "porosity:" + ("+".join(c.name for c in self.certs) or "none")

    def target_oracle(self):
        return ComplementOracle(UnionOracle([c.oracle for c in self.certs]))

    def next_move(self, state):
        game = state.game
        if game.kind != BMS:
            raise ValueError("porosity avoidance is a BMS strategy")
        bob = state.last(BOB)
        x, r = bob.center, bob.radius
        beta = game.beta
        if self.pending is not None:
            hole = self.pending.hole
            move = FormalBall(x, beta * r)
            # concentric is enough: beta*r_+ < r_+ and r_+ + d(x_+, y) <= beta*r
            if not move.radius + dist(move.center, hole.center) < hole.radius:
                raise StrategyError(f"clearing move {move} does not sit inside the open hole {hole}")
            self.pending.cleared_at = state.alice_moves
            self.avoided.append(self.pending)
            self.pending = None
            self.index += 1
            return move
        if self.index >= len(self.certs):
            return FormalBall(x, beta * r)
        cert = self.certs[self.index]
        if cert.beta != beta:
            raise ValueError(f"certificate {cert.name} has beta {cert.beta}, game has {beta}")
        if r > cert.r0:
            return FormalBall(x, beta * r)
        try:
            y = as_point(cert.witness(x, r))
        except Exception as exc:
            log.warning("witness for %s failed on %s: %s", cert.name, bob, exc)
            self.flagged.append(cert.name)
            return None
        hole = FormalBall(y, beta * r)
        if not shrink_leq(hole, bob) or cert.oracle.ball_disjoint(hole, open_ball=True) is not True:
            log.warning("certificate %s produced an invalid hole %s in %s", cert.name, hole, bob)
            self.flagged.append(cert.name)
            return None
        self.pending = Avoidance(cert.name, hole, state.alice_moves)
        return hole


def alice_bms_porosity(certs: Sequence[PorosityCertificate]) -> AlicePorosity:
    return AlicePorosity(certs)


def intersect_strategies(cert_lists: Sequence[Sequence[PorosityCertificate]]) -> AlicePorosity:
    """Avoid every set of every list, interleaving the lists diagonally."""
    betas = {c.beta for certs in cert_lists for c in certs}
    if len(betas) > 1:
        raise ValueError(f"mixed beta values {sorted(betas)}")
    merged, seen = [], set()
    longest = max((len(c) for c in cert_lists), default=0)
    for k in range(longest + len(cert_lists)):
        for i, certs in enumerate(cert_lists):
            j = k - i
            if 0 <= j < len(certs) and certs[j].name not in seen:
                seen.add(certs[j].name)
                merged.append(certs[j])
    return AlicePorosity(merged)


class AliceEnumeration(Strategy):
    """BMM: Alice's n-th move deletes the n-th enumerated point."""

    def __init__(self, points: Sequence):
        self.points = [as_point(p) for p in points]
        self.played: List[FormalBall] = []
        self.name = f"enum[{len(self.points)}]"

    def target_oracle(self):
        dim = len(self.points[0]) if self.points else 1
        return CoCountableOracle(self.points, "enumerated", dim)

    def next_move(self, state):
        game = state.game
        if game.kind not in (BMM, ABSOLUTE):
            raise ValueError("enumeration is a BMM strategy")
        bob = state.last(BOB)
        n = state.alice_moves
        r = game.beta * bob.radius
        if n < len(self.points):
            move = FormalBall(self.points[n], r)
        else:
            # list exhausted: delete a ball outside Bob's, constraining nothing
            c = list(bob.center)
            c[0] += 2 * bob.radius + r
            move = FormalBall(tuple(c), r)
        self.played.append(move)
        return move


def alice_bmm_enumeration(points: Sequence) -> AliceEnumeration:
    return AliceEnumeration(points)


# ---------------------------------------------------------------------------
# approach strategy for WA_d(eps)

APPROACH, SEPARATE, WAIT = "approach", "separate", "wait"


@dataclass
class Approach:
    point: Point
    q: int
    case: int
    ball: FormalBall  # a ball of the play already inside B(p/q, eps/q^(1+1/d))
    move_index: int


def wa_beta(epsilon, d: int) -> Fraction:
    return (as_rational(epsilon) / 3) ** (d + 1)


def inside_wa_ball(b: FormalBall, p: Point, q: int, epsilon: Fraction) -> bool:
    """``B subset B(p/q, eps / q^(1+1/d))`` decided exactly."""
    d = len(p)
    t = b.radius + dist(b.center, p)
    return t ** d * Fraction(q) ** (d + 1) <= epsilon ** d


class AliceWA(Strategy):
    """Approach a rational, step off it, wait, repeat.

    Each approach leaves every later ball inside B(p/q, eps/q^(1+1/d)), so the
    limit point has L(x) <= eps. ``wait_exponent`` is the exponent of 3/eps in
    the waiting threshold (default d).
    """

    def __init__(self, epsilon, d: int, wait_exponent: Optional[int] = None):
        self.epsilon = as_rational(epsilon)
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        self.d = d
        self.beta = wa_beta(self.epsilon, d)
        self.w = d if wait_exponent is None else wait_exponent
        self.stage = APPROACH
        self.approaches: List[Approach] = []
        self.stalls = 0
        self.name = f"wa:eps={self.epsilon},d={d}"

    def _check(self, state):
        game = state.game
        if game.kind != BMS or game.dim != self.d:
            raise ValueError(f"{self.name} plays BMS in dimension {self.d}")
        if game.beta != self.beta:
            raise ValueError(f"{self.name} needs beta = (eps/3)^(d+1) = {self.beta}, game has {game.beta}")

    def _dirichlet_Q(self, r: Fraction) -> int:
        # largest integer Q with r <= 2(3/eps)^d / Q^(1+1/d)
        X = 2 * (3 / self.epsilon) ** self.d / r
        v = X ** self.d
        return max(1, iroot(v.numerator // v.denominator, self.d + 1))

    def _approach(self, state, bob: FormalBall) -> FormalBall:
        x, r = bob.center, bob.radius
        Q = self._dirichlet_Q(r)
        best = dirichlet_approx(x, Q)
        p, q, err = best.point, best.q, best.err
        beta = self.beta
        if any(a.point == p for a in self.approaches):
            self.stalls += 1
            return FormalBall(x, beta * r)
        if err <= r / 2:
            move = FormalBall(p, beta * r)
            if not inside_wa_ball(move, p, q, self.epsilon):
                raise StrategyError(f"case 1 bound failed at {p} (q={q}, Q={Q})")
            self.approaches.append(Approach(p, q, 1, move, state.alice_moves))
        elif inside_wa_ball(bob, p, q, self.epsilon):
            move = FormalBall(x, beta * r)
            self.approaches.append(Approach(p, q, 2, bob, state.alice_moves))
        else:
            # rounding Q down can lose the case-2 slack; wait for a smaller ball
            self.stalls += 1
            return FormalBall(x, beta * r)
        self.stage = SEPARATE
        return move

    def next_move(self, state):
        self._check(state)
        bob = state.last(BOB)
        x, r = bob.center, bob.radius
        beta = self.beta
        if self.stage == SEPARATE:
            p = self.approaches[-1].point
            i = max(range(self.d), key=lambda j: abs(x[j] - p[j]))
            sign = 1 if x[i] >= p[i] else -1
            c = list(x)
            c[i] += sign * (1 - beta) * r
            move = FormalBall(tuple(c), beta * r)
            if not dist(move.center, p) > move.radius:
                raise StrategyError("separation move failed to exclude the rational point")
            self.stage = WAIT
            return move
        if self.stage == WAIT:
            last = self.approaches[-1]
            delta = dist(x, last.point) - r
            threshold = 2 * (3 / self.epsilon) ** self.w * (last.q * delta) ** (self.d + 1)
            if not r < threshold:
                return FormalBall(x, beta * r)
            self.stage = APPROACH
        return self._approach(state, bob)


def alice_wa(epsilon, d: int, wait_exponent: Optional[int] = None) -> AliceWA:
    return AliceWA(epsilon, d, wait_exponent)


# ---------------------------------------------------------------------------
# Bob's good-ball strategy

def default_cd_power(d: int) -> Fraction:
    """c_d^(d+1) for the hyperplane constant c_d = 4^(-d/(d+1)): rationals p/q with
    q^(d+1) r^d < c_d^(d+1) inside a ball of radius r lie on one affine hyperplane."""
    return Fraction(1, 4 ** d)


def auto_q0(psi: PsiFunction, beta, d: int, cd_power: Optional[Fraction] = None) -> int:
    """Smallest Q0 making B(0,1) good and forcing s < r/3 at every scale r <= 1.

    With psi(q) = c q^-a and the hyperplane threshold q >= c_d r^(-d/(d+1)), both
    requirements reduce to ``9c/beta * c_d^(-(d+1)/d) < Q0^(a - (d+1)/d)`` plus
    ``psi(Q0) <= 1/3``.
    """
    beta = as_rational(beta)
    K = default_cd_power(d) if cd_power is None else as_rational(cd_power)
    u, v = psi.a.numerator, psi.a.denominator
    E = u * d - v * (d + 1)
    if E <= 0:
        raise ValueError(f"psi = {psi} violates q^(1+1/d) psi(q) -> 0")
    lhs = (9 * psi.c / beta) ** (v * d) / K ** v

    def ok(Q0):
        return lhs < Fraction(Q0) ** E and psi.compare(Fraction(1, 3), Q0) >= 0

    hi = 1
    while not ok(hi):
        hi *= 2
    lo = hi // 2 + 1 if hi > 1 else 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return hi


@dataclass
class BobRound:
    alice: FormalBall
    small_rationals: List[Point]
    x_tilde: FormalBall
    p0: Point
    q0: int
    s: Fraction
    ball: FormalBall


class BobS(Strategy):
    """Bob answers each (good) Alice ball with a good ball near a rational.

    Every answer B(y, s) lies in Alice's ball, touches B(p0/q0, psi(q0)) for
    the least admissible q0, and has s = 3 psi(q0) / beta, so B sits inside
    B(p0/q0, (1 + 6/beta) psi(q0)) and any legal Alice reply is again good.
    """

    def __init__(self, psi: PsiFunction, beta, Q0="auto", cd_power: Optional[Fraction] = None,
                 q_cap: int = 10 ** 7):
        if psi.a.denominator != 1:
            raise ValueError("Bob's radii are rational only for integer decay exponents a")
        if not psi.decays_fast_enough:
            raise ValueError(f"psi = {psi} needs q^(1+1/d) psi(q) -> 0")
        self.psi = psi
        self.beta = as_rational(beta)
        self.d = psi.dim
        self.cd_power = default_cd_power(self.d) if cd_power is None else as_rational(cd_power)
        self.Q0 = auto_q0(psi, self.beta, self.d, self.cd_power) if Q0 in ("auto", None) else int(Q0)
        self.q_cap = q_cap
        self.rounds: List[BobRound] = []
        self.name = f"bob-s:psi={psi},Q0={self.Q0}"

    def opening(self, game):
        self._check(game)
        return self.respond(FormalBall((Fraction(0),) * self.d, Fraction(1)))

    def _check(self, game):
        if game.kind != BMS or game.beta != self.beta or game.dim != self.d:
            raise ValueError(f"{self.name} plays BMS(beta={self.beta}) in dimension {self.d}")

    def next_move(self, state):
        self._check(state.game)
        return self.respond(state.last(ALICE))

    # -- Claim-1 construction -------------------------------------------------

    def below_simplex_threshold(self, q: int, r: Fraction) -> bool:
        """q < c_d r^(-d/(d+1)), i.e. q^(d+1) r^d < c_d^(d+1)."""
        return Fraction(q) ** (self.d + 1) * r ** self.d < self.cd_power

    def small_rationals(self, x: Point, r: Fraction) -> List[Point]:
        """Rational points in B(x, 2r) below the hyperplane denominator threshold."""
        if self.d == 1:
            s = simplest_in(x[0] - 2 * r, x[0] + 2 * r)
            if self.below_simplex_threshold(s.denominator, r):
                return [(s,)]
            return []
        out = []
        q = 1
        while self.below_simplex_threshold(q, r):
            axes = [range(math.ceil(q * (c - 2 * r)), math.floor(q * (c + 2 * r)) + 1) for c in x]
            for p in itertools.product(*axes):
                pt = tuple(Fraction(pi, q) for pi in p)
                if pt not in out:
                    out.append(pt)
            q += 1
        if not _in_hyperplane(out, self.d):
            raise StrategyError("small-denominator rationals are not cohyperplanar; c_d is miscalibrated")
        return out

    def pick_subball(self, alice: FormalBall, small: List[Point]) -> FormalBall:
        x, r = alice.center, alice.radius
        rho = r / 3
        if not small:
            return FormalBall(x, rho)
        best, best_gap = None, None
        for v in itertools.product((0, -1, 1), repeat=self.d):
            c = tuple(xi + vi * 2 * rho for xi, vi in zip(x, v))
            gap = min(dist(c, p) for p in small)
            if best_gap is None or gap > best_gap:
                best, best_gap = c, gap
        if best_gap < 2 * rho:
            raise StrategyError("no sub-ball of radius r/3 avoids the small-rational hyperplane")
        return FormalBall(best, rho)

    def least_rational(self, sub: FormalBall) -> Tuple[Point, int]:
        """Least q >= Q0 with B(p/q, psi(q)) meeting ``sub``, p/q in lowest terms;
        ties broken lexicographically."""
        xt, rho = sub.center, sub.radius
        psi = self.psi
        if self.d == 1:
            lo = self.Q0
            while True:
                # any admissible q has psi(q) <= psi(lo), so this window suffices
                slack = rho + psi(lo)
                q = min_denominator_at_least(xt[0] - slack, xt[0] + slack, lo)
                reach = rho + psi(q)
                ps = range(math.ceil(q * (xt[0] - reach)), math.floor(q * (xt[0] + reach)) + 1)
                for p in ps:
                    if math.gcd(p, q) == 1:
                        return (Fraction(p, q),), q
                lo = q + 1
        for q in range(self.Q0, self.q_cap + 1):
            reach = rho + psi(q)
            axes = [range(math.ceil(q * (c - reach)), math.floor(q * (c + reach)) + 1) for c in xt]
            for p in itertools.product(*axes):
                if math.gcd(q, *p) == 1:
                    return tuple(Fraction(pi, q) for pi in p), q
        raise StrategyError(f"no admissible rational below q_cap={self.q_cap}")

    def respond(self, alice: FormalBall) -> FormalBall:
        x, r = alice.center, alice.radius
        small = self.small_rationals(x, r)
        sub = self.pick_subball(alice, small)
        p0, q0 = self.least_rational(sub)
        s = 3 * self.psi(q0) / self.beta
        if not s < r / 3:
            raise StrategyError(f"s = {s} >= r/3 = {r / 3}: Q0 = {self.Q0} is too small")
        y = self._touching_center(sub, s, p0, s + self.psi(q0))
        ball = FormalBall(y, s)
        assert shrink_leq(ball, sub)
        assert dist(y, p0) <= s + self.psi(q0)
        self.rounds.append(BobRound(alice, small, sub, p0, q0, s, ball))
        return ball

    @staticmethod
    def _touching_center(sub: FormalBall, s: Fraction, p0: Point, reach: Fraction) -> Point:
        """A center y with B(y, s) inside ``sub`` and d(y, p0) as close to ``reach``
        (tangency) as the room allows, never beyond it.

        Centering on p0/q0 itself would let a concentric Alice sit on a
        low-denominator rational, where no sub-ball clears its r/3-thickening.
        """
        room = sub.radius - s
        lo = [c - room for c in sub.center]
        hi = [c + room for c in sub.center]
        y = [max(l, min(h, pc)) for l, h, pc in zip(lo, hi, p0)]
        best = None
        for i in range(len(y)):
            for target in (p0[i] + reach, p0[i] - reach):
                v = max(lo[i], min(hi[i], target))
                gain = abs(v - p0[i])
                if best is None or gain > best[0]:
                    best = (gain, i, v)
        _, i, v = best
        y[i] = v
        return tuple(y)

    def b_prime(self, rnd: BobRound) -> FormalBall:
        return FormalBall(rnd.p0, (1 + 6 / self.beta) * self.psi(rnd.q0))


def _in_hyperplane(points: List[Point], d: int) -> bool:
    if len(points) <= d:
        return True
    base = points[0]
    rows = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    rank = 0
    cols = d
    for c in range(cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank <= d - 1


def bob_s_strategy(psi: PsiFunction, beta, Q0="auto", **kwargs) -> BobS:
    return BobS(psi, beta, Q0, **kwargs)


def goodness_violations(b: FormalBall, psi: PsiFunction, Q0: int, qmax: int, bound: Fraction) -> List[Tuple[Point, int]]:
    """Reduced p/q (Q0 <= q <= qmax) whose psi-ball meets ``b`` although psi(q) > bound."""
    out = []
    if b.dim == 1:
        x, r = b.center[0], b.radius
        reach = r + psi(Q0)
        for v in rationals_in(x - reach, x + reach, qmax):
            q = v.denominator
            if q >= Q0 and psi(q) > bound and abs(v - x) <= r + psi(q):
                out.append(((v,), q))
        return out
    for q in range(Q0, qmax + 1):
        if psi(q) <= bound:
            break  # psi is decreasing
        reach = b.radius + psi(q)
        axes = [range(math.ceil(q * (c - reach)), math.floor(q * (c + reach)) + 1) for c in b.center]
        for p in itertools.product(*axes):
            if math.gcd(q, *p) == 1:
                out.append((tuple(Fraction(pi, q) for pi in p), q))
    return out


# ---------------------------------------------------------------------------
# spec strings (grammar version 1)
#
#   dummy
#   random[:seed=N]            Bob: BobRandom; Alice: AliceRandom
#   seeker[:seed=N]            Alice centering on low-denominator rationals
#   porosity:CERT[*k][+CERT[*k]...]
#   enum:sb=N | enum:{p;p;...}
#   wa:eps=E,d=D[,w=W]
#   bob-s:psi=c*q^-a[,Q0=auto|N]

SPEC_GRAMMAR_VERSION = 1


class SpecError(ValueError):
    """An unresolvable strategy or oracle spec string."""


def _kwargs(text: str) -> Dict[str, str]:
    out = {}
    for part in split_top(text, ","):
        if not part:
            continue
        key, eq, value = part.partition("=")
        if not eq:
            raise SpecError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _int_arg(args: Dict[str, str], key: str, default: int) -> int:
    try:
        return int(args.get(key, default))
    except ValueError:
        raise SpecError(f"{key} must be an integer, got {args[key]!r}") from None


def parse_strategy(spec: str, seat: str, game: Game) -> Strategy:
    """Build a fresh strategy for ``seat`` ("alice" or "bob") from a spec string."""
    name, _, rest = spec.strip().partition(":")
    try:
        if name == "dummy":
            if seat != ALICE:
                raise SpecError("dummy is an Alice strategy")
            return alice_dummy()
        if name == "random":
            seed = _int_arg(_kwargs(rest), "seed", 0)
            return bob_random(seed) if seat == BOB else AliceRandom(seed)
        if name == "seeker":
            return AliceRandom(_int_arg(_kwargs(rest), "seed", 0), seek_rationals=True)
        if seat == ALICE and name == "porosity":
            certs = []
            for item in split_top(rest, "+"):
                if not item:
                    continue
                base, star, k = item.rpartition("*") if "*" in item.rsplit(")", 1)[-1] else (item, "", "")
                cert = parse_certificate(base, game.beta)
                certs.extend([cert] * (int(k) if star else 1))
            return alice_bms_porosity(certs)
        if seat == ALICE and name == "enum":
            if rest.startswith("sb="):
                return alice_bmm_enumeration(stern_brocot(int(rest[3:])))
            return alice_bmm_enumeration(_braced_points(rest))
        if seat == ALICE and name == "wa":
            args = _kwargs(rest)
            if "eps" not in args:
                raise SpecError("wa needs eps=")
            w = args.get("w")
            return alice_wa(as_rational(args["eps"]), _int_arg(args, "d", game.dim), int(w) if w else None)
        if seat == BOB and name == "bob-s":
            args = _kwargs(rest)
            if "psi" not in args:
                raise SpecError("bob-s needs psi=")
            psi = PsiFunction.parse(args["psi"], game.dim)
            return bob_s_strategy(psi, game.beta, args.get("Q0", "auto"))
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError(f"bad strategy spec {spec!r}: {exc}") from exc
    raise SpecError(f"unknown {seat} strategy {spec!r}")
