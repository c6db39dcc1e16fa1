"""Referee for the Schmidt, absolute, Banach-Mazur, BMS and BMM games.

The engine never approximates: every rule is a rational (in)equality checked
exactly, and infinite plays are truncated at a round bound. Outcomes are
decided from the final Bob ball only, never by guessing a limit point.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import IO, Callable, Iterable, List, Optional, Tuple

from . import __version__
from .metric import (
    DimensionError,
    FormalBall,
    as_rational,
    ball_contains_point,
    dist,
    format_rational,
    formally_disjoint,
    shrink_leq,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

ALICE = "alice"
BOB = "bob"

SCHMIDT = "schmidt"
ABSOLUTE = "absolute"
BANACH_MAZUR = "banach-mazur"
BMS = "bms"
BMM = "bmm"
KINDS = (SCHMIDT, ABSOLUTE, BANACH_MAZUR, BMS, BMM)

# termination reasons
ROUND_BOUND = "round bound reached"
RESIGNED = "player resigned"
NO_LEGAL_MOVE = "no legal move"


class IllegalMove(ValueError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class TranscriptFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SchemaVersionError(TranscriptFormatError):
    pass


@dataclass(frozen=True)
class Game:
    """Game kind, its parameters and the dimension of the board R^d."""

    kind: str
    alpha: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    dim: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown game kind {self.kind!r}; choose from {KINDS}")
        needs = {SCHMIDT: ("alpha", "beta"), ABSOLUTE: ("beta",), BMS: ("beta",), BMM: ("beta",)}
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if name in needs.get(self.kind, ()):
                if value is None:
                    raise ValueError(f"{self.kind} game requires parameter {name}")
                value = as_rational(value)
                if not 0 < value < 1:
                    raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")
                object.__setattr__(self, name, value)
            elif value is not None:
                raise ValueError(f"{self.kind} game takes no parameter {name}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @classmethod
    def schmidt(cls, alpha, beta, dim=1):
        return cls(SCHMIDT, alpha, beta, dim)

    @classmethod
    def absolute(cls, beta, dim=1):
        return cls(ABSOLUTE, None, beta, dim)

    @classmethod
    def banach_mazur(cls, dim=1):
        return cls(BANACH_MAZUR, None, None, dim)

    @classmethod
    def bms(cls, beta, dim=1):
        return cls(BMS, None, beta, dim)

    @classmethod
    def bmm(cls, beta, dim=1):
        return cls(BMM, None, beta, dim)

    @property
    def params(self) -> dict:
        out = {}
        if self.alpha is not None:
            out["alpha"] = format_rational(self.alpha)
        if self.beta is not None:
            out["beta"] = format_rational(self.beta)
        return out

    def default_opening(self) -> FormalBall:
        return FormalBall((Fraction(0),) * self.dim, Fraction(1))

    def __str__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({args}; d={self.dim})"


@dataclass(frozen=True)
class Move:
    mover: str
    ball: FormalBall


@dataclass(frozen=True)
class GameState:
    game: Game
    history: Tuple[Move, ...] = ()

    @property
    def to_move(self) -> str:
        # Bob opens, then strict alternation
        return BOB if len(self.history) % 2 == 0 else ALICE

    @property
    def round_index(self) -> int:
        """Number of Bob moves made so far."""
        return (len(self.history) + 1) // 2

    @property
    def alice_moves(self) -> int:
        return len(self.history) // 2

    def last(self, mover: str) -> Optional[FormalBall]:
        for move in reversed(self.history):
            if move.mover == mover:
                return move.ball
        return None

    @property
    def current_ball(self) -> Optional[FormalBall]:
        return self.history[-1].ball if self.history else None


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def _fmt(x: Fraction) -> str:
    return format_rational(x)


def _leq_check(inner: FormalBall, outer: FormalBall, label: str) -> Optional[str]:
    lhs = inner.radius + dist(outer.center, inner.center)
    if lhs <= outer.radius:
        return None
    return (
        f"{label}: r + d(x, x_prev) <= r_prev fails: "
        f"{_fmt(inner.radius)} + {_fmt(dist(outer.center, inner.center))} = {_fmt(lhs)} > {_fmt(outer.radius)}"
    )


def _disjoint_check(deleted: FormalBall, move: FormalBall) -> Optional[str]:
    if formally_disjoint(deleted, move):
        return None
    d = dist(deleted.center, move.center)
    return (
        f"formal disjointness d(x'_n, x_(n+1)) >= r'_n + r_(n+1) fails: "
        f"{_fmt(d)} < {_fmt(deleted.radius)} + {_fmt(move.radius)}"
    )


def constraints(state: GameState) -> List[str]:
    """Human-readable rule instances for the player to move (used by the REPL)."""
    game = state.game
    mover = state.to_move
    if not state.history:
        return ["opening move: any formal ball with positive radius"]
    bob_last = state.last(BOB)
    alice_last = state.last(ALICE)
    prev = state.current_ball
    out = []
    k = game.kind
    if mover == ALICE:
        r = bob_last.radius
        if k == SCHMIDT:
            out += [f"radius = alpha*r = {_fmt(game.alpha * r)}", f"radius + d(x, {_point(bob_last)}) <= {_fmt(r)}"]
        elif k == BMS:
            out += [f"radius = beta*r = {_fmt(game.beta * r)}", f"radius + d(x, {_point(bob_last)}) <= {_fmt(r)}"]
        elif k in (ABSOLUTE, BMM):
            out += [f"radius <= beta*r = {_fmt(game.beta * r)}", "center unrestricted"]
        else:
            out += [f"radius + d(x, {_point(prev)}) <= {_fmt(prev.radius)}"]
    else:
        if k == SCHMIDT:
            out += [f"radius = beta*r' = {_fmt(game.beta * alice_last.radius)}",
                    f"radius + d(x, {_point(alice_last)}) <= {_fmt(alice_last.radius)}"]
        elif k in (BMS, BANACH_MAZUR):
            out += [f"radius + d(x, {_point(prev)}) <= {_fmt(prev.radius)}"]
        else:
            out += [f"radius + d(x, {_point(bob_last)}) <= {_fmt(bob_last.radius)}",
                    f"d(x, {_point(alice_last)}) >= {_fmt(alice_last.radius)} + radius"]
            if k == ABSOLUTE:
                out.append(f"radius >= beta*r = {_fmt(game.beta * bob_last.radius)}")
    return out


def _point(b: FormalBall) -> str:
    return "(" + ", ".join(_fmt(c) for c in b.center) + ")"


def legal_move(state: GameState, move: FormalBall, mover: Optional[str] = None) -> Verdict:
    """Judge ``move`` for the player to move; the reason names the violated rule."""
    game = state.game
    if mover is not None and mover != state.to_move:
        return Verdict(False, f"wrong mover: {mover} played but {state.to_move} is to move")
    if move.dim != game.dim:
        raise DimensionError(f"move has dimension {move.dim}, game has {game.dim}")
    if not state.history:
        return Verdict(True)

    kind = game.kind
    bob_last = state.last(BOB)
    alice_last = state.last(ALICE)
    problem = None

    if state.to_move == ALICE:
        r = bob_last.radius
        if kind in (SCHMIDT, BMS):
            ratio = game.alpha if kind == SCHMIDT else game.beta
            name = "alpha" if kind == SCHMIDT else "beta"
            if move.radius != ratio * r:
                problem = f"radius must equal {name}*r = {_fmt(ratio)}*{_fmt(r)} = {_fmt(ratio * r)}, got {_fmt(move.radius)}"
            else:
                problem = _leq_check(move, bob_last, "Alice ball must lie in Bob's ball")
        elif kind in (ABSOLUTE, BMM):
            if move.radius > game.beta * r:
                problem = f"radius must satisfy r' <= beta*r = {_fmt(game.beta * r)}, got {_fmt(move.radius)}"
        else:
            problem = _leq_check(move, bob_last, "Alice ball must lie in Bob's ball")
    else:
        if kind == SCHMIDT:
            target = game.beta * alice_last.radius
            if move.radius != target:
                problem = f"radius must equal beta*r' = {_fmt(game.beta)}*{_fmt(alice_last.radius)} = {_fmt(target)}, got {_fmt(move.radius)}"
            else:
                problem = _leq_check(move, alice_last, "Bob ball must lie in Alice's ball")
        elif kind in (BMS, BANACH_MAZUR):
            problem = _leq_check(move, alice_last, "Bob ball must lie in Alice's ball")
        else:
            problem = _leq_check(move, bob_last, "Bob ball must lie in his previous ball")
            if problem is None:
                problem = _disjoint_check(alice_last, move)
            if problem is None and kind == ABSOLUTE and move.radius < game.beta * bob_last.radius:
                problem = (f"radius must satisfy r_(n+1) >= beta*r_n = {_fmt(game.beta * bob_last.radius)}, "
                           f"got {_fmt(move.radius)}")
    return Verdict(problem is None, problem or "")


def apply_move(state: GameState, move: FormalBall, mover: Optional[str] = None) -> GameState:
    verdict = legal_move(state, move, mover)
    if not verdict:
        raise IllegalMove(verdict.reason)
    return replace(state, history=state.history + (Move(state.to_move, move),))


def bmm_bob_reply(state: GameState) -> FormalBall:
    """A legal Bob ball in the BMM/absolute game, built constructively.

    Pushes Bob's last center away from Alice's deleted center along the
    coordinate of largest separation; with r' <= beta*r < r a tangent ball of
    radius ``(d(x, x') + r - r') / 2`` (capped at ``r``) always fits.
    """
    bob_last = state.last(BOB)
    deleted = state.last(ALICE)
    x, r = bob_last.center, bob_last.radius
    xa = deleted.center
    i = max(range(len(x)), key=lambda j: abs(x[j] - xa[j]))
    sign = 1 if x[i] >= xa[i] else -1
    s = (dist(x, xa) + r - deleted.radius) / 2
    s = min(s, r)
    if state.game.kind == ABSOLUTE:
        s = max(s, state.game.beta * r)
    center = list(x)
    center[i] = x[i] + sign * (r - s)
    return FormalBall(tuple(center), s)


@dataclass
class Transcript:
    game: Game
    moves: List[Move]
    termination: str = ROUND_BOUND
    max_rounds: Optional[int] = None
    resigned_by: Optional[str] = None
    note: str = ""
    engine: str = f"bmsgame {__version__}"
    outcome: Optional["Outcome"] = None

    @property
    def final_bob_ball(self) -> Optional[FormalBall]:
        for move in reversed(self.moves):
            if move.mover == BOB:
                return move.ball
        return None

    @property
    def rounds(self) -> int:
        """Completed Alice/Bob exchanges after Bob's opening."""
        return sum(1 for m in self.moves if m.mover == ALICE)

    def state(self) -> GameState:
        return GameState(self.game, tuple(self.moves))

    # JSON Lines serialization; no floats anywhere.
    def to_lines(self) -> List[str]:
        header = {
            "type": "header",
            "schema_version": SCHEMA_VERSION,
            "engine": self.engine,
            "game": self.game.kind,
            "params": self.game.params,
            "dim": self.game.dim,
            "max_rounds": self.max_rounds,
        }
        lines = [json.dumps(header)]
        for move in self.moves:
            lines.append(json.dumps({"type": "move", "mover": move.mover, **move.ball.to_json()}))
        end = {
            "type": "outcome",
            "termination": self.termination,
            "resigned_by": self.resigned_by,
            "note": self.note,
        }
        if self.outcome is not None:
            end.update(self.outcome.to_json())
        lines.append(json.dumps(end))
        return lines

    def dump(self, fh: IO[str]) -> None:
        for line in self.to_lines():
            fh.write(line + "\n")

    def save(self, path) -> None:
        with open(path, "w") as fh:
            self.dump(fh)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Transcript":
        rows = []
        for lineno, text in enumerate(lines, start=1):
            if not text.strip():
                continue
            try:
                rows.append((lineno, json.loads(text)))
            except json.JSONDecodeError as exc:
                raise TranscriptFormatError(f"invalid JSON: {exc}", lineno) from None
        if not rows:
            raise TranscriptFormatError("empty transcript")
        lineno, header = rows[0]
        if header.get("type") != "header":
            raise TranscriptFormatError("first line must be a header object", lineno)
        version = header.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(
                f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})", lineno)
        try:
            params = {k: as_rational(v) for k, v in header.get("params", {}).items()}
            game = Game(header["game"], params.get("alpha"), params.get("beta"), int(header["dim"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise TranscriptFormatError(f"bad header: {exc}", lineno) from None
        moves, end, lines_of = [], None, []
        for lineno, row in rows[1:]:
            kind = row.get("type")
            if kind == "move":
                if end is not None:
                    raise TranscriptFormatError("move after outcome line", lineno)
                try:
                    b = FormalBall.from_json(row)
                except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                    raise TranscriptFormatError(f"bad move: {exc}", lineno) from None
                if row.get("mover") not in (ALICE, BOB):
                    raise TranscriptFormatError(f"bad mover {row.get('mover')!r}", lineno)
                moves.append(Move(row["mover"], b))
                lines_of.append(lineno)
            elif kind == "outcome":
                end = row
            else:
                raise TranscriptFormatError(f"unknown record type {kind!r}", lineno)
        t = cls(game, moves, max_rounds=header.get("max_rounds"), engine=header.get("engine", ""))
        if end is not None:
            t.termination = end.get("termination", ROUND_BOUND)
            t.resigned_by = end.get("resigned_by")
            t.note = end.get("note", "")
            if "winner" in end:
                t.outcome = Outcome.from_json(end)
        t._lines = lines_of
        return t

    @classmethod
    def load(cls, path) -> "Transcript":
        with open(path) as fh:
            return cls.from_lines(fh)


class Strategy:
    """Base class for players. ``next_move`` returns a ball, or None to resign."""

    name = "strategy"

    def opening(self, game: Game) -> FormalBall:
        return game.default_opening()

    def next_move(self, state: GameState) -> Optional[FormalBall]:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def play(game: Game, alice: Strategy, bob: Strategy, max_rounds: int,
         opening: Optional[FormalBall] = None,
         until: Optional[Callable[[GameState], bool]] = None) -> Transcript:
    """Run one play: Bob opens, then ``max_rounds`` Alice/Bob exchanges.

    ``until`` is checked after each Bob move; when it returns True the play
    stops early and the recorded round bound is the number of rounds played.
    """
    state = GameState(game)
    transcript = Transcript(game, [], max_rounds=max_rounds)
    players = {ALICE: alice, BOB: bob}

    while True:
        mover = state.to_move
        if mover == ALICE and state.alice_moves >= max_rounds:
            transcript.termination = ROUND_BOUND
            break
        player = players[mover]
        if not state.history:
            move = opening if opening is not None else bob.opening(game)
        else:
            move = player.next_move(state)
        if move is None:
            transcript.termination = RESIGNED
            transcript.resigned_by = mover
            break
        verdict = legal_move(state, move)
        if not verdict:
            log.info("%s emitted an illegal move %s: %s", mover, move, verdict.reason)
            transcript.termination = RESIGNED
            transcript.resigned_by = mover
            transcript.note = f"illegal move {move}: {verdict.reason}"
            break
        state = replace(state, history=state.history + (Move(mover, move),))
        if mover == BOB and until is not None and until(state):
            transcript.termination = ROUND_BOUND
            transcript.max_rounds = state.alice_moves
            break
    transcript.moves = list(state.history)
    return transcript


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    move_index: Optional[int] = None
    line: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify_transcript(transcript: Transcript) -> VerifyReport:
    """Replay every move through :func:`legal_move` and re-check nesting."""
    state = GameState(transcript.game)
    lines = getattr(transcript, "_lines", None)

    def fail(i, reason):
        return VerifyReport(False, i, lines[i] if lines else i + 2, reason)

    nested_kinds = (SCHMIDT, BANACH_MAZUR, BMS)
    for i, move in enumerate(transcript.moves):
        if move.mover != state.to_move:
            return fail(i, f"wrong mover: {move.mover} played but {state.to_move} is to move")
        try:
            verdict = legal_move(state, move.ball)
        except DimensionError as exc:
            return fail(i, str(exc))
        if not verdict:
            return fail(i, verdict.reason)
        if state.history:
            prev = state.history[-1].ball
            if transcript.game.kind in nested_kinds and not shrink_leq(move.ball, prev):
                return fail(i, "nesting chain broken")
            if move.mover == BOB and transcript.game.kind in (ABSOLUTE, BMM):
                if not shrink_leq(move.ball, state.last(BOB)):
                    return fail(i, "Bob's nesting chain broken")
        state = replace(state, history=state.history + (move,))
    if not transcript.moves:
        return VerifyReport(False, None, None, "transcript has no moves")
    if transcript.termination == ROUND_BOUND and transcript.max_rounds is not None:
        if state.alice_moves != transcript.max_rounds or state.to_move != ALICE:
            return VerifyReport(False, None, None,
                                "round bound claimed but move count does not match max_rounds")
    return VerifyReport(True)


@dataclass(frozen=True)
class Outcome:
    winner: str  # "alice" | "bob" | "undecided"
    final_ball: Optional[FormalBall]
    evidence: str

    def to_json(self) -> dict:
        return {
            "winner": self.winner,
            "final_ball": self.final_ball.to_json() if self.final_ball else None,
            "evidence": self.evidence,
        }

    @classmethod
    def from_json(cls, obj) -> "Outcome":
        fb = obj.get("final_ball")
        return cls(obj["winner"], FormalBall.from_json(fb) if fb else None, obj.get("evidence", ""))


UNDECIDED = "undecided"


def outcome(transcript: Transcript, target) -> Outcome:
    """Judge a (verified) transcript against a target-set oracle.

    ``target`` answers ``ball_disjoint(B)`` (B misses the target) and
    ``ball_inside(B)`` (B lies in the target) with True/False/None.
    """
    final = transcript.final_bob_ball
    if transcript.resigned_by == BOB:
        return Outcome(ALICE, final, "Bob resigned or had no legal move")
    if transcript.resigned_by == ALICE:
        return Outcome(BOB, final, f"Alice resigned. {transcript.note}".strip())
    if final is None:
        return Outcome(UNDECIDED, None, "no Bob move recorded")
    name = getattr(target, "name", type(target).__name__)
    try:
        if target.ball_disjoint(final) is True:
            return Outcome(BOB, final, f"{name}: final ball {final} misses the target")
        if target.ball_inside(final) is True:
            return Outcome(ALICE, final, f"{name}: final ball {final} lies inside the target")
        exceptions = getattr(target, "exceptional_prefix", None)
        if transcript.game.kind in (BMM, BANACH_MAZUR) and exceptions is not None:
            points = list(exceptions())
            hit = [p for p in points if ball_contains_point(final, p, closed=True)]
            if not hit:
                return Outcome(ALICE, final,
                               f"{name}: final ball excludes all {len(points)} enumerated exceptional points "
                               f"(confidence {len(points)}); a positive-radius ball minus a countable set is nonempty")
            return Outcome(UNDECIDED, final, f"{name}: final ball still contains exceptional point {hit[0]}")
    except Exception as exc:  # oracle failures must not crash judging
        return Outcome(UNDECIDED, final, f"oracle query failed: {exc!r}")
    return Outcome(UNDECIDED, final, f"{name}: cannot decide at radius {format_rational(final.radius)}")
