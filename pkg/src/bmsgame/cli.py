"""Command-line front end: ``bmsgame play|verify|tournament|repl|estimate|porosity-check``.

Every numeric argument is an exact rational string such as ``1/5``; floats
are rejected before they reach the engine.

Exit codes:
    0   decided outcome / verification passed
    1   verification failed or certificate counterexample found
    2   undecided outcome
    3   a strategy emitted an illegal move
    4   transcript schema version mismatch
    64  usage error (bad flags, unresolvable spec)
    65  malformed transcript
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .diophantine import (
    INFINITE,
    best_approximations,
    error_enclosure,
    lagrange_estimate,
    omega_estimate,
    parse_real,
)
from .game import (
    ABSOLUTE,
    ALICE,
    BMM,
    BOB,
    KINDS,
    RESIGNED,
    UNDECIDED,
    Game,
    GameState,
    IllegalMove,
    SchemaVersionError,
    Transcript,
    TranscriptFormatError,
    apply_move,
    bmm_bob_reply,
    constraints,
    legal_move,
    outcome,
    play,
    verify_transcript,
)
from .metric import FormalBall, as_rational, format_rational
from .porosity import parse_certificate, parse_oracle, split_top, verify_certificate
from .strategies import SpecError, alice_dummy, parse_strategy

EXIT_OK, EXIT_FAIL, EXIT_UNDECIDED, EXIT_ILLEGAL, EXIT_SCHEMA, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3, 4, 64, 65
OUTPUT_ENV = "BMSGAME_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def rational_arg(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not an exact rational (use p/q, floats are rejected)")


def output_dir(explicit: Optional[str]) -> Path:
    path = Path(explicit or os.environ.get(OUTPUT_ENV) or "transcripts")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9=.-]+", "_", text).strip("_")[:80]


def build_game(args) -> Game:
    kind = args.game
    needs = {"schmidt": ("alpha", "beta"), "absolute": ("beta",), "bms": ("beta",), "bmm": ("beta",)}
    for name in needs.get(kind, ()):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required for --game {kind}")
    try:
        return Game(kind, args.alpha, args.beta, args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_game_args(p):
    p.add_argument("--game", required=True, choices=KINDS)
    p.add_argument("--alpha", type=rational_arg)
    p.add_argument("--beta", type=rational_arg)
    p.add_argument("--dim", type=int, default=1)


def resolve_target(spec: Optional[str], alice):
    if spec:
        try:
            return parse_oracle(spec)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad target spec {spec!r}: {exc}") from None
    maker = getattr(alice, "target_oracle", None)
    return maker() if maker else None


def run_play(game: Game, alice_spec: str, bob_spec: str, rounds: int, target_spec: Optional[str]):
    alice = parse_strategy(alice_spec, ALICE, game)
    bob = parse_strategy(bob_spec, BOB, game)
    target = resolve_target(target_spec, alice)
    transcript = play(game, alice, bob, rounds)
    if target is not None:
        transcript.outcome = outcome(transcript, target)
    elif transcript.resigned_by:
        transcript.outcome = outcome(transcript, _NoTarget())
    return transcript


class _NoTarget:
    name = "no target"

    def ball_disjoint(self, b):
        return None

    def ball_inside(self, b):
        return None


def _illegal(t: Transcript) -> bool:
    return t.termination == RESIGNED and t.note.startswith("illegal move")


def cmd_play(args) -> int:
    game = build_game(args)
    transcript = run_play(game, args.alice, args.bob, args.rounds, args.target)
    path = Path(args.out) if args.out else output_dir(None) / f"play-{_slug(args.alice)}-vs-{_slug(args.bob)}.jsonl"
    path.parent.mkdir(parents=True, exist_ok=True)
    transcript.save(path)
    res = transcript.outcome
    winner = res.winner if res else UNDECIDED
    evidence = res.evidence if res else "no target oracle"
    print(f"outcome: {winner} ({evidence}); rounds={transcript.rounds}; transcript={path}")
    if _illegal(transcript):
        print(f"illegal move by {transcript.resigned_by}: {transcript.note}", file=sys.stderr)
        return EXIT_ILLEGAL
    return EXIT_UNDECIDED if winner == UNDECIDED else EXIT_OK


def cmd_verify(args) -> int:
    try:
        transcript = Transcript.load(args.path)
    except SchemaVersionError as exc:
        print(f"schema version error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except TranscriptFormatError as exc:
        print(f"malformed transcript: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"cannot read {args.path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = verify_transcript(transcript)
    if report.ok:
        print(f"ok: {len(transcript.moves)} moves, {transcript.rounds} rounds, {transcript.game}")
        return EXIT_OK
    where = f"line {report.line}" if report.line else "transcript"
    print(f"violation at {where}: {report.reason}", file=sys.stderr)
    return EXIT_FAIL


def expand_specs(specs: Sequence[str]) -> List[str]:
    """``random:seed=1..3`` expands to three specs."""
    out = []
    for spec in specs:
        m = re.search(r"(\d+)\.\.(\d+)", spec)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            out.extend(spec[:m.start()] + str(i) + spec[m.end():] for i in range(a, b + 1))
        else:
            out.append(spec)
    return out


def _tournament_job(job):
    game, alice, bob, rounds, target, path = job
    try:
        t = run_play(game, alice, bob, rounds, target)
        t.save(path)
        winner = t.outcome.winner if t.outcome else UNDECIDED
        return {"alice": alice, "bob": bob, "winner": winner, "illegal": _illegal(t), "error": None}
    except Exception as exc:  # isolate failures per play
        return {"alice": alice, "bob": bob, "winner": None, "illegal": False, "error": f"{type(exc).__name__}: {exc}"}


def cmd_tournament(args) -> int:
    game = build_game(args)
    alices = expand_specs(args.alice or [])
    bobs = expand_specs(args.bob or [])
    out = output_dir(args.out)
    jobs = []
    for a in alices:
        for b in bobs:
            for rep in range(args.repetitions):
                name = f"{_slug(a)}-vs-{_slug(b)}-{rep}.jsonl"
                jobs.append((game, a, b, args.rounds, args.target, str(out / name)))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_tournament_job, jobs))
    else:
        results = [_tournament_job(j) for j in jobs]
    cells = {}
    for r in results:
        cell = cells.setdefault((r["alice"], r["bob"]), {
            "alice": r["alice"], "bob": r["bob"], "plays": 0,
            "alice_wins": 0, "bob_wins": 0, "undecided": 0, "illegal": 0, "errors": []})
        cell["plays"] += 1
        if r["error"]:
            cell["errors"].append(r["error"])
        elif r["winner"] == ALICE:
            cell["alice_wins"] += 1
        elif r["winner"] == BOB:
            cell["bob_wins"] += 1
        else:
            cell["undecided"] += 1
        cell["illegal"] += int(r["illegal"])
    summary = {
        "schema_version": 1,
        "engine": f"bmsgame {__version__}",
        "game": game.kind,
        "params": game.params,
        "dim": game.dim,
        "rounds": args.rounds,
        "repetitions": args.repetitions,
        "cells": [cells[k] for k in sorted(cells)],
    }
    text = json.dumps(summary, indent=2, sort_keys=True)
    (out / "summary.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# REPL

REPL_HELP = """commands:
  <center> <radius>   play a ball, e.g. "1/2 1/10" or "1/2,1/3 1/10" in dimension 2
  hint                show one legal move
  show                show the current ball and constraints
  resign              resign and end the session
  quit                end the session (transcript is saved)
  help                this text"""


def parse_ball(text: str, dim: int) -> FormalBall:
    parts = text.split()
    if len(parts) != 2:
        raise ValueError("expected '<center> <radius>'")
    center = tuple(as_rational(c) for c in split_top(parts[0].strip("()"), ","))
    if len(center) != dim:
        raise ValueError(f"center needs {dim} coordinate(s)")
    return FormalBall(center, as_rational(parts[1]))


def hint(state: GameState) -> FormalBall:
    game = state.game
    if not state.history:
        return game.default_opening()
    if state.to_move == ALICE:
        return alice_dummy().next_move(state)
    if game.kind in (BMM, ABSOLUTE):
        return bmm_bob_reply(state)
    alice = state.last(ALICE)
    return alice.scaled(game.beta if game.beta is not None else Fraction(1, 2))


def cmd_repl(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    game = build_game(args)
    human = args.human
    other = BOB if human == ALICE else ALICE
    opponent = parse_strategy(args.opponent, other, game)
    state = GameState(game)
    resigned_by = None

    def say(text=""):
        print(text, file=stdout, flush=True)

    say(f"{game}; you are {human}; opponent {opponent.name}; up to {args.rounds} rounds. 'help' for commands.")
    finished = False
    while not finished:
        if state.alice_moves >= args.rounds and state.to_move == ALICE:
            say("round bound reached")
            break
        if state.to_move != human:
            move = opponent.opening(game) if not state.history else opponent.next_move(state)
            if move is None or not legal_move(state, move):
                resigned_by = other
                say(f"{other} resigns")
                break
            state = apply_move(state, move)
            say(f"{other} plays {move}")
            continue
        say(f"current ball: {state.current_ball or 'none (opening move)'}")
        for c in constraints(state):
            say(f"  constraint: {c}")
        while True:
            print(f"{human}> ", end="", file=stdout, flush=True)
            line = stdin.readline()
            if not line:
                finished = True
                break
            cmd = line.strip()
            if not cmd:
                continue
            if cmd in ("quit", "exit"):
                finished = True
                break
            if cmd == "help":
                say(REPL_HELP)
                continue
            if cmd == "show":
                say(f"current ball: {state.current_ball}")
                for c in constraints(state):
                    say(f"  constraint: {c}")
                continue
            if cmd == "resign":
                resigned_by = human
                finished = True
                break
            if cmd == "hint":
                say(f"hint: {hint(state)}")
                continue
            try:
                ball = parse_ball(cmd, game.dim)
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                say(f"could not parse {cmd!r}: {exc}")
                continue
            verdict = legal_move(state, ball)
            if not verdict:
                say(f"illegal: {verdict.reason}")
                continue
            state = apply_move(state, ball)
            break
    transcript = Transcript(game, list(state.history), max_rounds=state.alice_moves)
    if resigned_by:
        transcript.termination = RESIGNED
        transcript.resigned_by = resigned_by
    elif state.to_move != ALICE:
        # session ended mid-round: only complete rounds are claimed
        transcript.max_rounds = None
        transcript.termination = "session ended"
    path = Path(args.out) if args.out else output_dir(None) / "repl.jsonl"
    path.parent.mkdir(parents=True, exist_ok=True)
    transcript.save(path)
    say(f"transcript saved to {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimators and certificates

def _enc_json(value):
    if value is None:
        return None
    if value == INFINITE:
        return INFINITE
    return value.to_json()


def cmd_estimate(args) -> int:
    try:
        xs = [parse_real(s) for s in args.x]
    except (ValueError, TypeError) as exc:
        print(f"unsupported descriptor {' '.join(args.x)!r}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    x = xs[0] if len(xs) == 1 else xs
    table = []
    rows = best_approximations(x, args.Qmax)[-args.table:] if args.table > 0 else []
    for a in rows:
        table.append({"q": a.q, "p": list(a.p), "error": error_enclosure(x, a).to_json()})
    report = {
        "x": args.x if len(args.x) > 1 else args.x[0],
        "dim": len(xs),
        "Qmax": args.Qmax,
        "q_from": args.q_from,
        "omega": _enc_json(omega_estimate(x, args.Qmax, q_from=args.q_from)),
        "lagrange": _enc_json(lagrange_estimate(x, args.Qmax, q_from=args.q_from)),
        "best_approximations": table,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _sample_balls(lo: Fraction, hi: Fraction, den: int, radii: Sequence[Fraction]):
    k0 = -((-lo * den).__floor__())
    k1 = (hi * den).__floor__()
    for k in range(k0, k1 + 1):
        for r in radii:
            yield FormalBall((Fraction(k, den),), r)


def cmd_porosity_check(args) -> int:
    try:
        cert = parse_certificate(args.cert, args.beta)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad certificate {args.cert!r}: {exc}") from None
    lo, hi = (as_rational(v) for v in args.range.split(","))
    radii = [as_rational(r) for r in args.radii.split(",")]
    report = verify_certificate(cert, _sample_balls(lo, hi, args.den, radii), beta=args.beta)
    out = {
        "certificate": cert.name,
        "beta": format_rational(args.beta if args.beta is not None else cert.beta),
        "checked": report.checked,
        "failures": len(report.failures),
        "examples": [{"ball": str(b), "reason": why} for b, why in report.failures[:5]],
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bmsgame", description="Exact referee and strategies for Schmidt-type games.")
    p.add_argument("--version", action="version", version=f"bmsgame {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("play", help="run one play and write its transcript")
    _add_game_args(sp)
    sp.add_argument("--alice", required=True, help="Alice strategy spec, e.g. porosity:cantor")
    sp.add_argument("--bob", required=True, help="Bob strategy spec, e.g. random:seed=1")
    sp.add_argument("--rounds", type=int, default=20)
    sp.add_argument("--target", help="target-set oracle spec, e.g. complement(cantor)")
    sp.add_argument("--out", help=f"transcript path (default: ${OUTPUT_ENV} or ./transcripts)")
    sp.set_defaults(func=cmd_play)

    sv = sub.add_parser("verify", help="replay a transcript and check every rule")
    sv.add_argument("path")
    sv.set_defaults(func=cmd_verify)

    st = sub.add_parser("tournament", help="play every Alice spec against every Bob spec")
    _add_game_args(st)
    st.add_argument("--alice", action="append", help="repeatable; N..M ranges expand")
    st.add_argument("--bob", action="append", help="repeatable; e.g. random:seed=1..100")
    st.add_argument("--rounds", type=int, default=20)
    st.add_argument("--repetitions", type=int, default=1)
    st.add_argument("--target")
    st.add_argument("--jobs", type=int, default=1, help="concurrent worker processes")
    st.add_argument("--out", help="output directory")
    st.set_defaults(func=cmd_tournament)

    sr = sub.add_parser("repl", help="play interactively against a strategy")
    _add_game_args(sr)
    sr.add_argument("--human", choices=(ALICE, BOB), default=BOB)
    sr.add_argument("--opponent", default="dummy", help="the other seat's strategy spec")
    sr.add_argument("--rounds", type=int, default=10)
    sr.add_argument("--out", help="transcript path")
    sr.set_defaults(func=cmd_repl)

    se = sub.add_parser("estimate", help="irrationality exponent and Lagrange-value estimates")
    se.add_argument("--x", required=True, action="append",
                    help="sqrt2, golden, quad:P,Q,D, cf:1,2;3 or p/q; repeat for a vector")
    se.add_argument("--Qmax", type=int, required=True)
    se.add_argument("--q-from", type=int, default=10)
    se.add_argument("--table", type=int, default=10, help="rows of the best-approximation table")
    se.set_defaults(func=cmd_estimate)

    sc = sub.add_parser("porosity-check", help="check a porosity certificate on a grid of balls")
    sc.add_argument("--cert", default="cantor")
    sc.add_argument("--beta", type=rational_arg, help="check holes of radius beta*r (default: the certificate's)")
    sc.add_argument("--range", default="-1/2,3/2", help="center range lo,hi")
    sc.add_argument("--den", type=int, default=81, help="centers are k/den")
    sc.add_argument("--radii", default="1/81,1/27,1/9,1/3,1")
    sc.set_defaults(func=cmd_porosity_check)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SpecError) as exc:
        print(f"bmsgame {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IllegalMove as exc:  # pragma: no cover - strategies' moves are recorded, not raised
        print(f"illegal move: {exc}", file=sys.stderr)
        return EXIT_ILLEGAL


if __name__ == "__main__":
    sys.exit(main())
