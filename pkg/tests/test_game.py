import io
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmsgame.game import (
    ALICE,
    BOB,
    RESIGNED,
    ROUND_BOUND,
    UNDECIDED,
    Game,
    GameState,
    IllegalMove,
    Move,
    SchemaVersionError,
    Strategy,
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
from bmsgame.metric import FormalBall, ball, formally_disjoint, shrink_leq
from bmsgame.porosity import CoCountableOracle, FiniteSetOracle
from bmsgame.strategies import alice_dummy, bob_random


def state_after(game, *balls):
    s = GameState(game)
    for b in balls:
        s = apply_move(s, b)
    return s


def test_game_parameters_validated():
    with pytest.raises(ValueError):
        Game.bms(F(3, 2))
    with pytest.raises(ValueError):
        Game("schmidt", None, F(1, 2))
    assert Game.banach_mazur().params == {}


def test_turn_order():
    g = Game.bms(F(1, 4))
    s = GameState(g)
    assert s.to_move == BOB
    s = apply_move(s, ball(0, 1))
    assert s.to_move == ALICE and s.round_index == 1


def test_schmidt_radius_rule_message():
    g = Game.schmidt(F(1, 2), F(1, 3))
    s = state_after(g, ball(0, 1))
    v = legal_move(s, ball(0, "1/3"))
    assert not v and "alpha*r = 1/2*1 = 1/2" in v.reason and "got 1/3" in v.reason
    assert legal_move(s, ball("1/2", "1/2"))
    assert not legal_move(s, ball("3/4", "1/2"))


def test_wrong_mover_rejected():
    g = Game.bms(F(1, 4))
    s = state_after(g, ball(0, 1))
    assert "wrong mover" in legal_move(s, ball(0, "1/4"), mover=BOB).reason
    with pytest.raises(IllegalMove):
        apply_move(s, ball(0, "1/2"))


def test_bmm_rules():
    g = Game.bmm(F(1, 3))
    s = state_after(g, ball(0, 1))
    assert legal_move(s, ball(5, "1/3"))  # Alice's center is unrestricted
    assert not legal_move(s, ball(0, "1/2"))
    s = apply_move(s, ball(0, "1/3"))
    assert legal_move(s, ball("2/3", "1/3"))
    v = legal_move(s, ball("1/2", "1/3"))
    assert not v and "disjoint" in v.reason


def test_absolute_needs_radius_floor():
    g = Game.absolute(F(1, 4))
    s = state_after(g, ball(0, 1), ball(0, "1/4"))
    assert legal_move(s, ball("3/4", "1/4"))
    assert not legal_move(s, ball("7/8", "1/8"))


def test_constraints_are_instantiated():
    g = Game.schmidt(F(1, 2), F(1, 2))
    s = state_after(g, ball(0, 1))
    assert constraints(s)[0] == "radius = alpha*r = 1/2"


@settings(max_examples=300)
@given(st.fractions(min_value=-2, max_value=2, max_denominator=12),
       st.fractions(min_value=F(1, 12), max_value=2, max_denominator=12),
       st.fractions(min_value=-3, max_value=3, max_denominator=12),
       st.integers(min_value=1, max_value=6),
       st.sampled_from([F(1, 3), F(1, 4), F(1, 5), F(1, 7)]),
       st.sampled_from(["bmm", "absolute"]))
def test_bob_always_has_a_legal_reply(x, r, xa, k, beta, kind):
    """No-legal-move is unreachable: a constructive reply exists for every Alice deletion."""
    g = Game(kind, None, beta)
    alice = FormalBall((xa,), beta * r / k)
    s = GameState(g, (Move(BOB, FormalBall((x,), r)), Move(ALICE, alice)))
    reply = bmm_bob_reply(s)
    assert legal_move(s, reply), legal_move(s, reply).reason
    assert shrink_leq(reply, FormalBall((x,), r)) and formally_disjoint(alice, reply)


def test_bmm_reply_in_two_dimensions():
    g = Game.bmm(F(1, 3), dim=2)
    s = state_after(g, ball((0, 0), 1), ball((0, 0), "1/3"))
    assert legal_move(s, bmm_bob_reply(s))


def test_schmidt_dummy_radii_exact():
    g = Game.schmidt(F(1, 2), F(1, 2))
    t = play(g, alice_dummy(), bob_random(2), 10)
    assert t.termination == ROUND_BOUND and t.rounds == 10
    assert t.final_bob_ball.radius == F(1, 4 ** 10)


class Resigner(Strategy):
    name = "resigner"

    def next_move(self, state):
        return None


class Cheater(Strategy):
    name = "cheater"

    def next_move(self, state):
        return state.last(BOB)  # same radius: illegal in BMS


def test_resignation_and_illegal_moves_are_recorded():
    g = Game.bms(F(1, 5))
    t = play(g, Resigner(), bob_random(0), 5)
    assert t.termination == RESIGNED and t.resigned_by == ALICE
    assert outcome(t, FiniteSetOracle([0])).winner == BOB
    t = play(g, Cheater(), bob_random(0), 5)
    assert t.resigned_by == ALICE and t.note.startswith("illegal move")
    t = play(g, alice_dummy(), Resigner(), 5)
    assert t.resigned_by == BOB and outcome(t, FiniteSetOracle([0])).winner == ALICE


def test_until_stops_early_and_still_verifies():
    g = Game.bms(F(1, 5))
    t = play(g, alice_dummy(), bob_random(1), 50, until=lambda s: s.round_index > 3)
    assert t.rounds == 3 and verify_transcript(t).ok


def test_transcript_round_trip():
    g = Game.bms(F(1, 5))
    t = play(g, alice_dummy(), bob_random(3), 6)
    buf = io.StringIO()
    t.dump(buf)
    lines = buf.getvalue().splitlines()
    assert json.loads(lines[0])["params"] == {"beta": "1/5"}
    back = Transcript.from_lines(lines)
    assert back.moves == t.moves and back.game == g
    assert verify_transcript(back).ok


def test_verify_reports_tampered_line():
    g = Game.schmidt(F(1, 2), F(1, 2))
    t = play(g, alice_dummy(), bob_random(1), 4)
    lines = t.to_lines()
    row = json.loads(lines[4])
    row["radius"] = "1/1000"
    lines[4] = json.dumps(row)
    report = verify_transcript(Transcript.from_lines(lines))
    assert not report.ok and report.line == 5


def test_verify_checks_claimed_round_bound():
    g = Game.bms(F(1, 5))
    t = play(g, alice_dummy(), bob_random(1), 4)
    lines = t.to_lines()
    del lines[-2:-1]
    assert not verify_transcript(Transcript.from_lines(lines)).ok


def test_schema_errors():
    t = play(Game.bms(F(1, 5)), alice_dummy(), bob_random(1), 1)
    lines = t.to_lines()
    header = json.loads(lines[0])
    header["schema_version"] = 99
    with pytest.raises(SchemaVersionError):
        Transcript.from_lines([json.dumps(header)] + lines[1:])
    with pytest.raises(TranscriptFormatError) as err:
        Transcript.from_lines(lines[:1] + ["{not json"])
    assert err.value.line == 2
    bad = json.loads(lines[1])
    bad["radius"] = "0.5"
    with pytest.raises(TranscriptFormatError):
        Transcript.from_lines([lines[0], json.dumps(bad)])


def test_outcome_on_cocountable_target():
    g = Game.bmm(F(1, 3))
    oracle = CoCountableOracle([(F(0),)])
    t = Transcript(g, [Move(BOB, ball(0, 1)), Move(ALICE, ball(0, "1/3")), Move(BOB, ball("2/3", "1/3"))])
    assert outcome(t, oracle).winner == ALICE
    t = Transcript(g, [Move(BOB, ball(0, 1))])
    assert outcome(t, oracle).winner == UNDECIDED
