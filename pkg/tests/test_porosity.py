from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmsgame.metric import FormalBall, ball
from bmsgame.porosity import (
    CantorOracle,
    CoCountableOracle,
    ComplementOracle,
    FiniteSetOracle,
    UnionOracle,
    cantor_certificate,
    cantor_interval_disjoint,
    cantor_member,
    cantor_witness,
    certificate_map,
    finite_certificate,
    km_estimate,
    parse_certificate,
    parse_oracle,
    split_top,
    verify_certificate,
)


def ternary_member(x, depth=40):
    """Independent check via bounded-depth interval removal."""
    lo, hi = F(0), F(1)
    if not 0 <= x <= 1:
        return False
    for _ in range(depth):
        third = (hi - lo) / 3
        if lo + third < x < hi - third:
            return False
        lo, hi = (lo, lo + third) if x <= lo + third else (hi - third, hi)
    return True


@pytest.mark.parametrize("x,expected", [
    (F(0), True), (F(1), True), (F(1, 3), True), (F(2, 3), True), (F(1, 4), True),
    (F(3, 4), True), (F(1, 2), False), (F(1, 10), True), (F(5, 9), False), (F(-1, 3), False),
])
def test_cantor_member_values(x, expected):
    assert cantor_member(x) is expected


@given(st.fractions(min_value=-1, max_value=2, max_denominator=3 ** 6))
def test_cantor_member_matches_interval_removal(x):
    if x.denominator % 3 == 0 or x.denominator in (1, 2, 4, 5, 7, 8, 10, 13):
        assert cantor_member(x) == ternary_member(x)


def test_cantor_interval_disjoint():
    assert cantor_interval_disjoint(F(2, 5), F(3, 5))
    assert not cantor_interval_disjoint(F(1, 3), F(1, 2))
    assert cantor_interval_disjoint(F(1, 3), F(1, 2), a_open=True)


@settings(max_examples=300)
@given(st.fractions(min_value=-1, max_value=2, max_denominator=243),
       st.fractions(min_value=F(1, 729), max_value=1, max_denominator=729))
def test_cantor_hole_is_open_gap(x, r):
    rep = verify_certificate(cantor_certificate(), [FormalBall((x,), r)])
    assert rep.ok, rep.failures
    (y,) = cantor_witness(x, r)
    # the hole's centre itself is never in C
    assert not cantor_member(y)


def test_certificate_rejects_large_radius():
    with pytest.raises(ValueError):
        cantor_certificate().hole(ball(0, 2))


def test_finite_certificate_and_r0():
    cert = parse_certificate("finite{0;1/2}", beta=F(1, 4))
    assert cert.r0 == F(1, 8)
    samples = [ball(F(k, 64), F(1, 8)) for k in range(-16, 48)]
    assert verify_certificate(cert, samples).ok
    assert finite_certificate([], F(1, 3), 1).hole(ball(0, 1)) == ball(0, "1/3")


def test_affine_certificate():
    cert = parse_certificate("affine(cantor;1;2)")
    assert cert.r0 == 1 and cert.oracle.point_member((F(2),))
    samples = [ball(2 + F(k, 81), F(1, 27)) for k in range(-10, 91)]
    assert verify_certificate(cert, samples).ok


def test_verify_certificate_catches_wrong_beta():
    rep = verify_certificate(cantor_certificate(), [ball(F(1, 2), F(1, 2))], beta=F(1, 2))
    assert not rep.ok


def test_parse_oracle_forms():
    assert isinstance(parse_oracle("cantor"), CantorOracle)
    u = parse_oracle("union(cantor|finite{5})")
    assert isinstance(u, UnionOracle) and u.point_member((F(5),))
    c = parse_oracle("complement(finite{0})")
    assert isinstance(c, ComplementOracle) and not c.point_member((F(0),))
    cc = parse_oracle("cocountable:sb=5")
    assert isinstance(cc, CoCountableOracle) and not cc.point_member((F(1, 3),))
    with pytest.raises(ValueError):
        parse_certificate("nope")
    assert split_top("affine(a;1;2);x", ";") == ["affine(a;1;2)", "x"]


def test_union_three_valued():
    u = UnionOracle([FiniteSetOracle([0]), CoCountableOracle([])])
    assert u.ball_disjoint(ball(5, 1)) is False
    assert UnionOracle([FiniteSetOracle([0])]).ball_disjoint(ball(5, 1)) is True


def test_km_estimate_nested_and_kept_points_avoid_cantor_holes():
    cert = cantor_certificate()
    region = ball(F(1, 2), F(1, 2))
    coarse = km_estimate(certificate_map(cert), 3, region, F(1, 81))
    fine = km_estimate(certificate_map(cert), 6, region, F(1, 81))
    assert set(fine.kept) >= set(coarse.kept)
    for p, (b, g) in coarse.deleted.items():
        assert not cantor_member(p[0])
    # every Cantor grid point survives: holes miss C
    assert all(p in coarse.kept for p in coarse.kept + [(F(0),), (F(1, 3),)] if cantor_member(p[0]))


def test_km_estimate_requires_fine_grid():
    with pytest.raises(ValueError):
        km_estimate(certificate_map(cantor_certificate()), 3, ball(0, 1), F(1, 2))
