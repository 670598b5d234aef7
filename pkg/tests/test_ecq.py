"""Tests for elliptic curve invariants, minimal pairs, twists, and a_p."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncong.ecq import (
    BadReductionError,
    EllipticCurveQ,
    SingularCurveError,
    ap,
    legendre,
    minimal_c4c6,
    prime_range,
    quadratic_twist,
)


def count_points_naive(a, b, p):
    """Independent oracle: enumerate all (x, y) on y^2 = x^3 + ax + b over F_p."""
    n = 1  # point at infinity
    for x in range(p):
        rhs = (x * x * x + a * x + b) % p
        for y in range(p):
            if (y * y - rhs) % p == 0:
                n += 1
    return n


def ap_naive(a, b, p):
    return p + 1 - count_points_naive(a % p, b % p, p)


E162C1 = EllipticCurveQ.from_ainvs([1, -1, 0, 3, -1], label="162c1")
E4466C2 = EllipticCurveQ.from_ainvs([1, -1, 1, -1755, -27349], label="4466c2")


# ---------------------------------------------------------------------------
# construction and invariants


def test_singular_rejected():
    with pytest.raises(SingularCurveError):
        EllipticCurveQ.from_short(0, 0)


def test_c4c6_syzygy():
    rng = random.Random(1)
    for _ in range(20):
        a = rng.randint(-50, 50)
        b = rng.randint(-50, 50)
        if 4 * a**3 + 27 * b**2 == 0:
            continue
        e = EllipticCurveQ.from_short(a, b)
        assert e.c4**3 - e.c6**2 == 1728 * e.disc


def test_parse_round_trip():
    e = EllipticCurveQ.from_text("[1,-1,0,3,-1]")
    assert e.ainvs() == [1, -1, 0, 3, -1]
    e2 = EllipticCurveQ.from_text("[3/2, -7]")
    assert e2.a4 == Fraction(3, 2) and e2.a6 == -7


# ---------------------------------------------------------------------------
# short_pair


def test_short_pair_162c1():
    # printed values for 162c1
    assert E162C1.short_pair() == (3645, -13122)


def test_short_pair_already_short():
    e = EllipticCurveQ.from_short(0, 1)
    assert e.short_pair() == (0, 1)


def test_short_pair_4466c2_isomorphic():
    a, b = E4466C2.short_pair()
    assert (a, b) == (-27 * E4466C2.c4, -54 * E4466C2.c6)
    es = EllipticCurveQ.from_short(a, b)
    assert es.j == E4466C2.j
    assert es.minimal_pair() == E4466C2.minimal_pair()


# ---------------------------------------------------------------------------
# minimal_c4c6


def minimal_by_uscan(c4, c6):
    """Oracle: exhaustively scan admissible u to confirm minimality."""
    c4, c6 = int(c4), int(c6)
    from ncong.ecq import _kraus_ok_2, _kraus_ok_3
    assert _kraus_ok_2(c4, c6) and _kraus_ok_3(c4, c6)
    for u in range(2, 200):
        if c4 % u**4 == 0 and c6 % u**6 == 0:
            if _kraus_ok_2(c4 // u**4, c6 // u**6) and _kraus_ok_3(c4 // u**4, c6 // u**6):
                return False  # reducible, not minimal
    return True


def test_minimal_fixed_point():
    c4m, c6m = minimal_c4c6(E162C1.c4, E162C1.c6)
    assert (c4m, c6m) == minimal_c4c6(c4m, c6m)


def test_minimal_forced_u_descent():
    c4m, c6m = minimal_c4c6(E162C1.c4, E162C1.c6)
    assert minimal_c4c6(c4m * 5**4, c6m * 5**6) == (c4m, c6m)


def test_minimal_of_short_pair_matches_long_model():
    a, b = E162C1.short_pair()
    es = EllipticCurveQ.from_short(a, b)
    got = minimal_c4c6(es.c4, es.c6)
    assert got == (E162C1.c4, E162C1.c6)  # the Cremona model is minimal
    assert minimal_by_uscan(*got)


def test_minimal_invariance_under_scaling():
    for e in (E162C1, E4466C2, EllipticCurveQ.from_short(0, 1),
              EllipticCurveQ.from_short(1, 0)):
        base = e.minimal_pair()
        for u in (2, 3, 5, 6):
            assert minimal_c4c6(base[0] * u**4, base[1] * u**6) == base


def test_minimal_rational_input():
    c4m, c6m = E162C1.minimal_pair()
    got = minimal_c4c6(Fraction(c4m, 5**4), Fraction(c6m, 5**6))
    assert got == (c4m, c6m)


def test_minimal_singular_rejected():
    with pytest.raises(SingularCurveError):
        minimal_c4c6(1, 1)


# ---------------------------------------------------------------------------
# ap


def test_ap_supersingular_7():
    e = EllipticCurveQ.from_short(1, 0)
    assert e.ap(7) == ap_naive(1, 0, 7) == 0  # 7 = 3 mod 4


def test_ap_x3_plus_1_at_5():
    e = EllipticCurveQ.from_short(0, 1)
    assert e.ap(5) == ap_naive(0, 1, 5) == 0


def test_ap_matches_naive_enumeration():
    rng = random.Random(4)
    curves = []
    while len(curves) < 10:
        a, b = rng.randint(-30, 30), rng.randint(-30, 30)
        if 4 * a**3 + 27 * b**2 != 0:
            curves.append(EllipticCurveQ.from_short(a, b))
    for e in curves:
        dmin = e.minimal_disc()
        c4m, c6m = e.minimal_pair()
        for p in prime_range(50, start=5):
            if dmin % p == 0:
                continue
            assert e.ap(p) == ap_naive(-27 * c4m, -54 * c6m, p)


def test_ap_hasse_bound():
    rng = random.Random(6)
    for _ in range(5):
        a, b = rng.randint(-99, 99), rng.randint(-99, 99)
        if 4 * a**3 + 27 * b**2 == 0:
            continue
        e = EllipticCurveQ.from_short(a, b)
        for p in prime_range(200, start=5):
            if e.minimal_disc() % p:
                assert e.ap(p) ** 2 <= 4 * p


def test_ap_bad_prime_rejected():
    e = EllipticCurveQ.from_short(0, 1)  # disc -432 = -2^4 3^3
    with pytest.raises(BadReductionError):
        ap(e, 3)
    e2 = EllipticCurveQ.from_short(0, 5**6)  # 5 | disc of this model but not minimal
    assert e2.minimal_pair() == EllipticCurveQ.from_short(0, 1).minimal_pair()
    assert e2.ap(5) == EllipticCurveQ.from_short(0, 1).ap(5)


# ---------------------------------------------------------------------------
# quadratic twists


def test_twist_by_one():
    e = quadratic_twist(E162C1, 1)
    assert e.minimal_pair() == E162C1.minimal_pair()


def test_twist_preserves_j():
    rng = random.Random(8)
    for _ in range(10):
        a, b = rng.randint(-20, 20), rng.randint(-20, 20)
        if 4 * a**3 + 27 * b**2 == 0:
            continue
        e = EllipticCurveQ.from_short(a, b)
        d = rng.choice([-1, 2, -2, 3, 5, -7, 11])
        assert quadratic_twist(e, d).j == e.j


def test_twist_zero_rejected():
    with pytest.raises(ValueError):
        quadratic_twist(E162C1, 0)


def test_twist_ap_relation():
    # a_p(twist by d) = (d/p) a_p(E) for p not dividing 6 d Delta, both sides
    # checked against the naive enumeration oracle
    e = EllipticCurveQ.from_short(2, 3)
    for d in (-1, 5, -6):
        ed = quadratic_twist(e, d)
        for p in prime_range(60, start=5):
            if (6 * d * e.minimal_disc()) % p == 0:
                continue
            a, b = e.short_pair()
            assert e.ap(p) == ap_naive(a, b, p)
            assert ed.ap(p) == legendre(d, p) * e.ap(p)


# ---------------------------------------------------------------------------
# hypothesis properties


@settings(max_examples=40, deadline=None)
@given(st.integers(-40, 40), st.integers(-40, 40))
def test_syzygy_hypothesis(a, b):
    if 4 * a**3 + 27 * b**2 == 0:
        return
    e = EllipticCurveQ.from_short(a, b)
    assert e.c4**3 - e.c6**2 == 1728 * e.disc


@settings(max_examples=25, deadline=None)
@given(st.integers(-15, 15), st.integers(-15, 15), st.sampled_from([2, 3, 5, 6]))
def test_minimal_idempotent_hypothesis(a, b, u):
    if 4 * a**3 + 27 * b**2 == 0:
        return
    e = EllipticCurveQ.from_short(a, b)
    c4m, c6m = e.minimal_pair()
    assert minimal_c4c6(c4m, c6m) == (c4m, c6m)
    assert minimal_c4c6(c4m * u**4, c6m * u**6) == (c4m, c6m)
