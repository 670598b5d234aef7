"""Tests for the exact arithmetic kernel."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncong.exactmath import (
    RatMatrix,
    SparsePoly,
    det,
    divide_single,
    numeric_matrix_rank,
    poly_matrix_det,
    solve_linear,
    substitute_linear,
)


def cofactor_det(rows):
    """Independent determinant oracle: recursive cofactor expansion."""
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        sign = -1 if j % 2 else 1
        total += sign * Fraction(rows[0][j]) * cofactor_det(minor)
    return total


def random_poly(rng, nvars, deg, nterms, coeff_bound=9):
    terms = {}
    for _ in range(nterms):
        e = [0] * nvars
        for _ in range(deg):
            e[rng.randrange(nvars)] += 1
        c = rng.randint(-coeff_bound, coeff_bound)
        if c:
            terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return SparsePoly(nvars, {e: c for e, c in terms.items() if c})


# ---------------------------------------------------------------------------
# det


def test_det_identity():
    assert det(RatMatrix.identity(3)) == 1


def test_det_2x2():
    assert det(RatMatrix([[2, 3], [5, 7]])) == -1


def test_det_hilbert_3x3():
    hilbert = [[Fraction(1, i + j + 1) for j in range(3)] for i in range(3)]
    expected = cofactor_det(hilbert)
    assert expected == Fraction(1, 2160)
    assert det(RatMatrix(hilbert)) == expected


def test_det_rejects_nonsquare():
    with pytest.raises(ValueError):
        det(RatMatrix([[1, 2, 3], [4, 5, 6]]))


def test_det_matches_cofactor_oracle_on_random_matrices():
    rng = random.Random(7)
    for n in range(1, 6):
        for _ in range(8):
            rows = [[Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(n)]
                    for _ in range(n)]
            assert det(RatMatrix(rows)) == cofactor_det(rows)


def test_det_multiplicative():
    rng = random.Random(11)
    for n in range(2, 6):
        for _ in range(5):
            m1 = RatMatrix([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
            m2 = RatMatrix([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
            assert det(m1 @ m2) == det(m1) * det(m2)


# ---------------------------------------------------------------------------
# substitute_linear


def test_substitute_identity():
    x, y, z = SparsePoly.gens(3)
    f = x**2 * y
    assert substitute_linear(f, RatMatrix.identity(3)) == f


def test_substitute_swap():
    x, y, z = SparsePoly.gens(3)
    f = x**2 * y
    swap = RatMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert substitute_linear(f, swap) == y**2 * x


def test_substitute_composition():
    rng = random.Random(3)
    f = random_poly(rng, 3, 3, 8)
    m1 = RatMatrix([[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)])
    m2 = RatMatrix([[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)])
    lhs = substitute_linear(substitute_linear(f, m1), m2)
    rhs = substitute_linear(f, m1 @ m2)
    assert lhs == rhs


def test_substitute_agrees_with_pointwise_oracle():
    # substitute_linear(f, M)(P) must equal f(M @ P) for any point P
    rng = random.Random(5)
    for _ in range(10):
        f = random_poly(rng, 4, 3, 6)
        m = RatMatrix([[rng.randint(-3, 3) for _ in range(4)] for _ in range(4)])
        g = substitute_linear(f, m)
        pt = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(4)]
        assert g.evaluate(pt) == f.evaluate(m @ pt)


def test_substitute_preserves_homogeneous_degree():
    rng = random.Random(9)
    for _ in range(10):
        nv = rng.choice([3, 4, 5])
        deg = rng.choice([2, 3, 4])
        f = random_poly(rng, nv, deg, 6)
        if f.is_zero():
            continue
        m = RatMatrix([[rng.randint(-3, 3) for _ in range(nv)] for _ in range(nv)])
        g = substitute_linear(f, m)
        assert g.is_homogeneous()
        assert g.is_zero() or g.degree() == deg


def test_substitute_dimension_mismatch():
    x, y, z = SparsePoly.gens(3)
    with pytest.raises(ValueError):
        substitute_linear(x * y, RatMatrix.identity(2))


# ---------------------------------------------------------------------------
# divide_single


def test_divide_self():
    x, y, z = SparsePoly.gens(3)
    f = x**3 * y + 2 * y * z**2
    q, r = divide_single(f, f)
    assert q == SparsePoly.constant(3, 1)
    assert r.is_zero()


def test_divide_single_step():
    x, y = SparsePoly.gens(2)
    q, r = divide_single(x**4 + y**4, x)
    assert q == x**3
    assert r == y**4


def test_divide_by_zero_raises():
    x, y = SparsePoly.gens(2)
    with pytest.raises(ZeroDivisionError):
        divide_single(x, SparsePoly.zero(2))


def test_divide_remul_random():
    rng = random.Random(17)
    for _ in range(100):
        nv = rng.choice([2, 3])
        f = random_poly(rng, nv, rng.choice([2, 3, 4, 5]), 8)
        g = random_poly(rng, nv, rng.choice([1, 2, 3]), 4)
        if g.is_zero():
            continue
        q, r = divide_single(f, g)
        assert q * g + r == f
        ge, _ = g.leading()
        for e in r.terms:
            assert not all(e[i] >= ge[i] for i in range(nv))


# ---------------------------------------------------------------------------
# solve_linear


def test_solve_identity():
    b = [Fraction(3), Fraction(-1, 2), Fraction(7)]
    assert solve_linear(RatMatrix.identity(3), b) == b


def test_solve_singular_consistent():
    a = RatMatrix([[1, 2], [2, 4]])
    b = [Fraction(3), Fraction(6)]
    x = solve_linear(a, b)
    assert x is not None
    assert a @ x == b


def test_solve_inconsistent():
    a = RatMatrix([[1, 2], [2, 4]])
    assert solve_linear(a, [Fraction(3), Fraction(7)]) is None


def test_solve_random_8x8():
    rng = random.Random(23)
    done = 0
    while done < 5:
        a = RatMatrix([[rng.randint(-9, 9) for _ in range(8)] for _ in range(8)])
        b = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(8)]
        x = solve_linear(a, b)
        if x is None:
            continue
        # back-substitution oracle
        assert a @ x == b
        done += 1


# ---------------------------------------------------------------------------
# poly_matrix_det / rank helpers


def test_poly_matrix_det_matches_scalar_det():
    rng = random.Random(29)
    for n in (2, 3, 4):
        rows_num = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
        entries = [[SparsePoly.constant(2, c) for c in r] for r in rows_num]
        d = poly_matrix_det(entries)
        assert d == SparsePoly.constant(2, cofactor_det(rows_num))


def test_poly_matrix_det_hessian_symmetry():
    x, y, z = SparsePoly.gens(3)
    f = x**3 * y + y**3 * z + z**3 * x
    h = f.hessian()
    d = poly_matrix_det(h)
    # det of the Hessian of the Klein quartic is -54*H with H of degree 6
    assert d.is_homogeneous() and d.degree() == 6


def test_numeric_rank():
    assert numeric_matrix_rank([[1, 2], [2, 4]]) == 1
    assert numeric_matrix_rank([[1, 0], [0, 1]]) == 2
    assert numeric_matrix_rank([[0, 0], [0, 0]]) == 0


# ---------------------------------------------------------------------------
# hypothesis property tests


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3),
                min_size=3, max_size=3),
       st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3),
                min_size=3, max_size=3))
def test_det_multiplicative_hypothesis(r1, r2):
    m1, m2 = RatMatrix(r1), RatMatrix(r2)
    assert det(m1 @ m2) == det(m1) * det(m2)


@settings(max_examples=40, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(1, 10))
def test_fraction_terms_stay_reduced(a, b, d):
    x, y = SparsePoly.gens(2)
    f = Fraction(a, d) * x + Fraction(b, d) * y
    for c in f.terms.values():
        assert isinstance(c, (int, Fraction))
        if isinstance(c, Fraction):
            assert c.denominator > 0
