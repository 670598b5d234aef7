"""Worked-example fixtures: curves, minimised models with their printed
substitutions and invariants, rational points with expected outputs, and the
one-parameter families with their printed specialization rows.

Curve coefficients marked "external data" were sourced from the standard
elliptic curve database tables; labels are display metadata only and never
block computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ecq import EllipticCurveQ
from .exactmath import RatMatrix, SparsePoly, ratof, solve_linear, substitute_linear
from .models import (
    ModelTransform,
    TwistedModel,
    apply_transform,
    build_model,
)

F = Fraction


# ---------------------------------------------------------------------------
# curve table (label -> a-invariants); printed equations from the worked
# examples, plus a few standard-table entries (external data)

CURVES = {
    # printed in the worked examples
    "162c1": [1, -1, 0, 3, -1],
    "162c2": [1, -1, 0, -42, -100],
    "293706*": [1, -1, 0, -62930562, -192134303740],
    "17334f1": [1, -1, 0, -5473977, -4956193171],
    "624186*": [1, -1, 0, -11751402282, 360746315347508],
    "47775z1": [0, -1, 1, -32013, 2215478],
    "429975*": [0, 0, 1, -314688780, -2148671872069],
    "494901225*": [0, 0, 1, -23634650164230, -21037908383222056594],
    "374865*": [1, 1, 0, -60068738107, 4858035498982726],
    "1782b1": [1, -1, 0, 48, 224],
    "1782b2": [1, -1, 0, -447, -7795],
    "447282*": [1, -1, 0, -17552171922, -227953575178678],
    "4466c2": [1, -1, 1, -1755, -27349],
    "1174558*": [1, -1, 1, 117885809240, 16240157710556505],
    # external data (standard tables)
    "11a2": [0, -1, 1, -7820, -263580],
    "11a3": [0, -1, 1, 0, 0],
    "49a1": [1, -1, 0, -2, -1],
    "49a2": [1, -1, 0, -37, -78],
    "361a1": [0, 0, 1, -38, 90],
}


def curve(label):
    return EllipticCurveQ.from_ainvs(CURVES[label], label=label)


# ---------------------------------------------------------------------------
# printed minimised models


def _p7(expr):
    x, y, z = SparsePoly.gens(3)
    return eval(expr, {"x": x, "y": y, "z": z})  # noqa: S307 - static literals


def _p9(expr):
    x, y, z, t = SparsePoly.gens(4)
    return eval(expr, {"x": x, "y": y, "z": z, "t": t})  # noqa: S307


def _p11(expr):
    v, w, x, y, z = SparsePoly.gens(5)
    return eval(expr, {"v": v, "w": w, "x": x, "y": y, "z": z})  # noqa: S307


@dataclass(frozen=True)
class ModelFixture:
    fixture_id: str
    label: str                 # base curve label
    curve_ainvs: tuple         # long or short coefficients of E
    ab: tuple                  # the (a, b) the worked example used
    n: int
    sign: str
    matrix: RatMatrix          # printed substitution
    printed_polys: tuple       # the minimised model as printed
    printed_psi: F             # invariant of the minimised model
    points: tuple              # ((point, expected curve label), ...)
    search_height: int


MODEL_FIXTURES = {}


def _add(fx):
    MODEL_FIXTURES[fx.fixture_id] = fx


_add(ModelFixture(
    "ex7_1", "162c1", (1, -1, 0, 3, -1), (3645, -13122), 7, "+",
    RatMatrix([[0, 36, -9], [1944, -972, -1215], [0, 0, 1]]),
    (_p7("3*x**3*z + 3*x**2*y**2 - 6*x**2*y*z + 3*x**2*z**2 - 3*x*y**3"
         " + 3*x*z**3 + 2*y**4 - y**3*z - 9*y**2*z**2 + 4*y*z**3 - 5*z**4"),),
    F(-2 * 3**4),
    (((1, 0, 0), "162c1"), ((3, -2, -1), "293706*")),
    5,
))

_add(ModelFixture(
    "ex7_1m", "162c1", (1, -1, 0, 3, -1), (3645, -13122), 7, "-",
    RatMatrix([[18, 18, 9], [0, 0, 1], [-486, 1458, 1944]]),
    (_p7("-x**3*y - x**3*z - 6*x**2*z**2 + 6*x*y**2*z - 6*x*y*z**2"
         " + 6*x*z**3 + 2*y**4 + 2*y**3*z - 6*y**2*z**2 - 38*y*z**3 - 8*z**4"),),
    F(2**2 * 3**4),
    (((1, 0, 0), "162c2"), ((1, 1, -1), "17334f1"), ((4, -1, 1), "624186*")),
    5,
))

_add(ModelFixture(
    "ex9_1", "47775z1", (0, -1, 1, -32013, 2215478), (-41489280, 102867483600), 9, "+",
    RatMatrix([
        [2520473760, 937149484320, -1998984627360, -152410870080],
        [0, 79644600, -185343480, -3827880],
        [0, -22932, 47040, 6468],
        [0, -6, 13, 1]]),
    (_p9("-x**2*z + x**2*t + 4*x*y*z + 2*x*y*t - 3*x*z**2 + 2*x*z*t"
         " - 3*x*t**2 + 6*y**3 + 14*y**2*z + y**2*t + 6*y*z**2 - 4*y*z*t"
         " + 9*y*t**2 - 6*z**3 + 27*z**2*t - 13*z*t**2 - t**3"),
     _p9("-3*x**2*y + 4*x**2*z + 3*x**2*t + 3*x*y**2 + 20*x*y*z - 12*x*y*t"
         " - 3*x*z**2 - 32*x*z*t + 25*x*t**2 + 21*y**3 + 16*y**2*z"
         " - 24*y**2*t - 12*y*z**2 + 100*y*z*t + 34*y*t**2 + 39*z**3"
         " - 21*z**2*t - 56*z*t**2 - 11*t**3")),
    F(-(3**3) * 5**6 * 7**5 * 13**4),
    (((1, 0, 0, 0), "47775z1"), ((4, -1, -1, 0), "429975*"),
     ((1, 2, -1, 0), "494901225*")),
    5,
))

_add(ModelFixture(
    "ex9_2", "201c1", (-1029699, 402173694), (-1029699, 402173694), 9, "-",
    RatMatrix([
        [-26471709, -23136696, 20106774, -20376135],
        [-45147, -39828, 33990, -34509],
        [90294, 79332, -68304, 69342],
        [77, 68, -58, 59]]),
    (_p9("-x**3 + 4*x**2*y + 3*x**2*z - x**2*t + 6*x*y**2 + 2*x*y*z"
         " - 2*x*y*t - 6*x*z**2 + 4*x*z*t - 11*x*t**2 + y**3 + 7*y**2*t"
         " - 2*y*z**2 + 4*y*z*t - 4*y*t**2 + 6*z**3 - 7*z**2*t + 4*z*t**2"
         " + t**3"),
     _p9("2*x**3 - x**2*y + 5*x**2*t - 10*x*y**2 - 2*x*y*z + 16*x*y*t"
         " - 3*x*z**2 + 4*x*z*t + 8*x*t**2 - 5*y**3 - y**2*z - 3*y**2*t"
         " - y*z**2 - 2*y*z*t + 12*y*t**2 + 3*z**3 - 4*z**2*t + 2*z*t**2"
         " - 3*t**3")),
    F(-(3**4) * 67**5),
    (((1, -2, -1, 0), "374865*"),),
    5,
))

_add(ModelFixture(
    "ex11_1", "1782b1", (1, -1, 0, 48, 224), (765, 15102), 11, "+",
    RatMatrix([
        [984, 12900, -9093, -34056, 13689],
        [-2040, -24252, -3315, 0, -16857],
        [328, 164, -435, 0, -57],
        [-352, 88, -264, 264, -1056],
        [-8, -4, -13, 0, 25]]),
    (_p11("-v**2*w + v**2*x - v**2*y + 2*v**2*z - v*w**2 + 4*v*w*z"
          " - 4*v*x**2 - 8*v*x*y + 2*v*x*z + 6*v*y*z + 3*v*z**2 + 2*w**3"
          " - 3*w**2*x - 2*w**2*y + 8*w**2*z + 6*w*x**2 + 2*w*x*y"
          " + 2*w*x*z + 6*w*y**2 - 6*w*y*z + 9*w*z**2 - x**3 - x**2*z"
          " - 3*x*y**2 - 6*x*y*z - 9*x*z**2 - 6*y**3 + 9*y**2*z"
          " + 3*y*z**2 - 7*z**3"),),
    F(2**2 * 3**4 * 11**2),
    (((-1, 5, 1, 2, 1), "1782b1"), ((0, 0, 0, 1, 0), "1782b2"),
     ((1, 1, -1, 0, -4), "447282*")),
    12,
))

_add(ModelFixture(
    "ex11_2", "4466c1", (85, -83162), (85, -83162), 11, "-",
    RatMatrix([
        [4096, -1408, 128, -1312, 45088],
        [0, 128, 128, 32, 110],
        [0, 0, -256, -96, -103],
        [0, 0, 0, -32, -11],
        [0, 0, 0, 0, -1]]),
    (_p11("-2*v**2*z - 4*v*w*y + 12*v*x*y + 4*v*x*z + 5*v*y**2 + 6*v*y*z"
          " - 43*v*z**2 - w**2*x + w**2*y - 4*w*x*y - 2*w*x*z - 3*w*y**2"
          " + 196*w*y*z + 83*w*z**2 - 11*x**3 - 12*x**2*y - 9*x**2*z"
          " - 11*x*y**2 + 366*x*y*z + 125*x*z**2 + 322*y**3 + 447*y**2*z"
          " + 275*y*z**2 + 632*z**3"),),
    F(-(2**2) * 7 * 11**2 * 29**2),
    (((-7, 11, 3, 1, 1), "4466c2"), ((7830, -3553, 510, -281, 71), "1174558*")),
    12,
))


def fixture_base_curve(fx: ModelFixture) -> EllipticCurveQ:
    return EllipticCurveQ.from_ainvs(list(fx.curve_ainvs), label=fx.label)


def fixture_model(fixture_id: str) -> TwistedModel:
    """Build the fixture's minimised model: construct the (a, b) model, apply
    the printed substitution with exactly recovered scalar/pencil, and check
    the result against the printed equations and invariant."""
    fx = MODEL_FIXTURES[fixture_id]
    a, b = fx.ab
    m0 = build_model(a, b, fx.n, fx.sign)
    if fx.n == 9:
        subs = [substitute_linear(p, fx.matrix) for p in m0.polys]
        monos = sorted(set(subs[0].terms) | set(subs[1].terms)
                       | set(fx.printed_polys[0].terms)
                       | set(fx.printed_polys[1].terms))
        rows = [[subs[0].terms.get(mn, 0), subs[1].terms.get(mn, 0)]
                for mn in monos]
        pencil_rows = []
        for i in (0, 1):
            rhs = [fx.printed_polys[i].terms.get(mn, 0) for mn in monos]
            sol = solve_linear(RatMatrix(rows), rhs)
            if sol is None:
                raise AssertionError(f"{fixture_id}: printed model is not a "
                                     "pencil combination of the substituted one")
            pencil_rows.append(sol)
        t = ModelTransform(fx.matrix, F(1), RatMatrix(pencil_rows))
    else:
        sub = substitute_linear(m0.polys[0], fx.matrix)
        le, lc = fx.printed_polys[0].leading()
        cc = sub.terms.get(le)
        if cc is None:
            raise AssertionError(f"{fixture_id}: substitution mismatch")
        mu = F(lc) / F(cc)
        t = ModelTransform(fx.matrix, mu)
    m = apply_transform(m0, t)
    if tuple(m.polys) != tuple(fx.printed_polys):
        raise AssertionError(f"{fixture_id}: transformed model differs from printed")
    if m.psi != fx.printed_psi:
        raise AssertionError(f"{fixture_id}: invariant {m.psi} differs from "
                             f"printed {fx.printed_psi}")
    return m


# ---------------------------------------------------------------------------
# one-parameter families with printed specializations


def _uni(coeffs):
    """Univariate integer polynomial as a callable of an exact argument."""
    def val(t):
        t = ratof(t)
        acc = F(0)
        for c in coeffs:          # coeffs high-degree first
            acc = acc * t + c
        return acc
    return val


@dataclass(frozen=True)
class FamilyRow:
    t: F
    d: int
    label1: str
    label2: str


@dataclass(frozen=True)
class QtFamily:
    family_id: str
    n: int
    sign: str
    rows: tuple


QT7 = QtFamily("qt7", 7, "-", (
    FamilyRow(F(-16), -38, "361a1", "361a2"),
    FamilyRow(F(8), -10, "700g1", "2100q1"),
    FamilyRow(F(2), -2, "2116b1", "10580h1"),
))


def qt7_curve_ab(t):
    t = ratof(t)
    j = 27 * t**3 * (5 * t - 56) / (t - 1)
    a = -27 * j / (4 * (j - 1728))
    return a, a


def qt7_point(t):
    t = ratof(t)
    return (F(0),
            -4 * (t**2 - 12 * t + 8) * (5 * t**2 + 4 * t + 8),
            9 * t**2 * (t + 4) * (5 * t - 56))


QT9 = QtFamily("qt9", 9, "-", (
    FamilyRow(F(-1), 6, "24a4", "24a5"),
    FamilyRow(F(-1, 3), 6, "243a1", "243b2"),
    FamilyRow(F(-1, 2), -6, "6400u1", "6400u2"),
))


def qt9_curve_ab(t):
    t = ratof(t)
    a = 3 * (3 * t + 1) * (6 * t**3 - 3 * t - 1) * (9 * t**3 - 9 * t - 4) ** 2
    b = (2 * (3 * t**3 + 27 * t**2 + 21 * t + 4) * (6 * t**3 - 3 * t - 1) ** 2
         * (9 * t**3 - 9 * t - 4) ** 2)
    return a, b


def qt9_point(t):
    t = ratof(t)
    return (-(6 * t**3 - 3 * t - 1) * (9 * t**3 - 9 * t - 4), t, F(1), F(0))


def qt9_lambda_mu(t):
    t = ratof(t)
    lam = ((3 * t + 1) * (9 * t**3 - 9 * t - 4) * (6 * t**3 - 3 * t - 1)
           * (180 * t**4 + 321 * t**3 + 216 * t**2 + 66 * t + 8))
    mu = 3 * (369 * t**6 + 1107 * t**5 + 1431 * t**4 + 1017 * t**3
              + 414 * t**2 + 90 * t + 8)
    return lam, mu


QT11 = QtFamily("qt11", 11, "+", (
    FamilyRow(F(2), -6, "11a3", "11a2"),
    FamilyRow(F(1), 42, "49a1", "49a4"),
    FamilyRow(F(-3), -2, "216b1", "1512c1"),
))


def qt11_curve_ab(t):
    t = ratof(t)
    den = t**3 - t**2 + 4 * t + 24
    a = -3 * (t - 3) * (t**4 - 5 * t**2 - 24 * t - 92) / den
    b = -2 * (t - 3) * (t**5 - t**4 - 11 * t**3 - 43 * t**2 - 62 * t - 316) / den
    return a, b


def qt11_point(t):
    t = ratof(t)
    den = t**3 - t**2 + 4 * t + 24
    return (t**6 + t**5 + 31 * t**4 + 259 * t**3 + 520 * t**2 + 676 * t + 1248,
            -(t - 3) * (t**5 + 4 * t**4 + 43 * t**3 + 100 * t**2 - 44 * t - 320),
            -(t**2 + 3 * t + 14) * den,
            F(0),
            (t + 4) * den)


_QT11_A_TAIL = _uni([1, -250, 3473, -23824, 106654, -354556, 890186, -1710568,
                     2386357, -2054170, 1799781, 956680, 3570796])
_QT11_B_TAIL = _uni([1, 476, -27815, 556718, -6046664, 42450848, -213832636,
                     823702888, -2497998850, 5954643736, -10798748818,
                     13644339892, -7927895108, -10398245632, 25581636532,
                     -10366268760, -60876061719, 164062110060, -98120800447,
                     262948421518, 141270230564])


def qt11_congruent_ab(t):
    """The printed directly 11-congruent family member y^2 = x^3 + A x + B."""
    t = ratof(t)
    den = t**3 - t**2 + 4 * t + 24
    A = -3 * (t - 3) * (t**2 - 8 * t - 17) * den * _QT11_A_TAIL(t)
    B = -2 * (t - 3) * den**2 * _QT11_B_TAIL(t)
    return A, B


QT_FAMILIES = {"qt7": QT7, "qt9": QT9, "qt11": QT11}


# ---------------------------------------------------------------------------
# introductory congruent pairs (external data; see tools/derive_intro_pairs.py
# for the reconstruction procedure)

INTRO_PAIRS = []  # filled in below once derived: (label1, ainvs1, label2, ainvs2, n)
