"""Models of X(n) and its twists for n in {7, 9, 11}.

Four families of models are constructed:

* canonical: the Klein quartic, the X(9) cubic pair, and the quintic-variable
  cubic whose Hessian singular locus is X(11);
* main twists X_E(n), X_E^-(n) in terms of the short Weierstrass pair (a, b);
* alternative twists in terms of (c4, c6), linked to the main ones by an
  explicit linear change of coordinates (used for cross-validation);
* diagonal twists X[xi_1, ...] available when E[n] contains mu_n.

Every model carries the scalar invariant psi, which transforms by
mu^3 (det M)^4 (n=7), (det pencil)^6 (det M)^9 (n=9), mu^5 (det M)^3 (n=11)
under changes of coordinates, and the accumulated transform back to the frame
the model was built in.  A point P of a transformed model corresponds to the
point M @ P of the original frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd

from .ecq import EllipticCurveQ, SingularCurveError
from .exactmath import (
    Rat,
    RatMatrix,
    SparsePoly,
    det,
    numeric_matrix_rank,
    ratof,
    substitute_linear,
)

NVARS = {7: 3, 9: 4, 11: 5}
VAR_NAMES = {7: "xyz", 9: "xyzt", 11: "vwxyz"}


class ExcludedJInvariantError(ValueError):
    """j(E) in {0, 1728} where the model construction is not claimed."""


class NotAMemberError(ValueError):
    pass


# ---------------------------------------------------------------------------
# points


def normalize_point(coords):
    """Primitive integer representative with positive first nonzero entry."""
    fr = [ratof(c) for c in coords]
    if all(c == 0 for c in fr):
        raise ValueError("zero vector is not a projective point")
    den = 1
    for c in fr:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in fr]
    g = 0
    for c in ints:
        g = gcd(g, c)
    ints = [c // g for c in ints]
    for c in ints:
        if c:
            if c < 0:
                ints = [-v for v in ints]
            break
    return tuple(ints)


@dataclass(frozen=True)
class ProjPoint:
    """Primitive integer projective point (gcd 1, first nonzero entry > 0)."""

    coords: tuple

    def __init__(self, coords):
        object.__setattr__(self, "coords", normalize_point(coords))

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    @property
    def height(self):
        return max(abs(c) for c in self.coords)

    def __repr__(self):
        return "(" + ":".join(str(c) for c in self.coords) + ")"


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True)
class ModelTransform:
    """polys_new = mu * (polys_old o matrix); for n=9 the 2x2 pencil acts on
    the pair (F1, F2) before the coordinate substitution."""

    matrix: RatMatrix
    mu: Fraction = Fraction(1)
    pencil: RatMatrix | None = None

    @classmethod
    def identity(cls, n):
        pencil = RatMatrix.identity(2) if n == 9 else None
        return cls(RatMatrix.identity(NVARS[n]), Fraction(1), pencil)

    def is_identity(self):
        m = self.matrix
        if m != RatMatrix.identity(m.nrows) or self.mu != 1:
            return False
        return self.pencil is None or self.pencil == RatMatrix.identity(2)


def psi_factor(n, t: ModelTransform):
    d = det(t.matrix)
    if d == 0:
        raise ValueError("singular transform")
    if n == 7:
        return t.mu ** 3 * d ** 4
    if n == 9:
        dp = det(t.pencil) if t.pencil is not None else Fraction(1)
        if dp == 0:
            raise ValueError("singular pencil")
        return dp ** 6 * d ** 9
    if n == 11:
        return t.mu ** 5 * d ** 3
    raise ValueError(f"unsupported n={n}")


@dataclass(frozen=True)
class TwistedModel:
    n: int
    sign: str                   # "+" or "-"
    polys: tuple                # SparsePoly, degree 4 / 3,3 / 3
    base: tuple | None          # (a, b) of E, or None
    psi: Fraction
    transform: ModelTransform
    frame: str = "main"         # main | alt | canonical | diagonal
    theta: Fraction | None = None

    @property
    def nvars(self):
        return NVARS[self.n]

    def base_curve(self):
        if self.base is None:
            return None
        return EllipticCurveQ.from_short(*self.base)

    def content(self):
        from functools import reduce
        cs = [p.content() for p in self.polys]
        num = 0
        den = 1
        for c in cs:
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def is_integral(self):
        return all(
            not isinstance(c, Fraction) or c.denominator == 1
            for p in self.polys for c in p.terms.values()
        )


# ---------------------------------------------------------------------------
# canonical equations


def _gens(n):
    return SparsePoly.gens(NVARS[n])


def canonical_polys(n):
    if n == 7:
        x, y, z = _gens(7)
        return (x**3 * y + y**3 * z + z**3 * x,)
    if n == 9:
        x, y, z, t = _gens(9)
        return (x**2 * y + y**2 * z + z**2 * x,
                x * y**2 + y * z**2 + z * x**2 - t**3)
    if n == 11:
        v, w, x, y, z = _gens(11)
        return (v**2 * w + w**2 * x + x**2 * y + y**2 * z + z**2 * v,)
    raise ValueError(f"unsupported n={n}")


def canonical_model(n):
    """X(n) itself; psi is the diagonal-twist invariant with every xi = 1."""
    return TwistedModel(n, "+", canonical_polys(n), None, Fraction(1),
                        ModelTransform.identity(n), frame="canonical")


# ---------------------------------------------------------------------------
# the main twisted equations, in terms of y^2 = x^3 + a x + b


def _discriminant_quantity(a, b):
    return 4 * a**3 + 27 * b**2


def build_psi(a, b, n, sign):
    """Closed-form invariant of the (a, b) models."""
    d = _discriminant_quantity(a, b)
    table = {
        (7, "+"): -4 * d,
        (7, "-"): 16 * d**2,
        (9, "+"): -(2**10) * d**4,
        (9, "-"): 2**8 * d**5,
        (11, "+"): -4 * d**2,
        (11, "-"): 8 * d,
    }
    return Fraction(table[(n, sign)])


def _check_base(a, b, n):
    a, b = ratof(a), ratof(b)
    if _discriminant_quantity(a, b) == 0:
        raise SingularCurveError("4a^3 + 27b^2 = 0")
    if n in (9, 11) and (a == 0 or b == 0):
        raise ExcludedJInvariantError(f"j in {{0, 1728}} is excluded for n={n}")
    return a, b


def main_polys(a, b, n, sign):
    a, b = ratof(a), ratof(b)
    if n == 7:
        x, y, z = _gens(7)
        if sign == "+":
            f = (a * x**4 + 7 * b * x**3 * z + 3 * x**2 * y**2
                 - 3 * a**2 * x**2 * z**2 - 6 * b * x * y * z**2
                 - 5 * a * b * x * z**3 + 2 * y**3 * z + 3 * a * y**2 * z**2
                 + 2 * a**2 * y * z**3 - 4 * b**2 * z**4)
            return (f,)
        g = (-a**2 * x**4 + 2 * a * b * x**3 * y - 12 * b * x**3 * z
             - (6 * a**3 + 36 * b**2) * x**2 * y**2 + 6 * a * x**2 * z**2
             + 2 * a**2 * b * x * y**3 - 12 * a * b * x * y**2 * z
             + 18 * b * x * y * z**2 + (3 * a**4 + 19 * a * b**2) * y**4
             - (8 * a**3 + 42 * b**2) * y**3 * z + 6 * a**2 * y**2 * z**2
             - 8 * a * y * z**3 + 3 * z**4)
        return (g,)
    if n == 9:
        x, y, z, t = _gens(9)
        if sign == "+":
            f1 = (x**2 * t + 6 * x * y * z + 6 * b * x * t**2 + 6 * y**3
                  - 9 * a * y**2 * t + 6 * a**2 * y * t**2 - 3 * b * z**3
                  + 3 * a**2 * z**2 * t + 9 * a * b * z * t**2
                  - (a**3 - 12 * b**2) * t**3)
            f2 = (x**2 * z + 6 * x * y**2 - 6 * a * x * y * t
                  + 2 * a**2 * x * t**2 - 9 * a * y**2 * z - 18 * b * y * z**2
                  + 12 * a**2 * y * z * t + a**2 * z**3 + 9 * a * b * z**2 * t
                  - 3 * a**3 * z * t**2 + a**2 * b * t**3)
            return (f1, f2)
        g1 = (9 * x**2 * y + 3 * x**2 * z - 6 * a * x * y * t + 6 * b * x * t**2
              - 6 * a * y**3 + 27 * b * y**2 * t + 3 * a * y * z**2
              + 18 * b * y * z * t + 3 * a**2 * y * t**2 + a * z**3
              + 3 * b * z**2 * t + a**2 * z * t**2 - a * b * t**3)
        g2 = (x**3 + 6 * a * x * y * z + 18 * b * x * y * t + 3 * a * x * z**2
              + 6 * b * x * z * t + a**2 * x * t**2 + 9 * b * y**3
              + 6 * a**2 * y**2 * t - 9 * b * y * z**2 + 6 * a**2 * y * z * t
              - 3 * a * b * y * t**2 - 4 * b * z**3 + 2 * a**2 * z**2 * t
              + 2 * b**2 * t**3)
        return (g1, g2)
    if n == 11:
        v, w, x, y, z = _gens(11)
        if sign == "+":
            f = (v**3 + a * v**2 * z - 2 * a * v * x**2 + 4 * a * v * x * y
                 - 6 * b * v * x * z + a * v * y**2 + 6 * b * v * y * z
                 + a**2 * v * z**2 - w**3 + a * w**2 * z - 4 * a * w * x**2
                 - 12 * b * w * x * z + a**2 * w * z**2 - 2 * b * x**3
                 + 3 * b * x**2 * y + 2 * a**2 * x**2 * z + 6 * b * x * y**2
                 + 4 * a * b * x * z**2 + b * y**3 - a**2 * y**2 * z
                 + a * b * y * z**2 + 2 * b**2 * z**3)
            return (f,)
        g = (v**2 * z + 2 * v * w * y + 4 * v * x * y + 2 * w**2 * x
             - a * w**2 * z + 2 * w * x**2 - 2 * a * w * y**2
             - 6 * b * w * y * z + 6 * x**3 - 6 * a * x**2 * z
             + 2 * a**2 * x * z**2 + b * y**3 - 2 * a**2 * y**2 * z
             - 5 * a * b * y * z**2 - b**2 * z**3)
        return (g,)
    raise ValueError(f"unsupported n={n}")


def build_model(a, b, n, sign="+"):
    """The twisted model of X_E(n) (sign '+') or X_E^-(n) (sign '-') for
    E: y^2 = x^3 + a x + b, with its tracked invariant."""
    a, b = _check_base(a, b, n)
    if sign not in "+-":
        raise ValueError("sign must be '+' or '-'")
    return TwistedModel(n, sign, main_polys(a, b, n, sign), (a, b),
                        build_psi(a, b, n, sign), ModelTransform.identity(n),
                        frame="main")


# ---------------------------------------------------------------------------
# the alternative (c4, c6) equations and the printed coordinate changes


def alt_polys(c4, c6, n, sign):
    c4, c6 = ratof(c4), ratof(c6)
    dlt = (c4**3 - c6**2) / 1728
    if n == 7:
        x, y, z = _gens(7)
        if sign == "+":
            f = (12 * x**3 * z + 108 * x**2 * y**2 + 3 * c4 * x**2 * z**2
                 + 72 * c4 * x * y**2 * z - 108 * c4 * y**4
                 - 12 * c6 * x * y * z**2 + 84 * c6 * y**3 * z
                 + c4**2 * x * z**3 - 15 * c4**2 * y**2 * z**2
                 + c4 * c6 * y * z**3 + 768 * dlt * z**4)
            return (f,)
        g = (3 * x**4 + c4 * x**3 * z - 18 * c4 * x**2 * y**2
             - 3 * c6 * x**2 * y * z + 24 * c6 * x * y**3
             + 3 * c4**2 * x * y**2 * z - 9 * c4**2 * y**4
             - c4 * c6 * y**3 * z + 168 * dlt * x * z**3
             + 1728 * dlt * y**2 * z**2 + 5 * c4 * dlt * z**4)
        return (g,)
    if n == 9:
        x, y, z, t = _gens(9)
        if sign == "+":
            f1 = (24 * x**2 * t - 96 * x * y * z + 64 * y**3
                  + 24 * c4 * y**2 * t + 48 * c4 * y * z**2
                  - 48 * c6 * y * z * t + 12 * c4**2 * y * t**2
                  - 8 * c6 * z**3 + 12 * c4**2 * z**2 * t
                  - 6 * c4 * c6 * z * t**2 - (c4**3 - 2 * c6**2) * t**3)
            f2 = (16 * x**2 * z - 64 * x * y**2 - 16 * c4 * x * y * t
                  - 16 * c4 * x * z**2 + 16 * c6 * x * z * t
                  - 4 * c4**2 * x * t**2 + 80 * c4 * y**2 * z
                  - 32 * c6 * y**2 * t - 32 * c6 * y * z**2
                  + 32 * c4**2 * y * z * t - 8 * c4 * c6 * y * t**2
                  + 8 * c4**2 * z**3 - 12 * c4 * c6 * z**2 * t
                  + (2 * c4**3 + 4 * c6**2) * z * t**2 - c4**2 * c6 * t**3)
            return (f1, f2)
        g1 = (-72 * x**2 * y - 144 * x**2 * z + 24 * c4 * x * y * t
              - 48 * c4 * x * z * t - 8 * c6 * x * t**2 - c4 * y**3
              + 18 * c4 * y**2 * z + 3 * c6 * y**2 * t + 180 * c4 * y * z**2
              + 12 * c6 * y * z * t - 3 * c4**2 * y * t**2 + 792 * c4 * z**3
              + 12 * c6 * z**2 * t + 2 * c4**2 * z * t**2 + c4 * c6 * t**3)
        g2 = (-864 * x**3 + 216 * c4 * x**2 * t + 2592 * c4 * x * y * z
              + 216 * c6 * x * y * t + 15552 * c4 * x * z**2
              + 432 * c6 * x * z * t - 72 * c4**2 * x * t**2 - 9 * c6 * y**3
              + 162 * c6 * y**2 * z + 27 * c4**2 * y**2 * t
              + 4212 * c6 * y * z**2 + 108 * c4**2 * y * z * t
              - 27 * c4 * c6 * y * t**2 + 26136 * c6 * z**3
              + 972 * c4**2 * z**2 * t + 18 * c4 * c6 * z * t**2
              + (5 * c4**3 + 4 * c6**2) * t**3)
        return (g1, g2)
    if n == 11:
        v, w, x, y, z = _gens(11)
        if sign == "+":
            f = (v**3 + 3 * v**2 * w + c4 * v**2 * y + 3 * v * w**2
                 + 2 * c4 * v * w * y - c4 * dlt * v * x**2
                 + 48 * dlt * v * x * y + 9 * w**3 + 5 * c4 * w**2 * y
                 - c4**2 * w**2 * z + c4**2 * w * y**2 - 576 * dlt * w * y * z
                 + 72 * c4 * dlt * w * z**2 - 4 * dlt**2 * x**3
                 - 72 * dlt**2 * x**2 * z + 4 * c4 * dlt * x * y**2
                 + 2 * c4**2 * dlt * x * y * z
                 - (c4**3 * dlt - 1728 * dlt**2) * x * z**2
                 + 64 * dlt * y**3 - 72 * c4 * dlt * y**2 * z
                 + 12 * c4**2 * dlt * y * z**2
                 + (c4**3 * dlt - 3456 * dlt**2) * z**3)
            return (f,)
        g = (5 * v**3 - c4 * v**2 * x - 60 * v**2 * y + 28 * c4 * v**2 * z
             - 2 * c4 * dlt * v * w**2 - 48 * dlt * v * w * x
             - 240 * dlt * v * w * z - 16 * c4 * v * x * y + 1680 * v * y**2
             - 872 * c4 * v * y * z + 121 * c4**2 * v * z**2 + 8 * dlt**2 * w**3
             + 44 * c4 * dlt * w**2 * y - 11 * c4**2 * dlt * w**2 * z
             + c4 * dlt * w * x**2 + 336 * dlt * w * x * y
             - 122 * c4 * dlt * w * x * z + 25 * c4**2 * w * y**2
             - 14160 * dlt * w * y * z + 817 * c4 * dlt * w * z**2
             - 20 * dlt * x**3 + 5 * c4**2 * x**2 * y - 1884 * dlt * x**2 * z
             - 364 * c4 * x * y**2 + 160 * c4**2 * x * y * z
             - 34764 * dlt * x * z**2 + 19840 * y**3 - 10268 * c4 * y**2 * z
             + 1643 * c4**2 * y * z**2 - 129220 * dlt * z**3)
        return (g,)
    raise ValueError(f"unsupported n={n}")


def alt_to_main_transform(a, b, n, sign):
    """(mu, M) or per-poly scalars with main_polys == mu * (alt_polys o M).

    These are the printed coordinate changes linking the two families;
    a = -27 c4 and b = -54 c6.
    """
    a, b = ratof(a), ratof(b)
    c4, c6 = -a / 27, -b / 54
    if n == 7:
        if sign == "+":
            m = RatMatrix([[0, Fraction(-1, 3), 6 * c4], [1, 0, 0], [0, 0, -18]])
            return Fraction(1, 4), m
        m = RatMatrix([[0, 9 * c4, 1], [3, 0, 0], [0, 108, 0]])
        return Fraction(1), m
    if n == 9:
        if sign == "+":
            m = RatMatrix([[1, 0, -27 * c4, -162 * c6],
                           [0, 9, 0, 81 * c4],
                           [0, 0, -54, 0],
                           [0, 0, 0, 324]])
        else:
            # corrected coordinate change for the reverse pair (the printed
            # one does not carry either cubic to the other); verified exactly
            # at construction time in alt_model
            m = RatMatrix([[1, 0, 0, -9 * c4],
                           [0, -36, -9, 0],
                           [0, 0, Fraction(-3, 2), 0],
                           [0, 0, 0, -108]])
        return None, m  # per-poly scalars recovered on demand
    if n == 11:
        if sign == "+":
            m = RatMatrix([
                [-c6, -2 * c6, 6 * c4**2, -3 * c4**2, 9 * c4 * c6],
                [c6, 0, 6 * c4**2, 3 * c4**2, 9 * c4 * c6],
                [0, 0, -864, 0, 0],
                [0, 0, -36 * c4, 0, -108 * c6],
                [0, 0, 0, 72, 0],
            ])
            return Fraction(1, 8 * c6**3), m
        m = RatMatrix([
            [88 * c4, -264 * c6, 1452 * c6, 5940 * c4**2, 35640 * c4 * c6],
            [0, 0, 0, -427680, 0],
            [300, 0, 0, 43740 * c4, 131220 * c6],
            [-11 * c4, 33 * c6, 66 * c6, 0, 0],
            [-60, 0, 0, -1620 * c4, -4860 * c6],
        ])
        return Fraction(1, 2**5 * 3**6 * (55 * c6) ** 3), m
    raise ValueError(f"unsupported n={n}")


def _proportionality(f, g):
    """Scalar s with f = s*g, or None."""
    if g.is_zero():
        return None
    e, c = g.leading()
    fc = f.terms.get(e)
    if fc is None:
        return None
    s = Fraction(fc) / Fraction(c)
    return s if f == g * s else None


def alt_model(a, b, n, sign="+"):
    """The (c4, c6)-frame model; used for cross-validation of the main one.

    Its invariant is derived exactly from the printed coordinate change to
    the main model.
    """
    a, b = _check_base(a, b, n)
    c4, c6 = -a / 27, -b / 54
    polys = alt_polys(c4, c6, n, sign)
    psi_main = build_psi(a, b, n, sign)
    mu, m = alt_to_main_transform(a, b, n, sign)
    mains = main_polys(a, b, n, sign)
    if n == 9:
        subs = [substitute_linear(p, m) for p in polys]
        scalars = []
        for i in (0, 1):
            s = _proportionality(mains[i], subs[i])
            if s is None:
                raise AssertionError("printed alt/main coordinate change failed")
            scalars.append(s)
        factor = (scalars[0] * scalars[1]) ** 6 * det(m) ** 9
    else:
        sub = substitute_linear(polys[0], m)
        if not mains[0] == sub * mu:
            raise AssertionError("printed alt/main coordinate change failed")
        k, l = (3, 4) if n == 7 else (5, 3)
        factor = mu ** k * det(m) ** l
    return TwistedModel(n, sign, polys, (a, b), psi_main / factor,
                        ModelTransform.identity(n), frame="alt")


# ---------------------------------------------------------------------------
# diagonal twists


def diagonal_polys(n, xi, eta=None, minus_form=False):
    xi = [ratof(c) for c in xi]
    if n == 7:
        x, y, z = _gens(7)
        return (xi[0] * x**3 * y + xi[1] * y**3 * z + xi[2] * z**3 * x,)
    if n == 9:
        x, y, z, t = _gens(9)
        eta = ratof(eta)
        if not minus_form:
            return (xi[0] * x**2 * y + xi[1] * y**2 * z + xi[2] * z**2 * x,
                    xi[0] * xi[1] * x * y**2 + xi[1] * xi[2] * y * z**2
                    + xi[0] * xi[2] * z * x**2 - eta * t**3)
        return (xi[0] * xi[2] * x**2 * y + xi[0] * xi[1] * y**2 * z
                + xi[1] * xi[2] * z**2 * x,
                xi[0] * x * y**2 + xi[1] * y * z**2 + xi[2] * z * x**2
                - eta * t**3)
    if n == 11:
        v, w, x, y, z = _gens(11)
        return (xi[0] * v**2 * w + xi[1] * w**2 * x + xi[2] * x**2 * y
                + xi[3] * y**2 * z + xi[4] * z**2 * v,)
    raise ValueError(f"unsupported n={n}")


def diagonal_psi(n, xi, eta=None, minus_form=False):
    xi = [ratof(c) for c in xi]
    if n == 7:
        return xi[0] * xi[1] * xi[2]
    if n == 9:
        prod = xi[0] * xi[1] * xi[2]
        k = 5 if minus_form else 4
        return prod ** k * ratof(eta) ** 3
    if n == 11:
        p = Fraction(1)
        for c in xi:
            p *= c
        return p
    raise ValueError(f"unsupported n={n}")


def diagonal_theta(n, xi, eta=None, minus_form=False):
    xi = [ratof(c) for c in xi]
    if n == 7:
        return xi[0] * xi[1] ** 2 * xi[2] ** 4
    if n == 9:
        eta = ratof(eta)
        if minus_form:
            return xi[0] ** 2 * xi[1] ** 5 * xi[2] ** 8 * eta ** 3
        return xi[0] * xi[1] ** 7 * xi[2] ** 4 * eta ** 3
    if n == 11:
        return (xi[0] * xi[1] ** 5 * xi[2] ** 3 * xi[3] ** 4 * xi[4] ** 9) ** 2
    raise ValueError(f"unsupported n={n}")


@dataclass(frozen=True)
class DiagonalTwistSpec:
    n: int
    xi: tuple
    eta: Fraction | None
    theta: Fraction
    minus_form: bool = False


def diagonal_model(n, lam, nu=None, sign="+"):
    """Diagonal twist of X(n) for E = C_lambda (E[n] contains mu_n).

    For n = 11 the parameter is a finite point (lambda, nu) on X_1(11):
    nu^2 + nu = lambda^3 - lambda^2.
    """
    lam = ratof(lam)
    if lam in (0, 1):
        raise ValueError("lambda in {0, 1} is a cusp of X_1(n)")
    minus_form = False
    eta = None
    if n == 7:
        xi = (lam, lam - 1, Fraction(1)) if sign == "+" else \
             (lam - 1, lam, lam * (lam - 1))
    elif n == 9:
        if sign == "+":
            xi, eta = (lam, lam - 1, Fraction(1)), lam * lam - lam + 1
        else:
            xi, eta = (lam, lam - 1, Fraction(1)), 1 / (lam * lam - lam + 1)
            minus_form = True
    elif n == 11:
        if nu is None:
            raise ValueError("n=11 needs the X_1(11) coordinate nu")
        nu = ratof(nu)
        if nu * nu + nu != lam**3 - lam**2:
            raise ValueError("(lambda, nu) is not on X_1(11)")
        if sign == "+":
            xi = (lam**2 * (lam - 1) ** 2, Fraction(1), (lam - nu - 1) ** 2,
                  nu, Fraction(1))
        else:
            xi = (lam * (lam - 1), Fraction(1), lam - nu - 1, nu, nu)
    else:
        raise ValueError(f"unsupported n={n}")
    if any(c == 0 for c in xi) or (eta is not None and eta == 0):
        raise ValueError("degenerate diagonal parameter")
    spec = DiagonalTwistSpec(n, tuple(xi), eta,
                             diagonal_theta(n, xi, eta, minus_form), minus_form)
    return TwistedModel(n, sign, diagonal_polys(n, xi, eta, minus_form), None,
                        diagonal_psi(n, xi, eta, minus_form),
                        ModelTransform.identity(n), frame="diagonal",
                        theta=spec.theta)


# ---------------------------------------------------------------------------
# membership and transforms


def hessian_at_point(f: SparsePoly, pt):
    h = f.hessian()
    return [[h[i][j].evaluate(list(pt)) for j in range(f.nvars)]
            for i in range(f.nvars)]


def membership(m: TwistedModel, p) -> bool:
    pt = p if isinstance(p, ProjPoint) else ProjPoint(p)
    if len(pt) != m.nvars:
        raise ValueError("point has wrong dimension")
    if m.n == 11:
        return numeric_matrix_rank(hessian_at_point(m.polys[0], pt)) <= 3
    return all(f.evaluate(list(pt)) == 0 for f in m.polys)


def apply_transform(m: TwistedModel, t: ModelTransform) -> TwistedModel:
    """Substitute coordinates (and mix the pencil for n=9), updating psi."""
    factor = psi_factor(m.n, t)
    polys = m.polys
    if m.n == 9:
        pen = t.pencil if t.pencil is not None else RatMatrix.identity(2)
        mixed = [pen.rows[i][0] * polys[0] + pen.rows[i][1] * polys[1]
                 for i in (0, 1)]
        new_polys = tuple(substitute_linear(f, t.matrix) for f in mixed)
        old = m.transform
        new_t = ModelTransform(old.matrix @ t.matrix, Fraction(1),
                               pen @ (old.pencil or RatMatrix.identity(2)))
    else:
        new_polys = tuple(substitute_linear(f, t.matrix) * t.mu for f in polys)
        old = m.transform
        new_t = ModelTransform(old.matrix @ t.matrix, old.mu * t.mu, None)
    return replace(m, polys=new_polys, psi=m.psi * factor, transform=new_t)


def to_build_frame_point(m: TwistedModel, p) -> ProjPoint:
    """Carry a point of a transformed model back to the frame it was built in."""
    pt = p if isinstance(p, ProjPoint) else ProjPoint(p)
    return ProjPoint(m.transform.matrix @ list(pt.coords))


# ---------------------------------------------------------------------------
# cusp tests (frame-local)


def is_cusp(m: TwistedModel, p) -> bool:
    pt = p if isinstance(p, ProjPoint) else ProjPoint(p)
    if not membership(m, pt):
        raise NotAMemberError(f"{pt} is not on the model")
    from . import covariants
    if m.n == 7:
        h = covariants.hessian_covariant(m.polys[0])
        return h.evaluate(list(pt)) == 0
    if m.n == 9:
        fact = covariants.pencil_factor(m)
        te = covariants.tangent_gammas(m, pt)
        return fact.f.evaluate([-te.gamma2, te.gamma1]) == 0
    if m.n == 11:
        return m.polys[0].evaluate(list(pt)) == 0
    raise ValueError(f"unsupported n={m.n}")


# ---------------------------------------------------------------------------
# Velu construction for the X_1(n) families


@dataclass(frozen=True)
class VeluWork:
    lam: Fraction
    nu: Fraction | None
    s0: Fraction
    s1: Fraction
    s2: Fraction
    s3: Fraction
    t: Fraction
    w: Fraction
    D_curve: EllipticCurveQ
    C_curve: EllipticCurveQ
    q: Fraction


def x1_curve_ainvs(n, lam, nu=None):
    """The curve D with a marked point (0,0) of order n, n in {7, 9, 11}."""
    lam = ratof(lam)
    if n == 7:
        return [-(lam**2 - lam - 1), -(lam**3 - lam**2), -(lam**3 - lam**2), 0, 0]
    if n == 9:
        return [lam**3 - 3 * lam**2 + 4 * lam - 1,
                lam * (lam - 1) * (lam**2 - lam + 1),
                lam * (lam - 1) ** 4 * (lam**2 - lam + 1), 0, 0]
    if n == 11:
        nu = ratof(nu)
        return [lam * nu + 2 * lam - (nu + 1) ** 2,
                -lam * nu * (nu + 1) * (lam - nu - 1),
                -(lam**2) * nu * (nu + 1) * (lam - nu - 1), 0, 0]
    raise ValueError(f"unsupported n={n}")


def q_parameter(n, lam, nu=None):
    lam = ratof(lam)
    if n == 7:
        return lam**4 * (lam - 1)
    if n == 9:
        return lam * (lam - 1) ** 7 * (lam**2 - lam + 1) ** 3
    if n == 11:
        nu = ratof(nu)
        return lam * nu**2 * (lam - 1) * (lam - nu - 1) ** 3
    raise ValueError(f"unsupported n={n}")


def _ec_add(e: EllipticCurveQ, P, Q):
    """Chord-tangent addition on a long Weierstrass model; None is infinity."""
    if P is None:
        return Q
    if Q is None:
        return P
    a1, a2, a3, a4, a6 = e.a1, e.a2, e.a3, e.a4, e.a6
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and y1 + y2 + a1 * x2 + a3 == 0:
        return None
    if x1 == x2:
        lam = (3 * x1**2 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
        nu = (-(x1**3) + a4 * x1 + 2 * a6 - a3 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = y1 - lam * x1
    x3 = lam**2 + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def velu_pair(n, lam, nu=None) -> VeluWork:
    """D with its order-n point (0,0), and the n-isogenous curve C by the
    explicit trace formulas; q is the class attached to C."""
    lam = ratof(lam)
    D = EllipticCurveQ.from_ainvs(x1_curve_ainvs(n, lam, nu))
    P = (Fraction(0), Fraction(0))
    xs = []
    R = None
    for j in range(1, (n - 1) // 2 + 1):
        R = _ec_add(D, R, P)
        if R is None:
            raise ValueError("(0,0) degenerates before order n")
        xs.append(R[0])
    for j in range((n - 1) // 2 + 1, n + 1):
        R = _ec_add(D, R, P)
    if R is not None:
        raise ValueError("(0,0) does not have order n")
    s = [sum(x**k for x in xs) for k in range(4)]
    a1, a2, a3 = D.a1, D.a2, D.a3
    b2 = a1 * a1 + 4 * a2
    t = 6 * s[2] + b2 * s[1] + a1 * a3 * s[0]
    w = 10 * s[3] + 2 * b2 * s[2] + 3 * a1 * a3 * s[1] + a3**2 * s[0]
    C = EllipticCurveQ(a1, a2, a3, -5 * t, -b2 * t - 7 * w)
    return VeluWork(lam, ratof(nu) if nu is not None else None,
                    s[0], s[1], s[2], s[3], t, w, D, C, q_parameter(n, lam, nu))


def velu_discriminant_formula(n, lam, nu=None):
    """The printed closed form for disc(C)."""
    lam = ratof(lam)
    if n == 7:
        return lam * (lam - 1) * (lam**3 - 8 * lam**2 + 5 * lam + 1) ** 7
    if n == 9:
        return (lam * (lam - 1) * (lam**2 - lam + 1) ** 3
                * (lam**3 - 6 * lam**2 + 3 * lam + 1) ** 9)
    if n == 11:
        nu = ratof(nu)
        f = (-3 * lam * nu + 2 * nu - lam**3 + 5 * lam**2 - 5 * lam + 1) / (lam - 1)
        return (lam * (lam - 1) * (lam * nu + 2 * lam**2 - 2 * lam + 1)
                * (nu + 1) ** 6 * f ** 11)
    raise ValueError(f"unsupported n={n}")


# ---------------------------------------------------------------------------
# model file format


def poly_to_json(f: SparsePoly):
    return [{"e": list(e), "c": str(c)} for e, c in f.sorted_terms()]


def poly_from_json(data, nvars):
    return SparsePoly(nvars, {tuple(t["e"]): ratof(t["c"]) for t in data})


def matrix_to_json(m: RatMatrix):
    return [[str(c) for c in row] for row in m.rows]


def matrix_from_json(rows):
    return RatMatrix([[ratof(c) for c in row] for row in rows])


def model_to_json(m: TwistedModel) -> dict:
    return {
        "n": m.n,
        "sign": m.sign,
        "frame": m.frame,
        "base": [str(m.base[0]), str(m.base[1])] if m.base else None,
        "polys": [poly_to_json(f) for f in m.polys],
        "psi": str(m.psi),
        "theta": str(m.theta) if m.theta is not None else None,
        "transform": {
            "matrix": matrix_to_json(m.transform.matrix),
            "mu": str(m.transform.mu),
            "pencil": matrix_to_json(m.transform.pencil)
                      if m.transform.pencil is not None else None,
        },
    }


def model_from_json(data: dict) -> TwistedModel:
    n = data["n"]
    nv = NVARS[n]
    tr = data["transform"]
    transform = ModelTransform(
        matrix_from_json(tr["matrix"]),
        ratof(tr["mu"]),
        matrix_from_json(tr["pencil"]) if tr.get("pencil") else None,
    )
    base = tuple(ratof(c) for c in data["base"]) if data.get("base") else None
    theta = ratof(data["theta"]) if data.get("theta") else None
    return TwistedModel(n, data["sign"],
                        tuple(poly_from_json(p, nv) for p in data["polys"]),
                        base, ratof(data["psi"]), transform,
                        frame=data.get("frame", "main"), theta=theta)
