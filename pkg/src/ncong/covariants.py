"""Covariants of the model equations.

* ternary quartics (twists of X(7)): H, c4, c6 by the classical determinant
  formulas, plus extraction of the model invariant psi from the syzygy
  c4^3 - c6^2 = 1728 psi H^7 mod the quartic;
* cubics in five variables (twists of X(11)): H, I7, I9, c4 read off
  det(A + tB) = 32H - 32 I7 t - 24 I9 t^2 - 8 c4 t^3 + ...;
* the canonical X(9) invariants D, I6, I12, c4, c6 built from the alternating
  matrices Lambda_i and the star product;
* the Hessian-pencil factorization and the tangent-line construction that
  realize the forgetful map from an X(9) twist down to the cubic pencil.

Everything here operates on SparsePoly data; models are only touched through
their ``polys`` attribute.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .exactmath import (
    RatMatrix,
    SparsePoly,
    divide_single,
    numeric_matrix_rank,
    poly_matrix_det,
    solve_linear,
)


class CovariantError(ValueError):
    pass


def _polys_of(model_or_poly):
    if isinstance(model_or_poly, SparsePoly):
        return (model_or_poly,)
    if hasattr(model_or_poly, "polys"):
        return tuple(model_or_poly.polys)
    return tuple(model_or_poly)


def _pad_vars(f: SparsePoly, nvars):
    return SparsePoly(nvars, {e + (0,) * (nvars - f.nvars): c
                              for e, c in f.terms.items()})


def _collect_extra_var(f: SparsePoly, base_nvars):
    """Split a poly in base_nvars+1 variables by the exponent of the last one."""
    out = {}
    for e, c in f.terms.items():
        k = e[base_nvars]
        g = out.setdefault(k, {})
        g[e[:base_nvars]] = c
    return {k: SparsePoly(base_nvars, terms) for k, terms in out.items()}


def _det_pencil(a_rows, b_rows, nvars):
    """Coefficients of t^k in det(A + tB) for matrices of polynomials."""
    n1 = nvars + 1
    t_exp = (0,) * nvars + (1,)
    tvar = SparsePoly(n1, {t_exp: 1})
    entries = [[_pad_vars(a_rows[i][j], n1) + _pad_vars(b_rows[i][j], n1) * tvar
                for j in range(len(a_rows))] for i in range(len(a_rows))]
    d = poly_matrix_det(entries)
    return _collect_extra_var(d, nvars)


# ---------------------------------------------------------------------------
# ternary quartics (n = 7)


def hessian_covariant(f: SparsePoly) -> SparsePoly:
    """H = (-1/54) det(second partials of f) for a ternary quartic."""
    return poly_matrix_det(f.hessian()) * Fraction(-1, 54)


@dataclass(frozen=True)
class QuarticCovariants:
    h: SparsePoly      # degree 6
    c4: SparsePoly     # degree 14
    c6: SparsePoly     # degree 21
    psi: Fraction


def quartic_covariant_polys(f: SparsePoly):
    """(H, c4, c6) of a ternary quartic; no syzygy extraction."""
    if f.nvars != 3 or f.degree() != 4 or not f.is_homogeneous():
        raise CovariantError("expected a ternary quartic")
    h = hessian_covariant(f)
    if h.is_zero():
        raise CovariantError("degenerate quartic: H = 0")
    hg = h.gradient()
    fh = f.hessian()
    bordered = [[fh[i][j] for j in range(3)] + [hg[i]] for i in range(3)]
    bordered.append([hg[0], hg[1], hg[2], SparsePoly.zero(3)])
    c4 = poly_matrix_det(bordered) * Fraction(1, 9)
    c6 = poly_matrix_det([f.gradient(), hg, c4.gradient()]) * Fraction(1, 14)
    return h, c4, c6


def quartic_covariants(f: SparsePoly) -> QuarticCovariants:
    """The three covariants of a ternary quartic twist of X(7), and psi.

    psi is the exact ratio of (c4^3 - c6^2) mod f against 1728 H^7 mod f;
    a failure of proportionality means f is not a twist of the Klein quartic.
    """
    h, c4, c6 = quartic_covariant_polys(f)
    _, r1 = divide_single(c4**3 - c6**2, f)
    _, r2 = divide_single(h**7, f)
    if r2.is_zero():
        raise CovariantError("H^7 lies in (f): not a twist of X(7)")
    e, c = r2.leading()
    num = r1.terms.get(e)
    if num is None:
        raise CovariantError("syzygy proportionality failed")
    psi = Fraction(num) / (1728 * Fraction(c))
    if r1 != r2 * (1728 * psi):
        raise CovariantError("syzygy proportionality failed")
    return QuarticCovariants(h, c4, c6, psi)


# ---------------------------------------------------------------------------
# cubic threefolds (n = 11)


@dataclass(frozen=True)
class CubicThreefoldCovariants:
    h: SparsePoly      # degree 5
    i7: SparsePoly     # degree 7
    i9: SparsePoly     # degree 9
    c4: SparsePoly     # degree 11


def cubic3fold_covariants(f: SparsePoly) -> CubicThreefoldCovariants:
    """H, I7, I9, c4 of a cubic in five variables, from det(A + tB)."""
    if f.nvars != 5 or f.degree() != 3 or not f.is_homogeneous():
        raise CovariantError("expected a cubic in five variables")
    a = f.hessian()
    h = poly_matrix_det(a) * Fraction(1, 32)
    if h.is_zero():
        raise CovariantError("degenerate Hessian")
    b = h.hessian()
    coeffs = _det_pencil(a, b, 5)
    i7 = coeffs.get(1, SparsePoly.zero(5)) * Fraction(-1, 32)
    i9 = coeffs.get(2, SparsePoly.zero(5)) * Fraction(-1, 24)
    c4 = coeffs.get(3, SparsePoly.zero(5)) * Fraction(-1, 8)
    return CubicThreefoldCovariants(h, i7, i9, c4)


def cubic3fold_h_c4_at(f: SparsePoly, pt):
    """(H(f)(pt), c4(f)(pt)) without materializing c4 as a polynomial.

    H is needed symbolically for its Hessian; the t-coefficients of
    det(A(pt) + t B(pt)) are then read off from exact numeric determinants.
    """
    from .exactmath import det as _det
    a = f.hessian()
    h = poly_matrix_det(a) * Fraction(1, 32)
    if h.is_zero():
        raise CovariantError("degenerate Hessian")
    b = h.hessian()
    pt = list(pt)
    a_num = [[a[i][j].evaluate(pt) for j in range(5)] for i in range(5)]
    b_num = [[b[i][j].evaluate(pt) for j in range(5)] for i in range(5)]
    # det(A + tB) has degree <= 5 in t; interpolate on t = 0..5
    vals = []
    for t in range(6):
        m = RatMatrix([[a_num[i][j] + t * b_num[i][j] for j in range(5)]
                       for i in range(5)])
        vals.append(_det(m))
    # Newton forward differences give exact coefficients in the monomial basis
    coeffs = _interp_coeffs(vals)
    return h.evaluate(pt), coeffs[3] * Fraction(-1, 8)


def _interp_coeffs(vals):
    """Coefficients of the polynomial with values vals at 0, 1, ..., len-1."""
    n = len(vals)
    # solve the Vandermonde system exactly
    rows = [[Fraction(x) ** k for k in range(n)] for x in range(n)]
    sol = solve_linear(RatMatrix(rows), [Fraction(v) for v in vals])
    return sol


# ---------------------------------------------------------------------------
# canonical X(9) invariants (built once)


@dataclass(frozen=True)
class N9CanonicalInvariants:
    d: SparsePoly      # degree 4
    i6: SparsePoly     # degree 6
    i12: SparsePoly    # degree 12
    c4: SparsePoly     # degree 12
    c6: SparsePoly     # degree 18
    lambdas: tuple     # the three alternating matrices


def _star(m_rows, v):
    """(M * v)_l = sum M_ij v_k over (i,j,k) with (i,j,k,l) even in S_4."""
    nv = v[0].nvars
    out = [SparsePoly.zero(nv) for _ in range(4)]
    for perm in permutations(range(4)):
        inv = 0
        pl = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if pl[i] > pl[j]:
                    inv += 1
        if inv % 2:
            continue
        i, j, k, l = perm
        out[l] = out[l] + m_rows[i][j] * v[k]
    return out


def _mat_vec(m_rows, v):
    nv = v[0].nvars
    return [sum((m_rows[i][j] * v[j] for j in range(4)), SparsePoly.zero(nv))
            for i in range(4)]


def _dot(u, v):
    nv = u[0].nvars
    return sum((u[i] * v[i] for i in range(4)), SparsePoly.zero(nv))


@lru_cache(maxsize=1)
def n9_canonical() -> N9CanonicalInvariants:
    """Invariants of X(9) = {F1 = F2 = 0}: D, I6, I12, c4, c6."""
    a, b, c, d = SparsePoly.gens(4)

    def q(i, x, y, z):
        if i == 0:
            return 3 * (x**2 + 2 * y * z)
        if i == 1:
            return 3 * (z**2 + 2 * x * y)
        return 3 * (y**2 + 2 * x * z)

    def r(i, x, y, z):
        if i == 0:
            return 2 * (x**3 * y + z**3 * y) - 3 * x**2 * z**2 - y**4
        if i == 1:
            return 2 * (y**3 * z + x**3 * z) - 3 * y**2 * x**2 - z**4
        return 2 * (z**3 * x + y**3 * x) - 3 * z**2 * y**2 - x**4

    d2 = d * d
    lambdas = []
    for i in range(3):
        qa = q(i, a, b, c) * d2
        qc = q(i, c, a, b) * d2
        qb = q(i, b, c, a) * d2
        ra = r(i, a, b, c)
        rb = r(i, b, c, a)
        rc = r(i, c, a, b)
        z4 = SparsePoly.zero(4)
        lambdas.append([
            [z4, qa, -qc, ra],
            [-qa, z4, qb, rb],
            [qc, -qb, z4, rc],
            [-ra, -rb, -rc, z4],
        ])

    dd = -(a**3 + b**3 + c**3 - 3 * a * b * c) * d
    i6 = (2 * (a**5 * b + b**5 * c + c**5 * a)
          + 5 * (a**4 * c**2 + b**4 * a**2 + c**4 * b**2)
          + 20 * a * b * c * (a**2 * b + b**2 * c + c**2 * a) - 3 * d**6)
    coeffs = _det_pencil(dd.hessian(), i6.hessian(), 4)
    # sanity anchors for the expansion 81 D^2 - 1620 D I6 t + 2700 I12 t^2 + 90000 D^4 t^4
    assert coeffs[0] == 81 * dd**2
    assert coeffs[1] == -1620 * dd * i6
    assert 3 not in coeffs or coeffs[3].is_zero()
    assert coeffs[4] == 90000 * dd**4
    i12 = coeffs[2] * Fraction(1, 2700)

    x1 = [a, b, c, d]
    x7 = _mat_vec(lambdas[0], dd.gradient())
    u5 = _star(lambdas[1], x1)
    c4 = _dot(x7, u5)
    c6 = _dot(x7, i12.gradient()) * Fraction(1, 2)
    return N9CanonicalInvariants(dd, i6, i12, c4, c6, tuple(map(tuple, (
        tuple(map(tuple, lam)) for lam in lambdas))))


def hesse_pencil_invariants():
    """D, c4, c6 of the Hesse pencil A(x^3+y^3+z^3) + Bxyz, as binary forms."""
    A, B = SparsePoly.gens(2)
    d = -27 * A**4 - A * B**3
    c4 = -216 * A**3 * B + B**4
    c6 = 5832 * A**6 - 540 * A**3 * B**3 - B**6
    return d, c4, c6


# ---------------------------------------------------------------------------
# the Hessian pencil of an X(9) twist


@dataclass(frozen=True)
class PencilFactorization:
    f: SparsePoly      # binary quartic in (r, s)
    d: SparsePoly      # quartic in the model variables


def pencil_factor(model_or_pair) -> PencilFactorization:
    """Factor det Hess(r F1 + s F2) = f(r, s) * D(vars), exactly.

    The coefficient of each r^k s^(4-k) is proportional to a common quartic D;
    D is taken to be the first nonzero coefficient, which fixes the scalar
    normalization of f (f and D are only defined up to inverse scalars).
    """
    f1, f2 = _polys_of(model_or_pair)
    a1, a2 = f1.hessian(), f2.hessian()
    coeffs = _det_pencil(a1, a2, 4)  # key k = power of s
    ck = {k: coeffs.get(k, SparsePoly.zero(4)) for k in range(5)}
    k0 = next((k for k in range(5) if not ck[k].is_zero()), None)
    if k0 is None:
        raise CovariantError("pencil Hessian vanishes identically")
    dpoly = ck[k0]
    r, s = SparsePoly.gens(2)
    fbin = SparsePoly.zero(2)
    for k in range(5):
        if ck[k].is_zero():
            continue
        e, c = dpoly.leading()
        num = ck[k].terms.get(e)
        ratio = None if num is None else Fraction(num) / Fraction(c)
        if ratio is None or not ck[k] == dpoly * ratio:
            raise CovariantError("Hessian pencil does not factor: not an X(9) twist")
        fbin = fbin + ratio * r ** (4 - k) * s**k
    return PencilFactorization(fbin, dpoly)


# ---------------------------------------------------------------------------
# tangent-line expansion on an X(9) twist


@dataclass(frozen=True)
class TangentExpansion:
    gamma1: Fraction
    gamma2: Fraction
    delta1: Fraction
    delta2: Fraction
    direction: tuple


def tangent_gammas(model_or_pair, pt) -> TangentExpansion:
    """Expand F_i(P + tQ) = gamma_i t^2 + delta_i t^3 along the tangent line.

    Q is a deterministic primitive basis vector of the kernel of the 2x4
    Jacobian at P, independent of P; rescaling Q scales both gammas by the
    same square, so (gamma1 : gamma2) is well-defined.
    """
    f1, f2 = _polys_of(model_or_pair)
    p = [Fraction(c) for c in (pt.coords if hasattr(pt, "coords") else pt)]
    jac = [[g.evaluate(p) for g in f.gradient()] for f in (f1, f2)]
    if numeric_matrix_rank(jac) < 2:
        raise CovariantError("singular point: Jacobian rank < 2")
    # kernel basis by RREF with deterministic pivots
    rows = [r[:] for r in jac]
    pivots = []
    rr = 0
    for col in range(4):
        piv = next((i for i in range(rr, 2) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rr], rows[piv] = rows[piv], rows[rr]
        pv = rows[rr][col]
        rows[rr] = [c / pv for c in rows[rr]]
        for i in range(2):
            if i != rr and rows[i][col]:
                fct = rows[i][col]
                rows[i] = [ci - fct * cr for ci, cr in zip(rows[i], rows[rr])]
        pivots.append(col)
        rr += 1
        if rr == 2:
            break
    free = [c for c in range(4) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * 4
        v[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            v[col] = -rows[i][fc]
        basis.append(v)
    # choose the first basis vector not proportional to P
    q = None
    for v in basis:
        cross_zero = all(v[i] * p[j] == v[j] * p[i]
                         for i in range(4) for j in range(i + 1, 4))
        if not cross_zero:
            q = v
            break
    if q is None:
        raise CovariantError("tangent direction degenerates")
    from .models import normalize_point
    q = [Fraction(c) for c in normalize_point(q)]
    out = []
    for f in (f1, f2):
        assert f.evaluate(p) == 0, "point not on the model"
        grad_dot = sum(g.evaluate(p) * q[i] for i, g in enumerate(f.gradient()))
        assert grad_dot == 0
        h = f.hessian()
        gamma = sum(q[i] * h[i][j].evaluate(p) * q[j]
                    for i in range(4) for j in range(4)) / 2
        delta = f.evaluate(q)
        out.append((gamma, delta))
    (g1, d1), (g2, d2) = out
    if g1 == 0 and g2 == 0:
        raise CovariantError("tangent expansion degenerates (both gammas zero)")
    return TangentExpansion(g1, g2, d1, d2, tuple(int(c) for c in q))


# ---------------------------------------------------------------------------
# canonical cubic-threefold data (n = 11)

# the degree-19 form featuring in the identity
# c6tilde^2 = abcde (c4^3 - 1728 F^11) modulo the ideal of X(11);
# shipped as data with a checksum because of its size
C6_TILDE_TERMS = {
    (9, 10, 0, 0, 0): 1,
    (0, 18, 0, 1, 0): -509,
    (0, 14, 0, 4, 1): -14107,
    (0, 9, 10, 0, 0): 510,
    (0, 7, 0, 12, 0): 42326,
    (0, 3, 0, 15, 1): 20669,
    (0, 2, 0, 2, 15): -14107,
    (0, 1, 2, 10, 6): -277419,
    (0, 1, 1, 16, 1): -248909,
    (0, 1, 1, 5, 12): -209926,
    (0, 1, 0, 11, 7): 762409,
    (0, 1, 0, 0, 18): 1,
    (0, 0, 18, 0, 1): -1018,
    (0, 0, 16, 1, 2): -14107,
    (0, 0, 12, 3, 4): -586835,
    (0, 0, 10, 4, 5): 197780,
    (0, 0, 9, 10, 0): 1019,
    (0, 0, 8, 5, 6): -787130,
    (0, 0, 7, 11, 1): 15634,
    (0, 0, 7, 0, 12): 42326,
    (0, 0, 6, 6, 7): 2007576,
    (0, 0, 5, 12, 2): 247382,
    (0, 0, 5, 1, 13): -528424,
    (0, 0, 4, 7, 8): -616653,
    (0, 0, 3, 13, 3): 376744,
    (0, 0, 3, 2, 14): 1067732,
    (0, 0, 2, 8, 9): -225004,
    (0, 0, 1, 14, 4): 463659,
    (0, 0, 1, 3, 15): -582142,
    (0, 0, 0, 9, 10): 70511,
}

C6_TILDE_SHA256 = "4d5c72115a1d3181937d87b53c31568d1bca16b005f3df811cb7d6067816cae1"


def c6_tilde() -> SparsePoly:
    import hashlib
    blob = ";".join(f"{e}:{c}" for e, c in sorted(C6_TILDE_TERMS.items()))
    digest = hashlib.sha256(blob.encode()).hexdigest()
    if digest != C6_TILDE_SHA256:
        raise CovariantError("c6-tilde data constant is corrupt")
    return SparsePoly(5, dict(C6_TILDE_TERMS))
