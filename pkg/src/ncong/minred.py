"""Minimisation (removing primes from the model invariant) and reduction
(unimodular coefficient-size descent).

Minimisation at p is a greedy local search over substitutions x = M x' with
M built from p-power diagonal scalings and integral shears, each followed by
removal of p-content (a scalar or pencil operation); every accepted move
strictly lowers v_p(psi).  The target levels of the reduction-type table are
used as an early stop at p >= 5 where the Kodaira symbol is computable from
valuations; at 2 and 3 the search runs to a local minimum.

Reduction greedily applies unimodular moves (x_i <- x_i +- x_j, and pencil
analogues for n=9) minimizing the sum of squared coefficients; |psi| is
unchanged by such moves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ecq import EllipticCurveQ, factor_full, legendre, minimal_c4c6
from .exactmath import RatMatrix, SparsePoly
from .models import ModelTransform, TwistedModel, apply_transform


class MinimisationError(ValueError):
    pass


def _vp_rat(x, p):
    x = Fraction(x)
    v = 0
    n = x.numerator
    while n and n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _vp_int(n, p):
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Kodaira symbols at p >= 5 from valuations


def _kodaira_from_vals(v4, v6, vd):
    """(v_p(c4), v_p(c6), v_p(Delta)) of a p-minimal pair, p >= 5.
    None stands for +infinity."""
    if vd == 0:
        return "I0", 0
    if v4 == 0:
        return "Im", vd
    # additive cases
    if vd == 2:
        return "II", 0
    if vd == 3:
        return "III", 0
    if vd == 4:
        return "IV", 0
    if vd == 6:
        return "I*m", 0
    if v4 == 2 and (v6 is None or v6 >= 3):
        return "I*m", vd - 6
    if vd == 8:
        return "IV*", 0
    if vd == 9:
        return "III*", 0
    if vd == 10:
        return "II*", 0
    raise MinimisationError(f"no Kodaira symbol for valuations {(v4, v6, vd)}")


def kodaira_p_ge5(a, b, p):
    """Kodaira symbol of y^2 = x^3 + a x + b at p >= 5 (p-minimal input).

    Returns (symbol, m) with symbol in {'I0','Im','I*m','II','III','IV',
    'IV*','III*','II*'} and m the index for the multiplicative types.
    """
    if p < 5:
        raise MinimisationError("only p >= 5 is classified by valuations")
    a, b = Fraction(a), Fraction(b)
    c4, c6 = -48 * a, -864 * b
    disc = (c4**3 - c6**2) / 1728
    if disc == 0:
        raise MinimisationError("singular curve")
    v4 = _vp_rat(c4, p) if c4 else None
    v6 = _vp_rat(c6, p) if c6 else None
    vd = _vp_rat(disc, p)
    if min(v for v in (v4, v6, vd) if v is not None) < 0:
        raise MinimisationError(f"(a, b) is not {p}-integral")
    if (v4 is None or v4 >= 4) and (v6 is None or v6 >= 6) and vd >= 12:
        raise MinimisationError(f"(a, b) is not {p}-minimal")
    return _kodaira_from_vals(v4, v6, vd)


TARGET_TABLE_7_11 = {
    # (n, sign) -> levels for ((m/n) = +1, (m/n) = -1, additive)
    (7, "+"): (1, 2, 2),
    (7, "-"): (2, 1, 2),
    (11, "+"): (2, 1, 2),
    (11, "-"): (1, 2, 2),
}

TARGET_TABLE_9 = {
    # sign -> (m=3,6 mod 9; m=1 mod 3; m=2 mod 3; II/IV*; III/III*; IV/II*)
    "+": (3, 4, 5, 5, 6, 7),
    "-": (3, 5, 4, 7, 6, 5),
}


def target_level(n, sign, symbol, m):
    """The expected minimal level of X_E(n)/X_E^-(n) at p >= 5 (conjectural)."""
    if symbol == "I0":
        return 0
    if symbol in ("Im", "I*m"):
        if n in (7, 11):
            if m % n == 0:
                return 0
            row = TARGET_TABLE_7_11[(n, sign)]
            return row[0] if legendre(m, n) == 1 else row[1]
        if n == 9:
            if m % 9 == 0:
                return 0
            row = TARGET_TABLE_9[sign]
            if m % 9 in (3, 6):
                return row[0]
            return row[1] if m % 3 == 1 else row[2]
    if n in (7, 11):
        return TARGET_TABLE_7_11[(n, sign)][2]
    row = TARGET_TABLE_9[sign]
    if symbol in ("II", "IV*"):
        return row[3]
    if symbol in ("III", "III*"):
        return row[4]
    if symbol in ("IV", "II*"):
        return row[5]
    raise MinimisationError(f"unknown symbol {symbol}")


@dataclass(frozen=True)
class LevelProfile:
    """Levels v_p(psi) with the table targets where computable."""
    entries: tuple  # of (p, level, target or None)

    def level(self, p):
        for q, lvl, _ in self.entries:
            if q == p:
                return lvl
        return 0


def model_target_level(m: TwistedModel, p):
    if m.base is None or p < 5:
        return None
    a, b = m.base
    e = EllipticCurveQ.from_short(a, b)
    c4m, c6m = e.minimal_pair()
    v4 = _vp_int(c4m, p)
    v6 = _vp_int(c6m, p)
    vd = _vp_int((c4m**3 - c6m**2) // 1728, p)
    sym, mm = _kodaira_from_vals(v4, v6, vd)
    return target_level(m.n, m.sign, sym, mm)


def psi_primes(m: TwistedModel):
    psi = Fraction(m.psi)
    fac = dict(factor_full(psi.numerator))
    for q, e in factor_full(psi.denominator).items():
        fac[q] = fac.get(q, 0) + e
    return sorted(fac)


def level_profile(m: TwistedModel, primes=None) -> LevelProfile:
    if primes is None:
        primes = psi_primes(m)
    entries = []
    for p in primes:
        lvl = _vp_rat(m.psi, p)
        entries.append((p, lvl, model_target_level(m, p)))
    return LevelProfile(tuple(entries))


# ---------------------------------------------------------------------------
# minimisation


def _poly_p_content(f: SparsePoly, p):
    v = None
    for c in f.terms.values():
        cv = _vp_rat(c, p)
        v = cv if v is None else min(v, cv)
        if v == 0:
            break
    return v or 0


def _normalize_content(m: TwistedModel, p) -> TwistedModel:
    """Strip p-content from the polys (scalar for n=7,11; pencil for n=9)."""
    if m.n == 9:
        s = [_poly_p_content(f, p) for f in m.polys]
        if not any(s):
            return m
        pen = RatMatrix([[Fraction(1, p**s[0]), 0], [0, Fraction(1, p**s[1])]])
        t = ModelTransform(RatMatrix.identity(4), Fraction(1), pen)
        return apply_transform(m, t)
    s = _poly_p_content(m.polys[0], p)
    if not s:
        return m
    t = ModelTransform(RatMatrix.identity(m.nvars), Fraction(1, p**s))
    return apply_transform(m, t)


def _coordinate_moves(nv, p):
    """Candidate substitution matrices: p-power diagonals, optionally
    composed with an integral shear on either side."""
    eye = [[1 if i == j else 0 for j in range(nv)] for i in range(nv)]
    diags = []
    for mask in range(3**nv):
        e = []
        v = mask
        for _ in range(nv):
            e.append(v % 3)
            v //= 3
        if min(e) != 0 or max(e) == 0:
            continue
        diags.append(e)
    moves = []
    for e in diags:
        moves.append(RatMatrix([[p**e[i] if i == j else 0 for j in range(nv)]
                                for i in range(nv)]))
    shear_pairs = [(i, j) for i in range(nv) for j in range(nv) if i != j]
    small_diags = [e for e in diags if max(e) == 1]
    for i, j in shear_pairs:
        for u in range(1, p):
            sh = [row[:] for row in eye]
            sh[i][j] = u
            shm = RatMatrix(sh)
            for e in small_diags:
                dm = RatMatrix([[p**e[k] if k == l else 0 for l in range(nv)]
                                for k in range(nv)])
                moves.append(shm @ dm)
                moves.append(dm @ shm)
    return moves


def _pencil_moves(p):
    out = []
    for u in range(1, p):
        out.append(RatMatrix([[1, u], [0, 1]]))
        out.append(RatMatrix([[1, 0], [u, 1]]))
    return out


def minimise(m: TwistedModel, p: int, max_rounds=60) -> TwistedModel:
    """Lower v_p(psi) by substitutions; p-integral model in, p-integral out.

    Stops at the table target when the reduction type at p >= 5 is known,
    otherwise at a local minimum of the move catalog.
    """
    if not m.is_integral():
        raise MinimisationError("minimise needs integral model equations")
    target = model_target_level(m, p) if p >= 5 else None
    current = _normalize_content(m, p)
    for _ in range(max_rounds):
        level = _vp_rat(current.psi, p)
        if target is not None and level <= target:
            break
        if level == 0:
            break
        best = None
        best_level = level
        for mat in _coordinate_moves(current.nvars, p):
            t = ModelTransform(mat, Fraction(1),
                               RatMatrix.identity(2) if current.n == 9 else None)
            cand = _normalize_content(apply_transform(current, t), p)
            lvl = _vp_rat(cand.psi, p)
            if lvl < best_level:
                best, best_level = cand, lvl
        if current.n == 9 and best is None:
            for pen in _pencil_moves(p):
                t = ModelTransform(RatMatrix.identity(4), Fraction(1), pen)
                cand = _normalize_content(apply_transform(current, t), p)
                lvl = _vp_rat(cand.psi, p)
                if lvl < best_level:
                    best, best_level = cand, lvl
        if best is None:
            break
        current = best
    return current


def minimise_all(m: TwistedModel, primes=None) -> TwistedModel:
    """Minimise at every prime of psi, in ascending order."""
    if primes is None:
        primes = psi_primes(m)
    out = m
    for p in primes:
        out = minimise(out, p)
    return out


# ---------------------------------------------------------------------------
# reduction


def _norm(m: TwistedModel):
    total = Fraction(0)
    for f in m.polys:
        for c in f.terms.values():
            total += Fraction(c) ** 2
    return total


def reduce(m: TwistedModel, budget=600) -> TwistedModel:  # noqa: A001
    """Greedy unimodular descent on the sum of squared coefficients.

    |psi| is preserved (det = +-1 moves only); terminates at a local optimum
    or when the move budget runs out.
    """
    nv = m.nvars
    eye = [[1 if i == j else 0 for j in range(nv)] for i in range(nv)]
    coord_moves = []
    for i in range(nv):
        for j in range(nv):
            if i == j:
                continue
            for u in (1, -1):
                rows = [row[:] for row in eye]
                rows[i][j] = u
                coord_moves.append(RatMatrix(rows))
    pencil_moves = []
    if m.n == 9:
        for i, j in ((0, 1), (1, 0)):
            for u in (1, -1):
                rows = [[1, 0], [0, 1]]
                rows[i][j] = u
                pencil_moves.append(RatMatrix(rows))
    current = m
    cur_norm = _norm(current)
    for _ in range(budget):
        best = None
        best_norm = cur_norm
        for mat in coord_moves:
            t = ModelTransform(mat, Fraction(1),
                               RatMatrix.identity(2) if m.n == 9 else None)
            cand = apply_transform(current, t)
            n2 = _norm(cand)
            if n2 < best_norm:
                best, best_norm = cand, n2
        for pen in pencil_moves:
            t = ModelTransform(RatMatrix.identity(nv), Fraction(1), pen)
            cand = apply_transform(current, t)
            n2 = _norm(cand)
            if n2 < best_norm:
                best, best_norm = cand, n2
        if best is None:
            break
        current, cur_norm = best, best_norm
    return current
