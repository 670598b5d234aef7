"""Elliptic curves over Q: Weierstrass invariants, minimal (c4, c6) pairs,
quadratic twists, and traces of Frobenius by naive point counting.

Curve identity throughout the package is equality of minimal (c4, c6); labels
are opaque metadata carried along for display.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactmath import Rat, ratof

AP_PRIME_CEILING = 10 ** 5  # naive counting bound


class SingularCurveError(ValueError):
    pass


class BadReductionError(ValueError):
    pass


def _vp(x, p):
    """p-adic valuation of a rational (None for 0, i.e. +infinity)."""
    x = Fraction(x)
    if x == 0:
        return None
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def prime_range(bound, start=2):
    """Primes in [start, bound] by a simple sieve."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(bound ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i:: i] = b"\x00" * len(sieve[i * i:: i])
    return [p for p in range(start, bound + 1) if sieve[p]]


def factor_trial(n, bound=10 ** 5):
    """Trial-division factorization: (dict prime -> exponent, leftover cofactor)."""
    n = abs(int(n))
    fac = {}
    if n == 0:
        return fac, 0
    for p in [2, 3, 5, 7]:
        while n % p == 0:
            fac[p] = fac.get(p, 0) + 1
            n //= p
    d = 11
    while d * d <= n and d <= bound:
        while n % d == 0:
            fac[d] = fac.get(d, 0) + 1
            n //= d
        d += 2
    if n > 1:
        if n <= bound * bound:  # leftover below bound^2 is prime
            fac[n] = fac.get(n, 0) + 1
            n = 1
    return fac, n


def _is_probable_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n):
    if n % 2 == 0:
        return 2
    from math import gcd as _g
    c = 1
    while True:
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = _g(abs(x - y), n)
        if d != n:
            return d
        c += 1


def factor_full(n):
    """Complete factorization (trial division, then Pollard rho)."""
    n = abs(int(n))
    fac, rest = factor_trial(n)
    stack = [rest] if rest > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_probable_prime(m):
            fac[m] = fac.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.extend([d, m // d])
    return fac


def squarefree_part(n):
    n = int(n)
    if n == 0:
        return 0
    fac, rest = factor_trial(n)
    out = -1 if n < 0 else 1
    for p, e in fac.items():
        if e % 2:
            out *= p
    return out * (rest if rest != 1 else 1)


@dataclass(frozen=True)
class TraceRecord:
    """A single trace of Frobenius a_p at a good prime p."""
    p: int
    ap: int

    def __post_init__(self):
        if self.ap * self.ap > 4 * self.p:
            raise ValueError(f"Hasse bound violated at p={self.p}")


class EllipticCurveQ:
    """A curve y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q."""

    def __init__(self, a1, a2, a3, a4, a6, label=None):
        self.a1, self.a2, self.a3, self.a4, self.a6 = (
            ratof(a1), ratof(a2), ratof(a3), ratof(a4), ratof(a6))
        self.label = label
        if self.disc == 0:
            raise SingularCurveError("discriminant vanishes")
        self._ap_cache = {}
        self._minimal_pair = None

    # -- constructors --------------------------------------------------

    @classmethod
    def from_ainvs(cls, ainvs, label=None):
        ainvs = list(ainvs)
        if len(ainvs) == 5:
            return cls(*ainvs, label=label)
        if len(ainvs) == 2:
            a, b = ainvs
            return cls(0, 0, 0, a, b, label=label)
        raise ValueError("expected [a1,a2,a3,a4,a6] or short [a,b]")

    @classmethod
    def from_text(cls, text, label=None):
        """Parse '[a1,a2,a3,a4,a6]' or short '[a,b]' with exact 'p/q' entries."""
        text = text.strip()
        if not (text.startswith("[") and text.endswith("]")):
            raise ValueError(f"curve literal must be bracketed: {text!r}")
        parts = [s for s in text[1:-1].split(",") if s.strip()]
        return cls.from_ainvs([ratof(s) for s in parts], label=label)

    @classmethod
    def from_short(cls, a, b, label=None):
        return cls(0, 0, 0, a, b, label=label)

    def ainvs(self):
        return [self.a1, self.a2, self.a3, self.a4, self.a6]

    # -- invariants ------------------------------------------------------

    @property
    def b2(self):
        return self.a1 ** 2 + 4 * self.a2

    @property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self):
        return self.a3 ** 2 + 4 * self.a6

    @property
    def b8(self):
        return (self.a1 ** 2 * self.a6 + 4 * self.a2 * self.a6
                - self.a1 * self.a3 * self.a4 + self.a2 * self.a3 ** 2
                - self.a4 ** 2)

    @property
    def c4(self):
        return self.b2 ** 2 - 24 * self.b4

    @property
    def c6(self):
        return -self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def disc(self):
        return (-self.b2 ** 2 * self.b8 - 8 * self.b4 ** 3
                - 27 * self.b6 ** 2 + 9 * self.b2 * self.b4 * self.b6)

    @property
    def j(self):
        return self.c4 ** 3 / self.disc

    def __repr__(self):
        tag = f" {self.label}" if self.label else ""
        return f"EllipticCurveQ{tag}({[str(a) for a in self.ainvs()]})"

    def __eq__(self, other):
        if not isinstance(other, EllipticCurveQ):
            return NotImplemented
        return self.ainvs() == other.ainvs()

    def __hash__(self):
        return hash(tuple(self.ainvs()))

    # -- model conversions -------------------------------------------------

    def is_short(self):
        return self.a1 == 0 and self.a2 == 0 and self.a3 == 0

    def short_pair(self):
        """(a, b) with y^2 = x^3 + a x + b isomorphic to the curve over Q.

        A curve already in short form keeps its own (a4, a6); otherwise the
        completed model (-27 c4, -54 c6) is used, which is integral whenever
        the input is.
        """
        if self.is_short():
            return self.a4, self.a6
        return -27 * self.c4, -54 * self.c6

    def minimal_pair(self):
        if self._minimal_pair is None:
            self._minimal_pair = minimal_c4c6(self.c4, self.c6)
        return self._minimal_pair

    def is_isomorphic(self, other):
        return self.minimal_pair() == other.minimal_pair()

    def minimal_disc(self):
        c4m, c6m = self.minimal_pair()
        d = Fraction(c4m ** 3 - c6m ** 2, 1728)
        assert d.denominator == 1
        return d.numerator

    # -- reduction data ------------------------------------------------

    def has_good_reduction(self, p):
        if p in (2, 3):
            raise BadReductionError("reduction type at 2 and 3 is not computed")
        return self.minimal_disc() % p != 0

    def ap(self, p):
        if p not in self._ap_cache:
            self._ap_cache[p] = ap(self, p)
        return self._ap_cache[p]

    def trace_records(self, bound, skip=()):
        out = []
        dmin = self.minimal_disc()
        for p in prime_range(bound, start=5):
            if p in skip or dmin % p == 0:
                continue
            out.append(TraceRecord(p, self.ap(p)))
        return out

    def quadratic_twist(self, d):
        return quadratic_twist(self, d)


def short_pair(e: EllipticCurveQ):
    """Short Weierstrass pair (a, b) = (-27 c4, -54 c6) of the completed model."""
    return e.short_pair()


def _kraus_ok_2(c4, c6):
    # Integral model exists at 2 iff c6 = -1 mod 4, or c4 = 0 mod 16 and
    # c6 = 0 or 8 mod 32.
    if c6 % 4 == 3:
        return True
    return c4 % 16 == 0 and c6 % 32 in (0, 8)


def _kraus_ok_3(c4, c6):
    # Integral model exists at 3 iff v_3(c6) != 2.
    v = _vp(c6, 3)
    return v != 2


def _admissible(c4, c6):
    # Kraus: integral Delta plus the local conditions at 2 and 3.
    return ((c4 ** 3 - c6 ** 2) % 1728 == 0
            and _kraus_ok_2(c4, c6) and _kraus_ok_3(c4, c6))


def minimal_c4c6(c4, c6):
    """The minimal integral (c4, c6) pair of the isomorphism class.

    Scales (c4, c6) by (u^-4, u^-6): integralises, then removes every prime u
    subject to the 2- and 3-adic admissibility conditions of Kraus.
    """
    c4, c6 = Fraction(c4), Fraction(c6)
    if c4 ** 3 - c6 ** 2 == 0:
        raise SingularCurveError("c4^3 = c6^2")
    primes = set()
    # denominators must be cleared completely; factor them fully
    for part in (c4.denominator, c6.denominator):
        primes.update(factor_full(part))
    # for the descent only common large prime factors of the numerators can
    # matter (we need p^4 | c4 and p^6 | c6 simultaneously when both nonzero)
    from math import gcd as _g
    rests = []
    for x in (c4, c6):
        fac, rest = factor_trial(x.numerator)
        primes.update(fac)
        rests.append(rest)
    if c4 == 0 or c6 == 0:
        big = rests[0] if c6 == 0 else rests[1]
        if big > 1:
            primes.update(factor_full(big))
    else:
        g = _g(rests[0], rests[1])
        if g > 1:
            primes.update(factor_full(g))
    u = Fraction(1)
    for p in sorted(primes):
        v4 = _vp(c4, p)
        v6 = _vp(c6, p)
        e4 = v4 // 4 if v4 is not None else None
        e6 = v6 // 6 if v6 is not None else None
        if e4 is None:
            e = e6
        elif e6 is None:
            e = e4
        else:
            e = min(e4, e6)
        if e:
            u *= Fraction(p) ** e
    c4, c6 = c4 / u ** 4, c6 / u ** 6
    assert c4.denominator == 1 and c6.denominator == 1
    c4, c6 = c4.numerator, c6.numerator
    while not _admissible(c4, c6):
        # only the 2- and 3-adic conditions can fail after the u-descent
        if not (_kraus_ok_3(c4, c6) and (c4 ** 3 - c6 ** 2) % 3 ** 3 == 0):
            c4, c6 = c4 * 3 ** 4, c6 * 3 ** 6
        else:
            c4, c6 = c4 * 2 ** 4, c6 * 2 ** 6
    changed = True
    while changed:
        changed = False
        for p in (2, 3):
            nc4, nc6 = Fraction(c4, p ** 4), Fraction(c6, p ** 6)
            if nc4.denominator == 1 and nc6.denominator == 1 and \
                    _admissible(nc4.numerator, nc6.numerator):
                c4, c6 = nc4.numerator, nc6.numerator
                changed = True
    return c4, c6


def ap(e: EllipticCurveQ, p: int) -> int:
    """Trace of Frobenius a_p = p + 1 - #E(F_p) by a quadratic-character sum.

    Requires p >= 5 of good reduction and p below the naive-counting ceiling.
    """
    if p < 5:
        raise BadReductionError("naive counting requires p >= 5")
    if p > AP_PRIME_CEILING:
        raise BadReductionError(f"p exceeds the naive counting ceiling {AP_PRIME_CEILING}")
    c4m, c6m = e.minimal_pair()
    if (c4m ** 3 - c6m ** 2) // 1728 % p == 0:
        raise BadReductionError(f"bad reduction at {p}")
    # y^2 = x^3 - 27 c4 x - 54 c6 is a u=6 rescaling of the minimal model,
    # harmless mod p for p >= 5
    a = (-27 * c4m) % p
    b = (-54 * c6m) % p
    # chi[v] = legendre symbol of v mod p via a squares table
    chi = bytearray(p)
    for x in range(1, p):
        chi[x * x % p] = 1
    total = 0
    for x in range(p):
        f = (x * x % p * x + a * x + b) % p
        if f == 0:
            continue
        total += 1 if chi[f] else -1
    apv = -total
    assert apv * apv <= 4 * p
    return apv


def quadratic_twist(e: EllipticCurveQ, d) -> EllipticCurveQ:
    """Quadratic twist by a nonzero integer d (squarefree part is taken)."""
    d = int(d)
    if d == 0:
        raise ValueError("twist by zero")
    d = squarefree_part(d)
    a, b = e.short_pair()
    return EllipticCurveQ.from_short(d * d * a, d ** 3 * b)


def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return 1 if t == 1 else -1
