"""Trace-of-Frobenius congruence evidence, pair classification, and cheap
local insolubility certificates.

Evidence is never proof: the reports carry the prime bound so it can be
raised.  The insolubility certificate is one-sided: "certified" means the
reduction has no points over F_p, hence no Q_p points exist; the converse
direction is never claimed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ecq import EllipticCurveQ, prime_range
from .models import TwistedModel
from .search import build_sieve


@dataclass(frozen=True)
class CongruenceReport:
    e1: EllipticCurveQ
    e2: EllipticCurveQ
    n: int
    primes_checked: tuple
    all_match: bool
    first_failure: int | None
    trivial_pair: bool
    sign: str = "unknown"     # "+", "-", or "unknown"

    def __post_init__(self):
        assert self.all_match == (self.first_failure is None)


def congruence_evidence(e1: EllipticCurveQ, e2: EllipticCurveQ, n: int,
                        bound: int, sign="unknown") -> CongruenceReport:
    """Check a_p(e1) = a_p(e2) mod n at every good prime p <= bound.

    Primes of bad reduction of either curve, divisors of n, and 2, 3 (below
    the naive-counting threshold) are excluded.
    """
    if bound < 11:
        raise ValueError("bound must be at least 11")
    d1, d2 = e1.minimal_disc(), e2.minimal_disc()
    checked = []
    first_failure = None
    for p in prime_range(bound, start=5):
        if n % p == 0 or d1 % p == 0 or d2 % p == 0:
            continue
        checked.append(p)
        if first_failure is None and (e1.ap(p) - e2.ap(p)) % n:
            first_failure = p
    return CongruenceReport(e1, e2, n, tuple(checked),
                            first_failure is None, first_failure,
                            e1.j == e2.j, sign)


def classify_pair(e1: EllipticCurveQ, e2: EllipticCurveQ) -> str:
    """'trivial_equal_j' (quadratic twists and the like) or 'distinct_j'."""
    return "trivial_equal_j" if e1.j == e2.j else "distinct_j"


def local_insolubility(m: TwistedModel, p: int) -> str:
    """'certified' iff the model has no points over F_p (then it has no
    Q_p-points, since a primitive Z_p point reduces to one); otherwise
    'inconclusive' - solubility is never claimed."""
    table = build_sieve(m, p)
    return "certified" if table.member_count() == 0 else "inconclusive"
