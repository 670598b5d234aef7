"""Enumeration of primitive rational points of bounded height on a twisted
model, with modular sieving.

Candidates are scanned with the first nonzero coordinate positive and the
last one or two coordinates vectorized; each sieve prime contributes a lookup
table of the model's residue classes, sound by reduction (a true rational
point always reduces into the table).  Survivors are verified exactly.
Output is deterministic: sorted by height then lexicographically, independent
of the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .exactmath import SparsePoly, numeric_matrix_rank
from .models import NVARS, ProjPoint, TwistedModel

DEFAULT_HEIGHTS = {7: 200, 9: 60, 11: 20}
SIEVE_CANDIDATE_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


class SievePrimeError(ValueError):
    pass


def integral_polys(m: TwistedModel):
    """Clear denominators and content: same zero set, integer coefficients."""
    out = []
    for f in m.polys:
        den = 1
        for c in f.terms.values():
            d = c.denominator if isinstance(c, Fraction) else 1
            den = den * d // gcd(den, d)
        g = 0
        for c in f.terms.values():
            g = gcd(g, int(c * den))
        g = g or 1
        out.append(SparsePoly(f.nvars, {e: int(c * den) // g
                                        for e, c in f.terms.items()}))
    return out


def _content_union(polys):
    g = 0
    for f in polys:
        for c in f.terms.values():
            g = gcd(g, c)
    return g


def _mod_membership_fn(m: TwistedModel, polys, p):
    """Member predicate on affine tuples over F_p (nonzero tuples)."""
    if m.n != 11:
        red = [{e: c % p for e, c in f.terms.items()} for f in polys]

        def member(pt):
            for terms in red:
                tot = 0
                for e, c in terms.items():
                    v = c
                    for i, k in enumerate(e):
                        if k:
                            v = v * pow(pt[i], k, p) % p
                    tot = (tot + v) % p
                if tot:
                    return False
            return True
        return member

    hess = polys[0].hessian()
    hmod = [[{e: c % p for e, c in hess[i][j].terms.items()} for j in range(5)]
            for i in range(5)]

    def member(pt):
        rows = []
        for i in range(5):
            row = []
            for j in range(5):
                tot = 0
                for e, c in hmod[i][j].items():
                    v = c
                    for k, ex in enumerate(e):
                        if ex:
                            v = v * pow(pt[k], ex, p) % p
                    tot = (tot + v) % p
                row.append(tot)
            rows.append(row)
        return _rank_mod_p(rows, p) <= 3
    return member


def _rank_mod_p(rows, p):
    m = [r[:] for r in rows]
    n = len(m)
    rank = 0
    for col in range(len(m[0])):
        piv = None
        for i in range(rank, n):
            if m[i][col] % p:
                piv = i
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        for i in range(rank + 1, n):
            if m[i][col] % p:
                f = m[i][col] * inv % p
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == n:
            break
    return rank


@dataclass
class SieveTable:
    """Residue classes of the model over F_p.

    ``members`` is a bit array over P^(m-1)(F_p) in enumeration order
    (first nonzero coordinate scaled to 1); ``affine`` is the induced lookup
    over all of F_p^m by base-p index, used for vectorized prescreening.
    """

    p: int
    nvars: int
    members: np.ndarray
    affine: np.ndarray

    def member_count(self):
        return int(self.members.sum())

    def size(self):
        return len(self.members)


def _projective_reps(p, nv):
    reps = []
    for lead in range(nv):
        tail = nv - lead - 1
        count = p ** tail
        for idx in range(count):
            rest = []
            v = idx
            for _ in range(tail):
                rest.append(v % p)
                v //= p
            rest.reverse()
            reps.append((0,) * lead + (1,) + tuple(rest))
    return reps


def build_sieve(m: TwistedModel, p: int) -> SieveTable:
    """Mark every projective class over F_p satisfying the membership
    equations mod p (for n=11: Hessian rank at most 3 mod p)."""
    polys = integral_polys(m)
    if _content_union(polys) % p == 0:
        raise SievePrimeError(f"model content divisible by {p}")
    nv = m.nvars
    member = _mod_membership_fn(m, polys, p)
    reps = _projective_reps(p, nv)
    members = np.zeros(len(reps), dtype=bool)
    affine = np.zeros(p ** nv, dtype=bool)
    powers = [p ** (nv - 1 - i) for i in range(nv)]
    for ridx, rep in enumerate(reps):
        if not member(rep):
            continue
        members[ridx] = True
        for s in range(1, p):
            idx = 0
            for i in range(nv):
                idx += (rep[i] * s % p) * powers[i]
            affine[idx] = True
    return SieveTable(p, nv, members, affine)


def default_sieve_primes(m: TwistedModel, count=2):
    polys = integral_polys(m)
    content = _content_union(polys)
    out = []
    for p in SIEVE_CANDIDATE_PRIMES:
        if content % p == 0:
            continue
        if m.n == 11 and p == 2:
            continue  # second partials are even: the table would mark everything
        out.append(p)
        if len(out) == count:
            break
    return out


def exact_member(m: TwistedModel, polys, coords):
    if m.n == 11:
        hess = polys[0].hessian()
        rows = [[hess[i][j].evaluate(list(coords)) for j in range(5)]
                for i in range(5)]
        return numeric_matrix_rank(rows) <= 3
    return all(f.evaluate(list(coords)) == 0 for f in polys)


_BIGMOD = 2**31 - 1


def _modq_filter(polys, fixed, u_vals, v_vals, q=_BIGMOD):
    """Vectorized necessary condition: every poly vanishes mod q at the
    candidates (fixed prefix, u, v).  Sound: exact zeros stay."""
    keep = np.ones(len(u_vals), dtype=bool)
    nv = polys[0].nvars
    maxdeg = max(p.degree() for p in polys)
    up = [np.ones(len(u_vals), dtype=np.int64)]
    vp = [np.ones(len(v_vals), dtype=np.int64)]
    for _ in range(maxdeg):
        up.append(up[-1] * (u_vals % q) % q)
        vp.append(vp[-1] * (v_vals % q) % q)
    for f in polys:
        tot = np.zeros(len(u_vals), dtype=np.int64)
        for e, c in f.terms.items():
            coef = c % q
            for i in range(nv - 2):
                if e[i]:
                    coef = coef * pow(fixed[i] % q, e[i], q) % q
            if coef == 0:
                continue
            term = coef * up[e[nv - 2]] % q * vp[e[nv - 1]] % q
            tot = (tot + term) % q
        keep &= tot == 0
        if not keep.any():
            break
    return keep


def _scan_leading_range(m, polys, tables, height, lead, lo, hi):
    """All candidates with coords[0..lead-1] = 0, coords[lead] in [lo, hi]."""
    nv = m.nvars
    free = nv - lead - 1
    found = []
    rng = np.arange(-height, height + 1)
    if free == 0:
        cand = (0,) * lead + (1,)
        if exact_member(m, polys, cand):
            found.append(cand)
        return found

    if free == 1:
        grids = {t.p: rng % t.p for t in tables}
        for lead_val in range(lo, hi + 1):
            mask = np.ones(len(rng), dtype=bool)
            for t in tables:
                idx = (lead_val % t.p) * t.p + grids[t.p]
                mask &= t.affine[idx]
            for j in np.nonzero(mask)[0]:
                v = int(rng[j])
                if gcd(lead_val, v) != 1:
                    continue
                cand = (0,) * lead + (lead_val, v)
                if exact_member(m, polys, cand):
                    found.append(cand)
        return found

    # general case: vectorize the last two coordinates
    grid_idx = {}
    for t in tables:
        mu = (rng % t.p)[:, None]
        mv = (rng % t.p)[None, :]
        grid_idx[t.p] = mu * t.p + mv
    mids = free - 2  # number of scalar-looped middle coordinates
    u_grid, v_grid = np.meshgrid(rng, rng, indexing="ij")
    u_flat, v_flat = u_grid.ravel(), v_grid.ravel()

    def leaf(prefix):
        mask = None
        for t in tables:
            acc = 0
            for c in prefix:
                acc = acc * t.p + c % t.p
            sub = t.affine[acc * t.p * t.p + grid_idx[t.p]]
            mask = sub if mask is None else (mask & sub)
        if mask is None:
            mask = np.ones((len(rng), len(rng)), dtype=bool)
        flat = mask.ravel()
        if not flat.any():
            return
        u_vals = u_flat[flat]
        v_vals = v_flat[flat]
        full_prefix = (0,) * lead + prefix
        if m.n != 11:
            keep = _modq_filter(polys, full_prefix, u_vals, v_vals)
            u_vals, v_vals = u_vals[keep], v_vals[keep]
        g0 = 0
        for c in prefix:
            g0 = gcd(g0, c)
        for u, v in zip(u_vals.tolist(), v_vals.tolist()):
            if gcd(gcd(g0, u), v) != 1:
                continue
            cand = full_prefix + (u, v)
            if exact_member(m, polys, cand):
                found.append(cand)

    def rec(prefix, depth):
        if depth == mids:
            leaf(prefix)
            return
        for c in range(-height, height + 1):
            rec(prefix + (c,), depth + 1)

    for lead_val in range(lo, hi + 1):
        rec((lead_val,), 0)
    return found


def search_points(m: TwistedModel, height=None, sieve_primes=None, jobs=1):
    """Primitive points with max |coordinate| <= height satisfying membership.

    The candidate space is scanned with the leading coordinate pattern fixed;
    residues are prescreened against the sieve tables and survivors verified
    exactly.  Results are sorted by (height, coordinates)."""
    if height is None:
        height = DEFAULT_HEIGHTS[m.n]
    polys = integral_polys(m)
    if sieve_primes is None:
        sieve_primes = default_sieve_primes(m)
    tables = [build_sieve(m, p) for p in sieve_primes]
    nv = m.nvars

    results = []
    # leading coordinate pattern 0: parallelize over the first coordinate
    if jobs and jobs > 1:
        chunk = max(1, (height + jobs - 1) // jobs)
        spans = [(lo, min(lo + chunk - 1, height))
                 for lo in range(1, height + 1, chunk)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_scan_leading_range, m, polys, tables,
                                height, 0, lo, hi) for lo, hi in spans]
            for f in futs:
                results.extend(f.result())
    else:
        results.extend(_scan_leading_range(m, polys, tables, height, 0,
                                           1, height))
    for lead in range(1, nv):
        results.extend(_scan_leading_range(m, polys, tables, height, lead,
                                           1, height))
    pts = sorted({ProjPoint(c) for c in results},
                 key=lambda pt: (pt.height, pt.coords))
    return pts


def brute_force_points(m: TwistedModel, height):
    """Sieve-free full enumeration; the completeness oracle for search_points."""
    polys = integral_polys(m)
    nv = m.nvars
    out = []

    def rec(prefix):
        if len(prefix) == nv:
            if not any(prefix):
                return
            g = 0
            for c in prefix:
                g = gcd(g, c)
            if g != 1:
                return
            first = next(c for c in prefix if c)
            if first < 0:
                return
            if exact_member(m, polys, prefix):
                out.append(ProjPoint(prefix))
            return
        for c in range(-height, height + 1):
            rec(prefix + (c,))

    rec(())
    return sorted(set(out), key=lambda pt: (pt.height, pt.coords))
