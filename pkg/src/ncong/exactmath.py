"""Exact arithmetic kernel: rationals, sparse multivariate polynomials, matrices.

Everything downstream (models, covariants, interpretation) runs on the types
in this module.  Scalars are ``fractions.Fraction`` (aliased ``Rat``); integer
coefficients are kept as plain ``int`` where possible since Python promotes
mixed int/Fraction arithmetic exactly.

The monomial order is graded lexicographic with the variable printed first
being the most significant (x > y > z, etc.).  It is fixed globally so that
polynomial division remainders are reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

Rat = Fraction


def ratof(x) -> Fraction:
    """Coerce ints, strings like '3/4' or '-7', and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot coerce {x!r} to a rational")


def grlex_key(expo):
    return (sum(expo), expo)


class SparsePoly:
    """Sparse multivariate polynomial over Q in at most 6 variables.

    Terms map exponent tuples (length ``nvars``) to nonzero coefficients.
    Instances are treated as immutable; all operations return new objects.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        if not 1 <= nvars <= 6:
            raise ValueError("nvars must be between 1 and 6")
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ValueError("exponent tuple of wrong length")
                if c:
                    clean[tuple(e)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars):
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars, c):
        c = c if isinstance(c, (int, Fraction)) else ratof(c)
        return cls(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def gens(cls, nvars):
        """Return the tuple of variable generators (x_0, ..., x_{nvars-1})."""
        out = []
        for i in range(nvars):
            e = [0] * nvars
            e[i] = 1
            out.append(cls(nvars, {tuple(e): 1}))
        return tuple(out)

    # -- basic queries -----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self):
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def sorted_terms(self):
        """Terms in decreasing graded-lex order (leading term first)."""
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading(self):
        """(exponent, coefficient) of the leading term under graded lex."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def coefficient(self, expo):
        return self.terms.get(tuple(expo), 0)

    def content(self):
        """gcd of coefficients as a positive rational (0 for the zero poly)."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            f = c if isinstance(c, Fraction) else Fraction(c)
            num = gcd(num, f.numerator)
            den = den * f.denominator // gcd(den, f.denominator)
        return Fraction(num, den)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, SparsePoly):
            if other.nvars != self.nvars:
                raise ValueError("nvars mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return SparsePoly.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return SparsePoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return SparsePoly.zero(self.nvars)
            return SparsePoly(self.nvars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        # iterate over the smaller operand outside for fewer dict rebuilds
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out = {}
        n = self.nvars
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(e1[i] + e2[i] for i in range(n))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return SparsePoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = SparsePoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, Fraction)) and scalar:
            return self * Fraction(1, 1) * Fraction(scalar) ** -1
        raise TypeError("can only divide by a nonzero scalar")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SparsePoly.constant(self.nvars, other)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        names = "abcdef"[: self.nvars] if self.nvars > 3 else "xyz"[: self.nvars]
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k
            )
            bits.append(f"{c}" if not mono else (f"{c}*{mono}" if c != 1 else mono))
        return " + ".join(bits)

    # -- calculus and evaluation -------------------------------------------

    def diff(self, i):
        """Partial derivative with respect to variable i."""
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return SparsePoly(self.nvars, out)

    def gradient(self):
        return [self.diff(i) for i in range(self.nvars)]

    def hessian(self):
        """Matrix of second partial derivatives (list of lists of SparsePoly)."""
        g = self.gradient()
        return [[g[i].diff(j) for j in range(self.nvars)] for i in range(self.nvars)]

    def evaluate(self, vals):
        """Exact value at a point (sequence of ints/Fractions)."""
        if len(vals) != self.nvars:
            raise ValueError("wrong number of values")
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    v = v * vals[i] ** k
            total += v
        return total if isinstance(total, Fraction) else Fraction(total)

    def eval_mod(self, vals, p):
        """Value at an integer point modulo a prime p (denominators inverted mod p)."""
        total = 0
        for e, c in self.terms.items():
            if isinstance(c, Fraction):
                d = c.denominator % p
                if d == 0:
                    raise ZeroDivisionError(f"coefficient denominator divisible by {p}")
                v = c.numerator % p * pow(d, -1, p)
            else:
                v = c % p
            for i, k in enumerate(e):
                if k:
                    v = v * pow(vals[i] % p, k, p)
            total = (total + v) % p
        return total

    def map_coefficients(self, fn):
        return SparsePoly(self.nvars, {e: fn(c) for e, c in self.terms.items()})


def substitute_linear(f: SparsePoly, m) -> SparsePoly:
    """Substitute x_i <- sum_j m[i][j] x_j, i.e. return f(M x).

    Composition satisfies substitute(substitute(f, M1), M2) = substitute(f, M1*M2).
    Homogeneous degree is preserved.
    """
    rows = m.rows if isinstance(m, RatMatrix) else [list(r) for r in m]
    n = f.nvars
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("matrix size must equal the number of variables")
    forms = []
    for i in range(n):
        forms.append(SparsePoly(n, {
            tuple(1 if j == k else 0 for k in range(n)): rows[i][j]
            for j in range(n) if rows[i][j]
        }))
    # cache powers of each form up to the degree actually used
    maxdeg = [0] * n
    for e in f.terms:
        for i, k in enumerate(e):
            maxdeg[i] = max(maxdeg[i], k)
    powers = []
    for i in range(n):
        pows = [SparsePoly.constant(n, 1)]
        for _ in range(maxdeg[i]):
            pows.append(pows[-1] * forms[i])
        powers.append(pows)
    out = SparsePoly.zero(n)
    for e, c in f.terms.items():
        term = SparsePoly.constant(n, c)
        for i, k in enumerate(e):
            if k:
                term = term * powers[i][k]
        out = out + term
    return out


def divide_single(f: SparsePoly, g: SparsePoly):
    """Divide f by a single nonzero polynomial g in the fixed graded-lex order.

    Returns (q, r) with f = q*g + r and no monomial of r divisible by the
    leading monomial of g.  The remainder is unique for the fixed order.
    """
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if f.nvars != g.nvars:
        raise ValueError("nvars mismatch")
    n = f.nvars
    ge, gc = g.leading()
    gterms = list(g.terms.items())
    work = dict(f.terms)
    q = {}
    r = {}
    while work:
        e = max(work, key=grlex_key)
        c = work.pop(e)
        if all(e[i] >= ge[i] for i in range(n)):
            qe = tuple(e[i] - ge[i] for i in range(n))
            qc = c / gc if isinstance(c, Fraction) or isinstance(gc, Fraction) else Fraction(c, gc)
            if qc.denominator == 1:
                qc = qc.numerator
            q[qe] = q.get(qe, 0) + qc
            for te, tc in gterms:
                ke = tuple(qe[i] + te[i] for i in range(n))
                s = work.get(ke, 0) - qc * tc
                if ke == e:
                    continue  # leading term cancels exactly
                if s:
                    work[ke] = s
                else:
                    work.pop(ke, None)
        else:
            r[e] = r.get(e, 0) + c
    return SparsePoly(n, q), SparsePoly(n, r)


class RatMatrix:
    """Dense matrix of rationals (at most 6x6 in practice)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = [[c if isinstance(c, (int, Fraction)) else ratof(c) for c in r]
                     for r in rows]
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise ValueError("ragged rows")

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def is_square(self):
        return self.nrows == self.ncols

    def __eq__(self, other):
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return [[Fraction(c) for c in r] for r in self.rows] == \
               [[Fraction(c) for c in r] for r in other.rows]

    def __repr__(self):
        return "RatMatrix(%r)" % (self.rows,)

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            if self.ncols != other.nrows:
                raise ValueError("dimension mismatch")
            return RatMatrix([
                [sum(self.rows[i][k] * other.rows[k][j] for k in range(self.ncols))
                 for j in range(other.ncols)]
                for i in range(self.nrows)
            ])
        # matrix @ vector
        vec = list(other)
        if self.ncols != len(vec):
            raise ValueError("dimension mismatch")
        return [sum(self.rows[i][k] * vec[k] for k in range(self.ncols))
                for i in range(self.nrows)]

    def transpose(self):
        return RatMatrix([[self.rows[i][j] for i in range(self.nrows)]
                          for j in range(self.ncols)])

    def scaled_integer(self):
        """(integer matrix, scale) with self = int_matrix / scale (scale > 0)."""
        den = 1
        for r in self.rows:
            for c in r:
                d = c.denominator if isinstance(c, Fraction) else 1
                den = den * d // gcd(den, d)
        ints = [[int(c * den) for c in r] for r in self.rows]
        return ints, den


def det(m: RatMatrix) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if not m.is_square():
        raise ValueError("determinant of a non-square matrix")
    n = m.nrows
    if n == 0:
        return Fraction(1)
    a, den = m.scaled_integer()
    a = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], den ** n)


def solve_linear(a: RatMatrix, b):
    """Solve a*x = b exactly; return a solution vector or None if inconsistent.

    Underdetermined systems get the solution with free variables set to zero,
    pivoting in column order, so the output is deterministic.
    """
    rows = [[Fraction(c) for c in r] + [Fraction(v) for v in [bv]]
            for r, bv in zip(a.rows, b)]
    if len(b) != a.nrows:
        raise ValueError("dimension mismatch")
    n, mcol = a.nrows, a.ncols
    pivots = []
    r = 0
    for col in range(mcol):
        piv = None
        for i in range(r, n):
            if rows[i][col]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        rows[r] = [c / pv for c in rows[r]]
        for i in range(n):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [ci - f * cr for ci, cr in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    for i in range(r, n):
        if rows[i][mcol]:
            return None
    x = [Fraction(0)] * mcol
    for i, col in enumerate(pivots):
        x[col] = rows[i][mcol]
    return x


def poly_matrix_det(entries):
    """Determinant of a square matrix of SparsePoly, by expansion over column
    subsets (dynamic programming), which keeps intermediate sizes small."""
    n = len(entries)
    if n == 0:
        raise ValueError("empty matrix")
    nv = entries[0][0].nvars
    # order rows by total size to keep early partial products sparse
    order = sorted(range(n), key=lambda i: sum(len(entries[i][j].terms) for j in range(n)))
    state = {0: SparsePoly.constant(nv, 1)}
    full = (1 << n) - 1
    for idx, i in enumerate(order):
        new = {}
        for used, acc in state.items():
            for j in range(n):
                bit = 1 << j
                if used & bit:
                    continue
                cell = entries[i][j]
                if cell.is_zero():
                    continue
                # permutation sign: count how many already-used columns are > j
                sgn = -1 if bin(used >> (j + 1)).count("1") % 2 else 1
                contrib = acc * cell
                if sgn < 0:
                    contrib = -contrib
                key = used | bit
                if key in new:
                    new[key] = new[key] + contrib
                else:
                    new[key] = contrib
        state = new
    result = state.get(full, SparsePoly.zero(nv))
    # account for the row reordering parity
    perm = list(order)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return result if sign > 0 else -result


def numeric_matrix_rank(rows):
    """Rank of a matrix with int/Fraction entries, by exact Gaussian elimination."""
    m = [[Fraction(c) for c in r] for r in rows]
    if not m:
        return 0
    nr, nc = len(m), len(m[0])
    rank = 0
    for col in range(nc):
        piv = None
        for i in range(rank, nr):
            if m[i][col]:
                piv = i
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        for i in range(rank + 1, nr):
            if m[i][col]:
                f = m[i][col] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == nr:
            break
    return rank
