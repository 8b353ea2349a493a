"""Exact linear algebra over Q, plus integer lattice canonical forms.

Matrices are tuples of tuples of Fraction, row major.  Endomorphisms act
on column vectors (matvec), subspaces and lattices are stored as row
bases.  There is no floating point anywhere in the package.

The integer side (Hermite and Smith forms, saturation, kernels over Z)
is hand rolled: we need the transformation matrices, and more
importantly a deterministic canonical basis for every lattice, because
lattice equality and quotient coordinates are answers here rather than
intermediate steps.  Sizes stay small (ambient rank <= 21), so dense
Fraction elimination is fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .errors import (
    MixedAmbient,
    NotNilpotent,
    NotUnipotent,
    PreconditionViolated,
    SpecFormatError,
)

Vec = tuple
Mat = tuple

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise SpecFormatError(f"not an exact scalar: {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecFormatError(f"unparsable scalar {x!r}") from exc


def format_scalar(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vec(xs) -> Vec:
    return tuple(frac(x) for x in xs)


def mat(rows) -> Mat:
    out = tuple(vec(r) for r in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise SpecFormatError("ragged matrix")
    return out


def zero_vec(n: int) -> Vec:
    return (ZERO,) * n


def zeros(n: int, m: int) -> Mat:
    return tuple((ZERO,) * m for _ in range(n))


def identity(n: int) -> Mat:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def transpose(m: Mat) -> Mat:
    return tuple(zip(*m)) if m else ()


def _scaled_int_rows(rows):
    """Rows with denominators cleared, plus the common scale.  Integer
    arithmetic on the cleared rows is far cheaper than Fraction ops."""
    den = 1
    for row in rows:
        for x in row:
            d = x.denominator
            if d != 1:
                den = den * d // gcd(den, d)
    if den == 1:
        return [[x.numerator for x in row] for row in rows], 1
    return [[x.numerator * (den // x.denominator) for x in row] for row in rows], den


def matmul(a: Mat, b: Mat) -> Mat:
    if not a or not b:
        return tuple(() for _ in a)
    ia, da = _scaled_int_rows(a)
    ib, db = _scaled_int_rows(b)
    bt = list(zip(*ib))
    d = da * db
    return tuple(
        tuple(Fraction(sum(x * y for x, y in zip(row, col)), d) for col in bt)
        for row in ia
    )


def matvec(a: Mat, v: Vec) -> Vec:
    if not a:
        return ()
    ia, da = _scaled_int_rows(a)
    iv, dv = _scaled_int_rows([v])
    d = da * dv
    return tuple(Fraction(sum(x * y for x, y in zip(row, iv[0])), d) for row in ia)


def vecmat(v: Vec, a: Mat) -> Vec:
    return tuple(sum(v[i] * a[i][j] for i in range(len(v))) for j in range(len(a[0]) if a else 0))


def matadd(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def matsub(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(a, b))


def matscale(c, a: Mat) -> Mat:
    c = frac(c)
    return tuple(tuple(c * x for x in r) for r in a)


def matpow(a: Mat, k: int) -> Mat:
    out = identity(len(a))
    for _ in range(k):
        out = matmul(out, a)
    return out


def vadd(u: Vec, v: Vec) -> Vec:
    return tuple(x + y for x, y in zip(u, v))


def vsub(u: Vec, v: Vec) -> Vec:
    return tuple(x - y for x, y in zip(u, v))


def vscale(c, v: Vec) -> Vec:
    c = frac(c)
    return tuple(c * x for x in v)


def dot(u: Vec, v: Vec) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), ZERO)


def is_zero_vec(v: Vec) -> bool:
    return all(x == 0 for x in v)


def is_zero_mat(m: Mat) -> bool:
    return all(is_zero_vec(r) for r in m)


def rref(m: Mat):
    """Reduced row echelon form.  Returns (R, pivot_columns).

    Elimination runs on denominator cleared integer rows (each kept
    primitive to tame entry growth); the form is unique, so the result
    matches entry by entry what Fraction elimination would produce."""
    work = []
    for r in m:
        den = 1
        for x in r:
            d = x.denominator
            if d != 1:
                den = den * d // gcd(den, d)
        work.append([x.numerator * (den // x.denominator) for x in r])
    nr = len(work)
    nc = len(work[0]) if nr else 0
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if work[i][c]), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        piv = work[r][c]
        for i in range(nr):
            if i != r and work[i][c]:
                f = work[i][c]
                row = [piv * a - f * b for a, b in zip(work[i], work[r])]
                g = 0
                for x in row:
                    g = gcd(g, x)
                work[i] = [x // g for x in row] if g > 1 else row
        pivots.append(c)
        r += 1
    out = []
    for i, row in enumerate(work):
        piv = row[pivots[i]] if i < len(pivots) else 1
        out.append(tuple(Fraction(x, piv) for x in row))
    return tuple(out), tuple(pivots)


def rank(m: Mat) -> int:
    return len(rref(m)[1])


def solve(a: Mat, b: Vec):
    """One solution x of a . x = b (column convention), or None."""
    n = len(a)
    m = len(a[0]) if n else 0
    if len(b) != n:
        raise MixedAmbient("solve: shape mismatch")
    aug = tuple(tuple(a[i]) + (b[i],) for i in range(n))
    r, piv = rref(aug)
    if m in piv:
        return None
    x = [ZERO] * m
    for i, c in enumerate(piv):
        x[c] = r[i][m]
    return tuple(x)


def inverse(a: Mat):
    n = len(a)
    aug = tuple(tuple(a[i]) + identity(n)[i] for i in range(n))
    r, piv = rref(aug)
    if piv != tuple(range(n)):
        return None
    return tuple(row[n:] for row in r[:n])


def det(a: Mat) -> Fraction:
    rows = [list(r) for r in a]
    n = len(rows)
    out = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            out = -out
        out *= rows[c][c]
        inv = rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] / inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return out


def kernel_basis(m: Mat) -> Mat:
    """Rows spanning the right kernel {x : m . x = 0}."""
    nc = len(m[0]) if m else 0
    r, piv = rref(m)
    pivset = set(piv)
    free = [j for j in range(nc) if j not in pivset]
    out = []
    for f in free:
        v = [ZERO] * nc
        v[f] = ONE
        for i, p in enumerate(piv):
            v[p] = -r[i][f]
        out.append(tuple(v))
    return tuple(out)


def image_basis(m: Mat) -> Mat:
    """Rows spanning the column space of m."""
    r, piv = rref(transpose(m))
    return tuple(r[i] for i in range(len(piv)))


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of Q^n with its canonical rref row basis.

    Equality of fields is equality of subspaces.  Construct through the
    classmethods; the raw constructor trusts its input to be reduced.
    """

    ambient: int
    basis: Mat

    @classmethod
    def span(cls, vectors, ambient: int) -> "Subspace":
        vectors = tuple(vec(v) for v in vectors)
        for v in vectors:
            if len(v) != ambient:
                raise MixedAmbient("span: vector length != ambient")
        if not vectors:
            return cls(ambient, ())
        r, piv = rref(vectors)
        return cls(ambient, r[: len(piv)])

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls(ambient, identity(ambient))

    @classmethod
    def kernel(cls, m: Mat) -> "Subspace":
        nc = len(m[0]) if m else 0
        return cls.span(kernel_basis(m), nc)

    @classmethod
    def image(cls, m: Mat) -> "Subspace":
        return cls.span(image_basis(m), len(m))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _pivots(self):
        return tuple(next(j for j, x in enumerate(row) if x != 0) for row in self.basis)

    def reduce(self, v: Vec) -> Vec:
        """Residual of v after eliminating this subspace's pivot coordinates.

        The residual is zero iff v is a member, and reduce is linear, so
        it doubles as a canonical projection along the subspace.
        """
        v = vec(v)
        if len(v) != self.ambient:
            raise MixedAmbient("reduce: vector length != ambient")
        out = list(v)
        for row, p in zip(self.basis, self._pivots()):
            if out[p] != 0:
                f = out[p]
                out = [a - f * b for a, b in zip(out, row)]
        return tuple(out)

    def contains(self, v: Vec) -> bool:
        return is_zero_vec(self.reduce(v))

    def contains_space(self, other: "Subspace") -> bool:
        if self.ambient != other.ambient:
            raise MixedAmbient("contains_space: ambient mismatch")
        return all(self.contains(v) for v in other.basis)

    def coords(self, v: Vec):
        """Coefficients of v in the basis rows, or None."""
        if not self.basis:
            return () if is_zero_vec(vec(v)) else None
        return solve(transpose(self.basis), vec(v))

    def add(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise MixedAmbient("add: ambient mismatch")
        return Subspace.span(self.basis + other.basis, self.ambient)

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise MixedAmbient("intersect: ambient mismatch")
        a, b = self.basis, other.basis
        if not a or not b:
            return Subspace.zero(self.ambient)
        stacked = a + b
        found = []
        for y in kernel_basis(transpose(stacked)):
            v = zero_vec(self.ambient)
            for coef, row in zip(y[: len(a)], a):
                v = vadd(v, vscale(coef, row))
            found.append(v)
        return Subspace.span(found, self.ambient)


# ---------------------------------------------------------------------------
# integer side


def _den_lcm(v: Vec) -> int:
    out = 1
    for x in v:
        out = lcm(out, Fraction(x).denominator)
    return out


def primitive(v: Vec) -> Vec:
    """Shortest integral vector on the same ray (orientation kept)."""
    v = vec(v)
    if is_zero_vec(v):
        return v
    d = _den_lcm(v)
    ints = [int(x * d) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(Fraction(x // g) for x in ints)


def hnf(rows) -> tuple:
    """Row Hermite normal form over Z, canonical.

    Pivots positive, entries above a pivot reduced into [0, pivot),
    zero rows dropped.  Input rows must be integral.
    """
    m = [[int(x) for x in r] for r in rows]
    if not m:
        return ()
    nc = len(m[0])
    nr = len(m)
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(r + 1, nr):
            while m[i][c] != 0:
                q = m[r][c] // m[i][c]
                m[r] = [a - q * b for a, b in zip(m[r], m[i])]
                m[r], m[i] = m[i], m[r]
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[r])]
        r += 1
    return tuple(tuple(row) for row in m[:r] if any(row))


def int_left_kernel(m) -> tuple:
    """HNF basis of {x in Z^k : x . m = 0} for integral m with k rows."""
    k = len(m)
    if k == 0:
        return ()
    nc = len(m[0])
    aug = [list(map(int, m[i])) + [int(i == j) for j in range(k)] for i in range(k)]
    h = hnf(aug)
    out = [row[nc:] for row in h if not any(row[:nc])]
    # rows of an identity-augmented HNF never vanish entirely, so every
    # kernel vector survives; re-normalize for a canonical answer
    return hnf(out)


def saturate(rows) -> tuple:
    """HNF basis of (Q-span of rows) intersected with Z^n."""
    rows = mat(rows)
    if not rows:
        return ()
    n = len(rows[0])
    ker = kernel_basis(rows)
    if not ker:
        return tuple(tuple(int(x) for x in row) for row in identity(n))
    cols = transpose(tuple(primitive(k) for k in ker))
    return int_left_kernel(tuple(tuple(int(x) for x in r) for r in cols))


def snf(a):
    """Smith normal form.  Returns (d, u, v) with u . a . v = d,
    u and v unimodular, diagonal entries nonnegative and each dividing
    the next."""
    nr = len(a)
    nc = len(a[0]) if nr else 0
    m = [[int(x) for x in row] for row in a]
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]
    v = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def rowop(i, j, q):
        m[i] = [x - q * y for x, y in zip(m[i], m[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def rowswap(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def colop(i, j, q):
        for row in m:
            row[i] -= q * row[j]
        for row in v:
            row[i] -= q * row[j]

    def colswap(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(nr, nc):
        pivot = None
        for i in range(t, nr):
            for j in range(t, nc):
                if m[i][j] != 0:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        rowswap(t, pivot[0])
        colswap(t, pivot[1])
        while True:
            clean = True
            for i in range(t + 1, nr):
                if m[i][t]:
                    q = m[i][t] // m[t][t]
                    rowop(i, t, q)
                    if m[i][t]:
                        rowswap(i, t)
                        clean = False
            for j in range(t + 1, nc):
                if m[t][j]:
                    q = m[t][j] // m[t][t]
                    colop(j, t, q)
                    if m[t][j]:
                        colswap(j, t)
                        clean = False
            if not clean:
                continue
            bad = None
            for i in range(t + 1, nr):
                for j in range(t + 1, nc):
                    if m[i][j] % m[t][t] != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            rowop(t, bad, -1)
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    as_mat = lambda rows: tuple(tuple(row) for row in rows)
    return as_mat(m), as_mat(u), as_mat(v)


@dataclass(frozen=True)
class ZLattice:
    """Finitely generated subgroup of Q^n.

    Stored as rows/denom where rows is an integer HNF basis and denom is
    the least positive integer d with d * self integral.  Equal
    subgroups always produce identical fields, so dataclass equality is
    lattice equality.

    denom stays 1 for anything living inside an integral frame; images
    under rational operators (the logarithm of a unipotent automorphism,
    say) pick up honest denominators and cost nothing extra to keep.
    """

    ambient: int
    rows: tuple = ()
    denom: int = 1

    @classmethod
    def _reduce(cls, ambient, int_rows, denom) -> "ZLattice":
        h = hnf(int_rows)
        if not h:
            return cls(ambient, (), 1)
        g = denom
        for row in h:
            for x in row:
                g = gcd(g, x)
        if g > 1:
            h = tuple(tuple(x // g for x in row) for row in h)
            denom //= g
        return cls(ambient, h, denom)

    @classmethod
    def from_vectors(cls, vectors, ambient: int) -> "ZLattice":
        vectors = tuple(vec(v) for v in vectors)
        for v in vectors:
            if len(v) != ambient:
                raise MixedAmbient("lattice: vector length != ambient")
        d = 1
        for v in vectors:
            d = lcm(d, _den_lcm(v))
        ints = [tuple(int(x * d) for x in v) for v in vectors]
        return cls._reduce(ambient, ints, d)

    @classmethod
    def standard(cls, n: int) -> "ZLattice":
        return cls(n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), 1)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def basis_vectors(self) -> Mat:
        d = Fraction(1, self.denom)
        return tuple(tuple(x * d for x in row) for row in self.rows)

    def _int_coords(self, w):
        w = list(w)
        out = []
        for row in self.rows:
            p = next(j for j, x in enumerate(row) if x)
            q, r = divmod(w[p], row[p])
            if r:
                return None
            w = [a - q * b for a, b in zip(w, row)]
            out.append(q)
        return tuple(out) if not any(w) else None

    def coords(self, v: Vec):
        """Integer coordinates of v in the HNF basis, or None."""
        v = vec(v)
        if len(v) != self.ambient:
            raise MixedAmbient("coords: vector length != ambient")
        w = []
        for x in v:
            y = x * self.denom
            if y.denominator != 1:
                return None
            w.append(y.numerator)
        return self._int_coords(w)

    def contains(self, v: Vec) -> bool:
        return self.coords(v) is not None

    def qspan(self) -> Subspace:
        return Subspace.span(self.basis_vectors(), self.ambient)

    def add(self, other: "ZLattice") -> "ZLattice":
        if self.ambient != other.ambient:
            raise MixedAmbient("lattice add: ambient mismatch")
        d = lcm(self.denom, other.denom)
        rows = [tuple(x * (d // self.denom) for x in r) for r in self.rows]
        rows += [tuple(x * (d // other.denom) for x in r) for r in other.rows]
        return ZLattice._reduce(self.ambient, rows, d)

    def intersect(self, other: "ZLattice") -> "ZLattice":
        if self.ambient != other.ambient:
            raise MixedAmbient("lattice intersect: ambient mismatch")
        if not self.rows or not other.rows:
            return ZLattice(self.ambient)
        d = lcm(self.denom, other.denom)
        a = [tuple(x * (d // self.denom) for x in r) for r in self.rows]
        b = [tuple(x * (d // other.denom) for x in r) for r in other.rows]
        stacked = a + [tuple(-x for x in r) for r in b]
        rows = []
        for y in int_left_kernel(stacked):
            w = [0] * self.ambient
            for coef, row in zip(y[: len(a)], a):
                w = [s + coef * x for s, x in zip(w, row)]
            rows.append(tuple(w))
        return ZLattice._reduce(self.ambient, rows, d)

    def intersect_subspace(self, space: Subspace) -> "ZLattice":
        """Members of this lattice lying in a Q-subspace."""
        if self.ambient != space.ambient:
            raise MixedAmbient("lattice/subspace intersect: ambient mismatch")
        if not self.rows:
            return ZLattice(self.ambient)
        ker = kernel_basis(space.basis) if space.basis else identity(self.ambient)
        if not ker:
            return self
        cols = transpose(tuple(primitive(k) for k in ker))
        w = matmul(mat(self.rows), cols)
        rows = []
        for c in int_left_kernel(tuple(tuple(int(x) for x in r) for r in w)):
            v = [0] * self.ambient
            for coef, row in zip(c, self.rows):
                v = [s + coef * x for s, x in zip(v, row)]
            rows.append(tuple(v))
        return ZLattice._reduce(self.ambient, rows, self.denom)

    def apply(self, op: Mat) -> "ZLattice":
        """Image lattice under a linear map (columns convention)."""
        return ZLattice.from_vectors(
            [matvec(op, b) for b in self.basis_vectors()], len(op)
        )


def order_in_quotient(x: Vec, lat: ZLattice, modulo: Subspace) -> int:
    """Least a >= 1 with a*x inside lat + modulo.

    Precondition: x lies in the Q-span of lat plus modulo.
    """
    x = vec(x)
    if len(x) != lat.ambient or modulo.ambient != lat.ambient:
        raise MixedAmbient("order_in_quotient: ambient mismatch")
    xr = modulo.reduce(x)
    red = ZLattice.from_vectors(
        [modulo.reduce(r) for r in lat.basis_vectors()], lat.ambient
    )
    if is_zero_vec(xr):
        return 1
    if not red.rows:
        raise PreconditionViolated("element not in the span of lattice + subspace")
    c = solve(transpose(red.basis_vectors()), xr)
    if c is None:
        raise PreconditionViolated("element not in the span of lattice + subspace")
    a = 1
    for y in c:
        a = lcm(a, y.denominator)
    return a


# ---------------------------------------------------------------------------
# nilpotent exponentials


def nilpotency_index(n_mat: Mat) -> int:
    """Least k with n_mat**k = 0.  Raises NotNilpotent otherwise."""
    n = len(n_mat)
    p = identity(n)
    for k in range(n + 1):
        if is_zero_mat(p):
            return k
        p = matmul(n_mat, p)
    raise NotNilpotent("matrix power did not vanish by the ambient rank")


def is_nilpotent(n_mat: Mat) -> bool:
    try:
        nilpotency_index(n_mat)
        return True
    except NotNilpotent:
        return False


def exp_nilpotent(n_mat: Mat) -> Mat:
    k = nilpotency_index(n_mat)
    out = identity(len(n_mat))
    term = identity(len(n_mat))
    for i in range(1, k):
        term = matscale(Fraction(1, i), matmul(term, n_mat))
        out = matadd(out, term)
    return out


def log_unipotent(u_mat: Mat) -> Mat:
    m = matsub(u_mat, identity(len(u_mat)))
    try:
        k = nilpotency_index(m)
    except NotNilpotent as exc:
        raise NotUnipotent("matrix minus identity is not nilpotent") from exc
    out = zeros(len(u_mat), len(u_mat))
    term = identity(len(u_mat))
    for i in range(1, k):
        term = matmul(term, m)
        out = matadd(out, matscale(Fraction((-1) ** (i + 1), i), term))
    return out


# ---------------------------------------------------------------------------
# JSON helpers ("p/q" strings keep reports byte stable)


def vec_to_json(v: Vec) -> list:
    return [format_scalar(x) for x in v]


def mat_to_json(m: Mat) -> list:
    return [vec_to_json(r) for r in m]


def vec_from_json(data) -> Vec:
    if not isinstance(data, list):
        raise SpecFormatError("vector: expected a list")
    return vec(data)


def mat_from_json(data) -> Mat:
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise SpecFormatError("matrix: expected a list of lists")
    return mat(data)
