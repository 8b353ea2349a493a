"""Period points and the classifying space predicates.

A period point is a decreasing filtration of the complexified ambient
space of a frame.  The weight filtration of the frame cuts every such
point into two graded pieces, the inner one polarized by the frame
pairing and the quotient line polarized trivially, and all predicates
are computed piecewise: membership in the flag variety is a type
invariant, isotropy selects the compact dual, and positivity of the
induced hermitian forms selects the open domain inside it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    GriffithsViolated,
    InvariantViolation,
    MixedAmbient,
    NotInCompactDual,
    PreconditionViolated,
)
from .fans import unflatten
from .gaussian import (
    ONE,
    GSpace,
    Gi,
    gdet,
    gexp_nilpotent,
    gmat,
    gmatvec,
    gvec,
    i_power,
    lift_mat,
)
from .hodge import Frame, check_in_g
from .qlinalg import is_nilpotent, mat, matadd, matscale, zeros


def hodge_numbers(frame: Frame) -> dict:
    """Hodge multiplicities of the graded pieces, keyed by weight."""
    inner = {}
    for p, q, m in frame.hodge:
        inner[(p, q)] = m
    return {0: {(0, 0): 1}, frame.weight: inner}


@dataclass(eq=False)
class PeriodPoint:
    """A filtration of the complexified ambient space of a frame.

    ``jumps`` maps a level to spanning vectors; the space at level p is
    spanned by everything declared at levels >= p.  Construction checks
    the flag condition: on each graded piece of the weight filtration
    the graded dimensions must match the hodge multiplicities.
    """

    frame: Frame
    jumps: dict

    _graded: tuple = field(init=False, repr=False)

    def __post_init__(self):
        fr = self.frame
        levels = sorted(self.jumps, reverse=True)
        if not levels:
            raise PreconditionViolated("a period point needs at least one level")
        acc = []
        out = []
        for p in levels:
            for v in self.jumps[p]:
                v = gvec(v)
                if len(v) != fr.dim:
                    raise MixedAmbient("spanning vector of the wrong length")
                acc.append(v)
            out.append((p, GSpace(fr.dim, acc)))
        self.jumps = tuple(out)
        self._graded = self._split_graded()
        self._check_flag()

    # --- filtration access ---

    @property
    def jump_indices(self) -> tuple:
        return tuple(p for p, _ in self.jumps)

    def at(self, p: int) -> GSpace:
        """Value of the filtration at level p, constant between jumps."""
        found = None
        for q, space in self.jumps:
            if q >= p:
                found = space
            else:
                break
        if found is None:
            return GSpace(self.frame.dim)
        return found

    def apply(self, op) -> "PeriodPoint":
        """Transport along an invertible operator, revalidating the flag."""
        moved = {p: [gmatvec(op, v) for v in s.basis] for p, s in self.jumps}
        return PeriodPoint(self.frame, moved)

    # --- graded pieces ---

    def _split_graded(self):
        fr = self.frame
        r = fr.rank
        inner_full = GSpace(
            fr.dim, [tuple(ONE if j == i else Gi() for j in range(fr.dim)) for i in range(r)]
        )
        inner = {}
        quot = {}
        for p, space in self.jumps:
            cut = space.intersect(inner_full)
            inner[p] = GSpace(r, [row[:r] for row in cut.basis])
            # the quotient line: rank-nullity of the last coordinate map
            quot[p] = GSpace(1, [(ONE,)] if space.dim > cut.dim else [])
        return (
            (0, ((ONE,),), quot),
            (fr.weight, lift_mat(fr.gram), inner),
        )

    def graded(self, k: int, p: int) -> GSpace:
        """The level p piece of the filtration induced on gr(k)."""
        for weight, _, table in self._graded:
            if weight == k:
                top = None
                for q, space in sorted(table.items(), reverse=True):
                    if q >= p:
                        top = space
                    else:
                        break
                if top is None:
                    ambient = 1 if k == 0 else self.frame.rank
                    return GSpace(ambient)
                return top
        raise PreconditionViolated(f"no graded piece in weight {k}")

    def _check_flag(self):
        numbers = hodge_numbers(self.frame)
        for k, _, table in self._graded:
            types = numbers[k]
            levels = sorted({p for p, _ in types} | set(table))
            for p in range(levels[0] - 1, levels[-1] + 2):
                want = sum(m for (pp, _), m in types.items() if pp >= p)
                got = self.graded(k, p).dim
                if got != want:
                    raise PreconditionViolated(
                        f"graded dimension at level {p} in weight {k} is "
                        f"{got}, the type data needs {want}"
                    )


def extend_inner_filtration(frame: Frame, jumps: dict) -> PeriodPoint:
    """Period point from a filtration of the inner space alone.

    The quotient line has type (0, 0), so it joins every level p <= 0
    and the inner data is padded by a trailing zero coordinate.
    """
    full = {}
    for p, vectors in jumps.items():
        rows = []
        for v in vectors:
            v = gvec(v)
            if len(v) != frame.rank:
                raise MixedAmbient("inner vector of the wrong length")
            rows.append(v + (Gi(),))
        if p <= 0:
            rows.append(gvec(frame.e_vector))
        full[p] = rows
    if all(p > 0 for p in full):
        full[0] = [gvec(frame.e_vector)]
    return PeriodPoint(frame, full)


# --- predicates ---

def _pairing(gram, x, y) -> Gi:
    acc = Gi()
    for s, xs in enumerate(x):
        if not xs:
            continue
        for t, g in enumerate(gram[s]):
            if g:
                acc = acc + xs * g * y[t]
    return acc


def in_compact_dual(pt: PeriodPoint) -> bool:
    """Bilinear isotropy: levels p and q pair to zero once p + q > k."""
    for k, gram, table in pt._graded:
        levels = [p for p in table if table[p].dim]
        for p in levels:
            for q in levels:
                if p + q <= k:
                    continue
                for x in table[p].basis:
                    for y in table[q].basis:
                        if _pairing(gram, x, y):
                            return False
    return True


def hermitian_gram(pt: PeriodPoint, k: int, p: int):
    """Gram matrix of the hermitian form on the (p, k - p) intersection,
    or None when that intersection has the wrong dimension.

    Computed in the reduced basis of the intersection, so individual
    entries rescale with the pivots; the signature does not.
    """
    numbers = hodge_numbers(pt.frame)[k]
    q = k - p
    want = numbers.get((p, q), 0)
    piece = pt.graded(k, p).intersect(pt.graded(k, q).conjugate())
    if piece.dim != want:
        return None
    gram = next(g for kk, g, _ in pt._graded if kk == k)
    sign = i_power(p - q)
    rows = []
    for x in piece.basis:
        rows.append(
            tuple(sign * _pairing(gram, x, tuple(c.conjugate() for c in y)) for y in piece.basis)
        )
    m = tuple(rows)
    for a in range(len(m)):
        for b in range(len(m)):
            if m[a][b].conjugate() != m[b][a]:
                raise InvariantViolation("induced form is not hermitian")
    return m


def _positive_definite(m) -> bool:
    for t in range(1, len(m) + 1):
        minor = gdet(tuple(row[:t] for row in m[:t]))
        if minor.im != 0:
            raise InvariantViolation("principal minor of a hermitian form is not real")
        if minor.re <= 0:
            return False
    return True


def in_D(pt: PeriodPoint) -> bool:
    """Membership in the open domain.  Raises NotInCompactDual when the
    point fails isotropy, so False always means a positivity failure."""
    if not in_compact_dual(pt):
        raise NotInCompactDual("point pairs nontrivially above the weight")
    for k, types in hodge_numbers(pt.frame).items():
        for (p, q), m in types.items():
            if m == 0:
                continue
            gram = hermitian_gram(pt, k, p)
            if gram is None or not _positive_definite(gram):
                return False
    return True


def small_griffiths(pt: PeriodPoint, n_mat) -> bool:
    """Infinitesimal transversality: the operator moves each level into
    the next one down."""
    check_in_g(pt.frame, n_mat)
    op = lift_mat(mat(n_mat))
    for p, space in pt.jumps:
        target = pt.at(p - 1)
        for v in space.basis:
            if not target.contains(gmatvec(op, v)):
                return False
    return True


def nilpotent_orbit_test(pt: PeriodPoint, cone, y_samples=(1, 4, 16, 64, 256)) -> bool:
    """Sampled orbit membership along a cone of directions.

    Each generator must satisfy transversality (GriffithsViolated when
    one does not).  The zero cone reduces to plain membership.  This
    samples the diagonal of the parameter space at the given heights; a
    True is evidence, not a proof.
    """
    fr = pt.frame
    gens = [unflatten(r, fr.dim) for r in cone.rays]
    for n in gens:
        if not small_griffiths(pt, n):
            raise GriffithsViolated("cone generator is not transversal at the point")
    if not gens:
        return in_D(pt)
    total = zeros(fr.dim, fr.dim)
    for n in gens:
        total = matadd(total, n)
    if not is_nilpotent(total):
        raise GriffithsViolated("cone directions do not sum to a nilpotent operator")
    for y in y_samples:
        if y <= 0:
            raise PreconditionViolated("orbit heights must be positive")
        scaled = matscale(Fraction(y), total)
        turned = gmat([[Gi(0, x) for x in row] for row in scaled])
        if not in_D(pt.apply(gexp_nilpotent(turned))):
            return False
    return True
