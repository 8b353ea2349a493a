"""Weight frames with a rank one top piece, and relative monodromy
filtrations of nilpotent operators preserving them.

A Frame packages a pure negative weight inner piece (nondegenerate
pairing of the right symmetry, unipotent integral automorphism) sitting
under a rank one weight zero quotient.  The ambient space is
H = inner + Q e, with e the final coordinate.  The operators of
interest restrict to infinitesimal isometries of the inner pairing,
send e into the inner piece, and induce zero on the quotient.

Conventions that everything downstream relies on:
  * increasing filtrations, stored by their jumps;
  * weight filtrations of a nilpotent operator are centered where the
    caller says (the closed kernel/image formula is computed centered
    at zero and shifted);
  * the relative filtration of an operator N is either a Filtration or
    None, never an exception, because nonexistence is an answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import (
    InvariantViolation,
    MixedAmbient,
    MissingHodgeData,
    NotInG,
    NotInGroup,
    NotNilpotent,
    PreconditionViolated,
    SpecFormatError,
)
from .qlinalg import (
    Mat,
    Subspace,
    Vec,
    ZLattice,
    det,
    identity,
    inverse,
    is_nilpotent,
    is_zero_mat,
    is_zero_vec,
    log_unipotent,
    mat,
    mat_from_json,
    mat_to_json,
    matmul,
    matpow,
    matscale,
    matvec,
    nilpotency_index,
    solve,
    transpose,
    vadd,
    vec,
    vscale,
    zero_vec,
    zeros,
)

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# filtrations


@dataclass(frozen=True)
class Filtration:
    """Increasing filtration of Q^n, canonical jump representation.

    jumps is a tuple of (index, Subspace) pairs with strictly increasing
    indices and strictly growing subspaces; below the first jump the
    filtration is zero, at and above an index it is the attached space.
    """

    ambient: int
    jumps: tuple

    @classmethod
    def from_spaces(cls, spaces: dict, ambient: int) -> "Filtration":
        items = sorted(spaces.items())
        prev = Subspace.zero(ambient)
        jumps = []
        for j, s in items:
            if s.ambient != ambient:
                raise MixedAmbient("filtration: ambient mismatch")
            if not s.contains_space(prev):
                raise InvariantViolation("filtration is not increasing")
            if s != prev:
                jumps.append((j, s))
                prev = s
        return cls(ambient, tuple(jumps))

    def at(self, j: int) -> Subspace:
        out = Subspace.zero(self.ambient)
        for idx, s in self.jumps:
            if idx <= j:
                out = s
            else:
                break
        return out

    def shift(self, m: int) -> "Filtration":
        """Shifted filtration, value at j equals the old value at j + m."""
        return Filtration(self.ambient, tuple((j - m, s) for j, s in self.jumps))

    @property
    def jump_indices(self) -> tuple:
        return tuple(j for j, _ in self.jumps)

    def graded_dim(self, j: int) -> int:
        return self.at(j).dim - self.at(j - 1).dim

    def is_exhaustive(self) -> bool:
        return bool(self.jumps) and self.jumps[-1][1].dim == self.ambient

    def graded_dims(self) -> dict:
        return {j: self.graded_dim(j) for j in self.jump_indices}


def reduce_projector(space: Subspace) -> Mat:
    """Matrix of v -> space.reduce(v), a projection killing the space."""
    n = space.ambient
    cols = [space.reduce(tuple(ONE if i == j else ZERO for i in range(n))) for j in range(n)]
    return transpose(tuple(cols))


def preimage_subspace(op: Mat, space: Subspace) -> Subspace:
    """{v : op . v in space}."""
    return Subspace.kernel(matmul(reduce_projector(space), op))


def weight_filtration(n_mat: Mat, center: int = 0) -> Filtration:
    """Monodromy weight filtration of a nilpotent operator.

    Uses the closed formula, centered at zero:
        W_k = sum over j >= max(0, -k) of Ker(N^(k+j+1)) meet Im(N^j)
    then shifts so the filtration is centered at `center`.
    """
    d = nilpotency_index(n_mat)
    amb = len(n_mat)
    powers = [identity(amb)]
    for _ in range(d):
        powers.append(matmul(n_mat, powers[-1]))
    kers = [Subspace.kernel(p) for p in powers]
    ims = [Subspace.image(p) for p in powers]

    def level(k):
        out = Subspace.zero(amb)
        for j in range(max(0, -k), d):
            i = min(k + j + 1, d)
            if i <= 0:
                continue
            out = out.add(kers[i].intersect(ims[j]))
        return out

    spaces = {k: level(k) for k in range(-d, d)}
    spaces[d] = Subspace.full(amb)
    return Filtration.from_spaces(spaces, amb).shift(-center)


def _graded_chart(lower: Subspace, upper: Subspace):
    """Complement basis of lower inside upper plus a coordinate map."""
    amb = upper.ambient
    comp = []
    cur = lower
    for row in upper.basis:
        if not cur.contains(row):
            comp.append(row)
            cur = cur.add(Subspace.span([row], amb))
    full = lower.basis + tuple(comp)
    solve_mat = transpose(full) if full else ()

    def coords(v):
        if not comp:
            return ()
        x = solve(solve_mat, vec(v))
        if x is None:
            raise PreconditionViolated("vector outside the graded chart")
        return x[len(lower.basis):]

    return tuple(comp), coords


def induced_graded_operator(op: Mat, lower: Subspace, upper: Subspace) -> Mat:
    """Matrix of op on upper/lower.  Requires op(upper) <= upper and
    op(lower) <= lower."""
    comp, coords = _graded_chart(lower, upper)
    cols = [coords(matvec(op, c)) for c in comp]
    return transpose(tuple(cols)) if comp else ()


def is_weight_filtration(n_mat: Mat, filt: Filtration, center: int) -> bool:
    """Direct axiom check, independent of the construction above."""
    amb = len(n_mat)
    if filt.ambient != amb or not filt.is_exhaustive():
        return False
    lo = filt.jump_indices[0]
    hi = filt.jump_indices[-1]
    for j in range(lo - 1, hi + 1):
        fj = filt.at(j)
        if not filt.at(j - 2).contains_space(Subspace.span([matvec(n_mat, v) for v in fj.basis], amb)):
            return False
    span_l = max(hi - center, center - lo) + 1
    for l in range(1, span_l + 1):
        if filt.graded_dim(center + l) != filt.graded_dim(center - l):
            return False
        # induced map on graded pieces must be injective
        nl = matpow(n_mat, l)
        pre = preimage_subspace(nl, filt.at(center - l - 1))
        if not filt.at(center + l - 1).contains_space(filt.at(center + l).intersect(pre)):
            return False
    return True


def is_relative_weight_filtration(n_mat: Mat, base: Filtration, cand: Filtration) -> bool:
    """Axioms for a monodromy filtration of n_mat relative to base:
    n shifts cand by -2, and on every graded piece of base the induced
    filtration is the weight filtration of the induced operator,
    centered at the piece's index."""
    amb = len(n_mat)
    if base.ambient != amb or cand.ambient != amb:
        raise MixedAmbient("relative filtration check: ambient mismatch")
    if not cand.is_exhaustive():
        return False
    for j, s in base.jumps:
        img = Subspace.span([matvec(n_mat, v) for v in s.basis], amb)
        if not s.contains_space(img):
            return False
    lo = cand.jump_indices[0]
    hi = cand.jump_indices[-1]
    for j in range(lo, hi + 1):
        img = Subspace.span([matvec(n_mat, v) for v in cand.at(j).basis], amb)
        if not cand.at(j - 2).contains_space(img):
            return False
    for w in base.jump_indices:
        lower, upper = base.at(w - 1), base.at(w)
        if lower.dim == upper.dim:
            continue
        comp, coords = _graded_chart(lower, upper)
        nbar = induced_graded_operator(n_mat, lower, upper)
        gdim = len(comp)
        spaces = {}
        for j in range(lo - 1, hi + 1):
            inter = cand.at(j).intersect(upper)
            rows = [coords(v) for v in inter.add(lower).basis]
            spaces[j] = Subspace.span(rows, gdim)
        graded = Filtration.from_spaces(spaces, gdim)
        if not is_weight_filtration(nbar, graded, w):
            return False
    return True


# ---------------------------------------------------------------------------
# frames


def _as_type_counts(data, what) -> tuple:
    try:
        items = sorted((int(p), int(q), int(m)) for (p, q), m in dict(data).items())
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"{what}: expected {{(p, q): multiplicity}}") from exc
    if any(m <= 0 for _, _, m in items):
        raise SpecFormatError(f"{what}: multiplicities must be positive")
    return tuple(items)


@dataclass(eq=False)
class Frame:
    """Ambient data every construction here is relative to.

    rank      rank of the inner piece (ambient dimension is rank + 1)
    weight    pure weight of the inner piece, negative
    gram      nondegenerate pairing on the inner piece,
              symmetric for even weight and alternating for odd
    gamma     unipotent automorphism of the inner piece, integral on
              the lattice and preserving gram
    lattice   full rank lattice in the ambient space containing e
    hodge     {(p, q): multiplicity} with p + q = weight, total = rank
    graded_types
              optional declared types of the graded pieces of the
              weight filtration of log(gamma); these are input data,
              consulted by the square-zero predicate rather than
              recomputed
    """

    rank: int
    weight: int
    gram: Mat
    gamma: Mat
    lattice: ZLattice = None
    hodge: dict = field(default_factory=dict)
    graded_types: dict = None

    def __post_init__(self):
        r = self.rank
        if r < 1:
            raise SpecFormatError("frame: inner rank must be positive")
        if self.weight >= 0:
            raise SpecFormatError("frame: inner weight must be negative")
        self.gram = mat(self.gram)
        self.gamma = mat(self.gamma)
        if len(self.gram) != r or len(self.gamma) != r:
            raise MixedAmbient("frame: gram and gamma must match the inner rank")
        sign = -ONE if self.weight % 2 else ONE
        if transpose(self.gram) != matscale(sign, self.gram):
            raise SpecFormatError("frame: gram has the wrong symmetry for the weight")
        if det(self.gram) == 0:
            raise SpecFormatError("frame: gram is degenerate")
        if self.lattice is None:
            self.lattice = ZLattice.standard(r + 1)
        if self.lattice.ambient != r + 1 or self.lattice.rank != r + 1:
            raise MixedAmbient("frame: lattice must have full rank in the ambient space")
        if not self.lattice.contains(self.e_vector):
            raise SpecFormatError("frame: lattice must contain e")
        if matmul(matmul(transpose(self.gamma), self.gram), self.gamma) != self.gram:
            raise NotInGroup("frame: gamma does not preserve the pairing")
        log_unipotent(self.gamma)  # raises NotUnipotent when it is not
        inner = self.inner_lattice
        for b in inner.basis_vectors():
            if not inner.contains(matvec(self.gamma, self._inner_part(b))
                                  + (ZERO,)):
                raise NotInGroup("frame: gamma does not preserve the inner lattice")
        self.hodge = _as_type_counts(self.hodge, "hodge numbers")
        if sum(m for _, _, m in self.hodge) != r:
            raise SpecFormatError("frame: hodge multiplicities must sum to the rank")
        if any(p + q != self.weight for p, q, _ in self.hodge):
            raise SpecFormatError("frame: hodge types must have p + q = weight")
        if self.graded_types is not None:
            self.graded_types = {
                int(w): _as_type_counts(d, "graded types") for w, d in dict(self.graded_types).items()
            }
            total = sum(m for d in self.graded_types.values() for _, _, m in d)
            if total != r:
                raise SpecFormatError("frame: graded type multiplicities must sum to the rank")

    # --- geometry of the ambient space ---

    @property
    def dim(self) -> int:
        return self.rank + 1

    @property
    def e_vector(self) -> Vec:
        return zero_vec(self.rank) + (ONE,)

    def embed_inner(self, v: Vec) -> Vec:
        v = vec(v)
        if len(v) != self.rank:
            raise MixedAmbient("embed_inner: wrong length")
        return v + (ZERO,)

    def _inner_part(self, v: Vec) -> Vec:
        return tuple(v[: self.rank])

    def inner_part(self, v: Vec) -> Vec:
        v = vec(v)
        if v[self.rank] != 0:
            raise PreconditionViolated("vector has a nonzero e component")
        return self._inner_part(v)

    @cached_property
    def inner_space(self) -> Subspace:
        return Subspace.span([self.embed_inner(row) for row in identity(self.rank)], self.dim)

    @cached_property
    def inner_lattice(self) -> ZLattice:
        return self.lattice.intersect_subspace(self.inner_space)

    @cached_property
    def log_gamma(self) -> Mat:
        """Nilpotent logarithm of gamma on the inner piece (rational)."""
        return log_unipotent(self.gamma)

    @cached_property
    def base_filtration(self) -> Filtration:
        """The two step weight filtration of the ambient space."""
        return Filtration.from_spaces(
            {self.weight: self.inner_space, 0: Subspace.full(self.dim)}, self.dim
        )

    # --- operators ---

    def assemble(self, inner_op: Mat, e_image: Vec) -> Mat:
        """Ambient operator from an inner block and the image of e."""
        inner_op = mat(inner_op)
        e_image = vec(e_image)
        if len(inner_op) != self.rank or len(e_image) != self.rank:
            raise MixedAmbient("assemble: inner data of the wrong size")
        rows = [inner_op[i] + (e_image[i],) for i in range(self.rank)]
        rows.append(zero_vec(self.dim))
        return tuple(rows)

    def pencil(self, lam, e_image: Vec) -> Mat:
        """Operator with inner block lam * log(gamma)."""
        return self.assemble(matscale(lam, self.log_gamma), e_image)

    def restriction(self, n_mat: Mat) -> Mat:
        return tuple(row[: self.rank] for row in n_mat[: self.rank])

    def e_image(self, n_mat: Mat) -> Vec:
        return tuple(n_mat[i][self.rank] for i in range(self.rank))

    def restriction_multiple(self, n_mat: Mat):
        """lam with inner block equal to lam * log(gamma), else None."""
        a = self.restriction(n_mat)
        np = self.log_gamma
        if is_zero_mat(np):
            return ZERO if is_zero_mat(a) else None
        i, j = next(
            (i, j) for i in range(self.rank) for j in range(self.rank) if np[i][j] != 0
        )
        lam = a[i][j] / np[i][j]
        return lam if a == matscale(lam, np) else None


def check_in_g(frame: Frame, n_mat: Mat) -> None:
    """Membership in the operators compatible with the frame: the inner
    block kills the pairing infinitesimally, e goes into the inner
    piece, the quotient action is zero.  Raises NotInG."""
    n_mat = mat(n_mat)
    if len(n_mat) != frame.dim or (n_mat and len(n_mat[0]) != frame.dim):
        raise MixedAmbient("operator has the wrong ambient size")
    if not is_zero_vec(n_mat[frame.rank]):
        raise NotInG("operator does not kill the weight zero quotient")
    a = frame.restriction(n_mat)
    g = frame.gram
    if not is_zero_mat(
        tuple(
            tuple(x + y for x, y in zip(r1, r2))
            for r1, r2 in zip(matmul(transpose(a), g), matmul(g, a))
        )
    ):
        raise NotInG("inner block is not an infinitesimal isometry")


def is_in_g(frame: Frame, n_mat: Mat) -> bool:
    try:
        check_in_g(frame, n_mat)
        return True
    except (NotInG, MixedAmbient):
        return False


def g_basis(frame: Frame) -> tuple:
    """Basis of the compatible operators: inner infinitesimal isometries
    extended by zero, plus one generator per coordinate for the e part."""
    r = frame.rank
    ginv = inverse(frame.gram)
    shapes = []
    if frame.weight % 2:
        for i in range(r):
            for j in range(i, r):
                s = [[ZERO] * r for _ in range(r)]
                s[i][j] = ONE
                s[j][i] = ONE
                shapes.append(mat(s))
    else:
        for i in range(r):
            for j in range(i + 1, r):
                s = [[ZERO] * r for _ in range(r)]
                s[i][j] = ONE
                s[j][i] = -ONE
                shapes.append(mat(s))
    out = [frame.assemble(matmul(ginv, s), zero_vec(r)) for s in shapes]
    for i in range(r):
        h = [ZERO] * r
        h[i] = ONE
        out.append(frame.assemble(zeros(r, r), tuple(h)))
    for b in out:
        check_in_g(frame, b)
    return tuple(out)


# ---------------------------------------------------------------------------
# the relative construction


def pq_spaces(frame: Frame, inner_op: Mat):
    """The existence space P and the torus direction space Q of an inner
    nilpotent block, and whether the two published descriptions of them
    agree (they must; the flag is carried into reports as evidence, not
    as a branch).

    P = image + level(-2) of the weight filtration centered at the frame
    weight; Q = kernel meet level(-2).
    """
    if not is_nilpotent(inner_op):
        raise NotNilpotent("inner block is not nilpotent")
    wf = weight_filtration(inner_op, center=frame.weight)
    w2 = wf.at(-2)
    img = Subspace.image(inner_op)
    ker = Subspace.kernel(inner_op)
    p = img.add(w2)
    q = ker.intersect(w2)
    if frame.weight == -1:
        # the weight -1 chapter of the theory states P and Q with the
        # level term dropped resp. replaced by the image; both must match
        agree = (p == img) and (q == ker.intersect(img))
    else:
        # below weight -1 the kernel sits entirely inside level(-2)
        agree = q == ker
    if not agree:
        raise InvariantViolation("the two descriptions of P, Q disagree")
    return p, q, agree


def relative_filtration(frame: Frame, n_mat: Mat):
    """Monodromy filtration of n_mat relative to the frame's two step
    weight filtration, or None when it does not exist.

    The inner part is forced: the weight filtration of the inner block
    centered at the frame weight.  Existence reduces to the image of e
    lying in P; when it does, a correction a with
    n(e) - inner(a) in level(-2) tilts e into every level >= 0.
    """
    check_in_g(frame, n_mat)
    a_block = frame.restriction(n_mat)
    if not is_nilpotent(a_block):
        raise NotNilpotent("operator's inner block is not nilpotent")
    h = frame.e_image(n_mat)
    wf = weight_filtration(a_block, center=frame.weight)
    w2 = wf.at(-2)
    proj = reduce_projector(w2)
    x = solve(matmul(proj, a_block), matvec(proj, h))
    if x is None:
        return None
    tilted = vadd(frame.embed_inner(vscale(-1, x)), frame.e_vector)
    line = Subspace.span([tilted], frame.dim)
    spaces = {}
    for j in sorted(set(wf.jump_indices) | {0}):
        s = Subspace.span([frame.embed_inner(v) for v in wf.at(j).basis], frame.dim)
        if j >= 0:
            s = s.add(line)
        spaces[j] = s
    return Filtration.from_spaces(spaces, frame.dim)


def relative_filtration_exists(frame: Frame, n_mat: Mat) -> bool:
    check_in_g(frame, n_mat)
    a_block = frame.restriction(n_mat)
    p, _, _ = pq_spaces(frame, a_block)
    return p.contains(frame.e_image(n_mat))


# ---------------------------------------------------------------------------
# shared JSON format


def frame_to_json(frame: Frame) -> dict:
    """Frame as the shared JSON spec format; entries are exact strings."""
    out = {
        "rank": frame.rank,
        "weight": frame.weight,
        "gram": mat_to_json(frame.gram),
        "gamma": mat_to_json(frame.gamma),
        "hodge_numbers": [[p, q, m] for p, q, m in frame.hodge],
        "lattice": mat_to_json(frame.lattice.basis_vectors()),
    }
    if frame.graded_types is not None:
        out["graded_types"] = [
            [w, p, q, m]
            for w in sorted(frame.graded_types)
            for p, q, m in frame.graded_types[w]
        ]
    return out


def frame_from_json(data) -> Frame:
    if not isinstance(data, dict):
        raise SpecFormatError("frame: expected an object")
    try:
        rank = int(data["rank"])
        weight = int(data["weight"])
        gram = mat_from_json(data["gram"])
        gamma = mat_from_json(data["gamma"])
        hodge = {(int(p), int(q)): int(m) for p, q, m in data["hodge_numbers"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"frame: missing or malformed field ({exc})") from exc
    lattice = None
    if "lattice" in data:
        lattice = ZLattice.from_vectors(mat_from_json(data["lattice"]), rank + 1)
    graded = None
    if "graded_types" in data:
        graded = {}
        try:
            for w, p, q, m in data["graded_types"]:
                graded.setdefault(int(w), {})[(int(p), int(q))] = int(m)
        except (TypeError, ValueError) as exc:
            raise SpecFormatError("frame: malformed graded type row") from exc
    return Frame(
        rank=rank, weight=weight, gram=gram, gamma=gamma,
        lattice=lattice, hodge=hodge, graded_types=graded,
    )
