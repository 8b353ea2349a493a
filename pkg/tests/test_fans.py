"""Cell fan geometry: indexing, conjugation, subdivision, comparisons."""

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from relfan.cones import Cone, check_fan
from relfan.errors import (
    NotSquareZeroPure,
    InvariantViolation,
    NotCommutative,
    NotInGroup,
    NotSharp,
    PreconditionViolated,
)
from relfan.fans import (
    CellFan,
    check_admissible,
    check_square_zero_pure,
    corrupted_window,
    cube_window,
    flatten,
    image_lattice,
    minimal_integral_exponent,
    neron_lattice,
    pencil_commutes,
    random_admissible_cone,
    random_inadmissible_operator,
    ray_window,
    relations_report,
    strong_compatibility_report,
    subdivide_against,
    unflatten,
)
from relfan.fixtures import elliptic_frame, jordan3_frame
from relfan.hodge import relative_filtration
from relfan.qlinalg import (
    exp_nilpotent,
    is_zero_mat,
    matmul,
    matscale,
    matvec,
    vadd,
    vscale,
    zero_vec,
)


@pytest.fixture(scope="module")
def ell():
    return CellFan(elliptic_frame())


@pytest.fixture(scope="module")
def jd3():
    return CellFan(jordan3_frame())


# --- oracles -----------------------------------------------------------

def brute_min_exponent(fan, n_mat, limit=64):
    """Smallest multiple whose exponential is integral, by direct search."""
    fr = fan.frame
    lam = fr.restriction_multiple(n_mat)
    basis = fr.lattice.basis_vectors()
    for a in range(1, limit + 1):
        if (a * lam).denominator != 1:
            continue
        ex = exp_nilpotent(matscale(a, n_mat))
        if all(fr.lattice.contains(matvec(ex, b)) for b in basis):
            return a
    raise AssertionError("no integral multiple found in range")


def sample_points(cone, rng, count=40):
    """Random conic combinations of the rays."""
    out = []
    for _ in range(count):
        v = zero_vec(cone.ambient)
        for r in cone.rays:
            v = vadd(v, vscale(F(rng.randrange(0, 12), rng.choice((1, 2, 3))), r))
        out.append(v)
    return out


# --- cell shape on the rank 2 frame ------------------------------------

def test_elliptic_splitting(ell):
    assert ell.cube_rank == 1
    assert ell.key_rank == 0
    assert ell.cube_basis == ((F(1), F(0)),)
    assert ell.denominator(()) == 1


def test_elliptic_origin_cell(ell):
    c = ell.cell((), (0,))
    assert c.dim == 2
    assert c.rays == (
        (F(0), F(1), F(0), F(0), F(0), F(0), F(0), F(0), F(0)),
        (F(0), F(1), F(1), F(0), F(0), F(0), F(0), F(0), F(0)),
    )
    # self, two boundary rays, origin
    assert len(c.faces()) == 4


def test_elliptic_cell_containing(ell):
    fr = ell.frame
    assert ell.cell_containing(fr.pencil(2, (F(3), F(0)))) == ((), (1,))
    assert ell.cell_containing(fr.pencil(1, (F(-1, 3), F(0)))) == ((), (-1,))
    zero = tuple(tuple(F(0) for _ in range(3)) for _ in range(3))
    assert ell.cell_containing(zero) == ((), (0,))
    # off the nonnegative pencil, or outside the existence space
    assert ell.cell_containing(fr.pencil(-1, (F(0), F(0)))) is None
    assert ell.cell_containing(fr.pencil(1, (F(0), F(1)))) is None


def test_containing_cell_actually_contains(ell):
    fr = ell.frame
    n = fr.pencil(F(3, 2), (F(7, 4), F(0)))
    idx = ell.cell_containing(n)
    assert ell.cell(*idx).contains(flatten(n))


def test_elliptic_ray_membership(ell):
    fr = ell.frame
    assert ell.is_ray_member(fr.pencil(1, (F(1), F(0))))
    assert ell.is_ray_member(fr.pencil(3, (F(-6), F(0))))
    assert not ell.is_ray_member(fr.pencil(1, (F(1, 2), F(0))))
    assert not ell.is_ray_member(fr.pencil(0, (F(0), F(0))))


# --- cells at fractional cosets on the rank 3 frame ---------------------

def test_jordan3_splitting(jd3):
    assert jd3.cube_rank == 1
    assert jd3.key_rank == 1
    assert jd3.cube_basis == ((F(1), F(0), F(0)),)
    assert jd3.section_basis == ((F(0), F(1), F(0)),)


def test_jordan3_coset_order(jd3):
    # order of e2/2 against the integral existence lattice
    assert jd3.denominator((F(1, 2),)) == 2
    assert jd3.denominator((F(0),)) == 1
    assert jd3.denominator((F(2, 3),)) == 3
    assert jd3.section((F(1, 2),)) == (F(0), F(1, 2), F(0))


def test_jordan3_halved_cube(jd3):
    fr = jd3.frame
    idx = jd3.cell_containing(fr.pencil(1, (F(1, 4), F(1, 2), F(0))))
    assert idx == ((F(1, 2),), (0,))
    cell = jd3.cell(*idx)
    # cube side is 1/2, so the next cell starts at e1/2
    assert jd3.cell_containing(fr.pencil(1, (F(1, 2), F(1, 2), F(0)))) == ((F(1, 2),), (1,))
    assert cell.contains(flatten(fr.pencil(1, (F(1, 4), F(1, 2), F(0)))))


def test_distinct_cosets_meet_at_origin_only(jd3):
    a = jd3.cell((F(0),), (0,))
    b = jd3.cell((F(1, 2),), (0,))
    assert a.intersect(b).dim == 0


# --- conjugation --------------------------------------------------------

def test_elliptic_shift_action(ell):
    # gamma fixing the inner part, moving e by the second basis vector
    assert ell.conjugate_cell(0, (0, 1), ((), (0,))) == ((), (-1,))
    assert ell.conjugate_cell(0, (0, -2), ((), (3,))) == ((), (5,))
    # inner shifts in the kernel do nothing
    assert ell.conjugate_cell(0, (1, 0), ((), (2,))) == ((), (2,))
    # pure gamma powers fix every index here
    assert ell.conjugate_cell(2, (0, 0), ((), (-1,))) == ((), (-1,))


def test_jordan3_shift_action(jd3):
    # N(e3) = 2 e2 moves the coset key
    assert jd3.conjugate_cell(0, (0, 0, 1), ((F(0),), (0,))) == ((F(-2),), (0,))
    assert jd3.conjugate_cell(1, (0, 0, 0), ((F(0),), (0,))) == ((F(0),), (0,))
    # e2 shifts slide the cube grid
    assert jd3.conjugate_cell(0, (0, 1, 0), ((F(0),), (0,))) == ((F(0),), (-2,))


def test_conjugation_matches_pointwise_transport(ell, jd3):
    """Independent route: transport an interior representative and ask
    which cell it lands in."""
    rng = random.Random(5)
    for fan in (ell, jd3):
        fr = fan.frame
        r = fr.rank
        for _ in range(15):
            power = rng.randrange(-2, 3)
            shift = tuple(rng.randrange(-2, 3) for _ in range(r))
            key = (F(rng.randrange(-2, 3), rng.choice((1, 2))),) * fan.key_rank
            n = (rng.randrange(-2, 3),) * fan.cube_rank
            got = fan.conjugate_cell(power, shift, (key, n))
            rep = fan.cell(key, n).interior_point()
            moved = fan.conjugate(power, shift, unflatten(rep, fr.dim))
            assert fan.cell_containing(moved) == got


def test_shift_action_composes(ell):
    one = ell.conjugate_cell(0, (0, 1), ((), (4,)))
    two = ell.conjugate_cell(0, (0, 2), ((), (4,)))
    assert ell.conjugate_cell(0, (0, 1), one) == two


def test_gamma_element_validation(ell):
    with pytest.raises(NotInGroup):
        ell.gamma_matrix(1, (F(1, 2), F(0)))
    with pytest.raises(NotInGroup):
        ell.gamma_matrix(0, (1, 2, 3))


def test_conjugate_matrix_shape(ell):
    g = ell.gamma_matrix(1, (0, 1))
    assert g == ((F(1), F(1), F(0)), (F(0), F(1), F(1)), (F(0), F(0), F(1)))


# --- admissibility ------------------------------------------------------

def test_admissible_segment(ell):
    fr = ell.frame
    mats = [fr.pencil(1, (F(0), F(0))), fr.pencil(1, (F(5, 2), F(0)))]
    ok, witness = check_admissible(ell, mats)
    assert ok and witness is None


def test_inadmissible_generator_detected(ell):
    fr = ell.frame
    ok, witness = check_admissible(ell, [fr.pencil(1, (F(0), F(1)))])
    assert not ok
    assert "existence" in witness["reason"]


def test_noncommuting_pair_raises(jd3):
    fr = jd3.frame
    with pytest.raises(NotCommutative):
        check_admissible(jd3, [fr.pencil(1, (F(0),) * 3), fr.pencil(1, (F(0), F(0), F(1)))])


def test_opposite_rays_not_sharp(ell):
    fr = ell.frame
    m = fr.pencil(1, (F(1), F(0)))
    neg = tuple(tuple(-x for x in row) for row in m)
    with pytest.raises(NotSharp):
        check_admissible(ell, [m, neg])


def test_zero_restriction_ray_depends_on_weight(ell, jd3):
    # weight -1: nothing with zero inner block and nonzero e image fits
    ok, _ = check_admissible(ell, [ell.frame.pencil(0, (F(1), F(0)))])
    assert not ok
    # weight -2: the filtration exists, but no cell reaches the ray
    ok, _ = check_admissible(jd3, [jd3.frame.pencil(0, (F(1), F(0), F(0)))])
    assert ok
    assert subdivide_against(jd3, [jd3.frame.pencil(0, (F(1), F(0), F(0)))]) is None


def test_commutation_criterion_matches_products(ell, jd3):
    rng = random.Random(11)
    checked_true = checked_false = 0
    for fan in (ell, jd3):
        fr = fan.frame
        for _ in range(60):
            h1 = tuple(F(rng.randrange(-3, 4), rng.choice((1, 2))) for _ in range(fr.rank))
            h2 = tuple(F(rng.randrange(-3, 4), rng.choice((1, 2))) for _ in range(fr.rank))
            a = fr.pencil(F(rng.randrange(0, 4)), h1)
            b = fr.pencil(F(rng.randrange(0, 4)), h2)
            fast = pencil_commutes(fan, a, b)
            slow = matmul(a, b) == matmul(b, a)
            assert fast == slow
            checked_true += slow
            checked_false += not slow
    assert checked_true and checked_false


# --- subdivision --------------------------------------------------------

def test_elliptic_segment_subdivision(ell):
    fr = ell.frame
    mats = [fr.pencil(1, (F(0), F(0))), fr.pencil(1, (F(5, 2), F(0)))]
    pieces = subdivide_against(ell, mats)
    assert [idx for idx, _ in pieces] == [((), (0,)), ((), (1,)), ((), (2,))]
    cone = Cone.from_generators([flatten(m) for m in mats], ell.ambient)
    for idx, piece in pieces:
        assert piece.dim == cone.dim
        assert cone.contains_cone(piece)
        assert ell.cell(*idx).contains_cone(piece)
    # the last piece stops at the segment end, not the cell end
    assert pieces[2][1].rays[-1] == (F(0), F(2), F(5), F(0), F(0), F(0), F(0), F(0), F(0))


def test_subdivision_inside_one_cell_is_trivial(ell):
    fr = ell.frame
    mats = [fr.pencil(1, (F(1, 3), F(0))), fr.pencil(1, (F(2, 3), F(0)))]
    pieces = subdivide_against(ell, mats)
    assert len(pieces) == 1
    assert pieces[0][0] == ((), (0,))


def test_zero_cone_subdivision(ell):
    zero = tuple(tuple(F(0) for _ in range(3)) for _ in range(3))
    pieces = subdivide_against(ell, [zero])
    assert len(pieces) == 1
    assert pieces[0][1].dim == 0


def test_subdivision_rejects_inadmissible(ell):
    with pytest.raises(PreconditionViolated):
        subdivide_against(ell, [ell.frame.pencil(1, (F(0), F(1)))])


def test_subdivision_covers_sampled_points(ell, jd3):
    """Oracle: pieces must jointly absorb random points of the cone."""
    rng = random.Random(23)
    for fan in (ell, jd3):
        for _ in range(25):
            mats = random_admissible_cone(fan, rng)
            pieces = subdivide_against(fan, mats)
            assert pieces is not None
            cone = Cone.from_generators([flatten(m) for m in mats], fan.ambient)
            for pt in sample_points(cone, rng, count=12):
                assert any(piece.contains(pt) for _, piece in pieces)


def test_subdivision_pieces_respect_hosts(jd3):
    rng = random.Random(31)
    for _ in range(25):
        mats = random_admissible_cone(jd3, rng)
        pieces = subdivide_against(jd3, mats)
        for idx, piece in pieces:
            assert jd3.cell(*idx).contains_cone(piece)


def test_corpus_inadmissible_operators(ell, jd3):
    rng = random.Random(47)
    for fan in (ell, jd3):
        for _ in range(20):
            op = random_inadmissible_operator(fan, rng)
            ok, _ = check_admissible(fan, [op])
            assert not ok
            assert relative_filtration(fan.frame, op) is None


# --- windows and deliberate corruption ----------------------------------

def test_elliptic_window_is_a_fan(ell):
    w = ell.window(1)
    assert len(w) == 8  # three cells, four rays, origin
    assert check_fan(w) == []


def test_jordan3_window_is_a_fan(jd3):
    w = jd3.window(1)
    assert len(w) == 8
    assert check_fan(w) == []


def test_drop_faces_corruption_detected(ell):
    bad = corrupted_window(ell, 1, "drop-faces")
    violations = check_fan(bad)
    assert violations
    assert all(v["kind"] == "missing-face" for v in violations)


def test_half_cell_corruption_detected(jd3):
    bad = corrupted_window(jd3, 1, "half-cell")
    assert check_fan(bad)
    gammas = [(0, (0, 1, 0))]
    report = strong_compatibility_report(jd3, bad, gammas)
    failing = [c for c in report if not c["ok"]]
    assert failing
    assert failing[0]["name"] == "cell-is-indexed-cell"


def test_honest_window_strong_compatibility(ell):
    gammas = [(1, (0, 0)), (-1, (0, 0)), (0, (1, 0)), (0, (0, 1)), (2, (1, -1))]
    report = strong_compatibility_report(ell, ell.window(1), gammas)
    assert report
    assert all(c["ok"] for c in report)
    names = {c["name"] for c in report}
    assert "ray-integral-exponential" in names
    assert "cell-conjugation-stable" in names


def test_unknown_corruption_mode(ell):
    with pytest.raises(PreconditionViolated):
        corrupted_window(ell, 1, "mangle")


# --- integral exponentials ----------------------------------------------

def test_minimal_exponent_against_brute_force(ell, jd3):
    cases = [
        (ell, ell.frame.pencil(1, (F(0), F(0)))),
        (ell, ell.frame.pencil(1, (F(1), F(0)))),
        (ell, ell.frame.pencil(1, (F(1, 2), F(0)))),
        (ell, ell.frame.pencil(F(1, 3), (F(1), F(0)))),
        (jd3, jd3.frame.pencil(1, (F(0), F(0), F(0)))),
        (jd3, jd3.frame.pencil(1, (F(0), F(1, 2), F(0)))),
        (jd3, jd3.frame.pencil(F(1, 2), (F(1), F(0), F(0)))),
    ]
    for fan, m in cases:
        assert minimal_integral_exponent(fan, m) == brute_min_exponent(fan, m)


def test_minimal_exponent_frozen_values(ell):
    assert minimal_integral_exponent(ell, ell.frame.pencil(1, (F(1), F(0)))) == 1
    assert minimal_integral_exponent(ell, ell.frame.pencil(1, (F(1, 2), F(0)))) == 2


# --- comparison fans ----------------------------------------------------

def test_elliptic_gate_holds(ell):
    gate = check_square_zero_pure(ell.frame)
    assert gate["holds"]
    assert gate == {
        "square_zero": True,
        "weight_zero_pure": True,
        "declared_dims_match": True,
        "holds": True,
    }


def test_jordan3_gate_fails_on_square(jd3):
    gate = check_square_zero_pure(jd3.frame)
    assert not gate["holds"]
    assert not gate["square_zero"]
    assert gate["weight_zero_pure"]
    assert gate["declared_dims_match"]


def test_cube_window_gated(jd3):
    with pytest.raises(NotSquareZeroPure):
        cube_window(jd3, 1)


def test_elliptic_cube_window_matches_cells(ell):
    cubes = [c for c in cube_window(ell, 1) if c.dim == 2]
    cells = [ell.cell((), (n,)) for n in (-1, 0, 1)]
    assert sorted(cubes, key=lambda c: c.rays) == sorted(cells, key=lambda c: c.rays)


def test_elliptic_lattice_coincidences(ell):
    img = image_lattice(ell)
    ner = neron_lattice(ell)
    assert img.basis_vectors() == ((F(1), F(0)),)
    assert img == ner == ell.q_lattice


def test_jordan3_lattice_separation(jd3):
    # square nonzero: the image lattice leaves the torus directions
    img = image_lattice(jd3)
    assert img.basis_vectors() == ((F(2), F(0), F(0)), (F(0), F(2), F(0)))
    ner = neron_lattice(jd3)
    assert ner.basis_vectors() == ((F(1), F(0), F(0)), (F(0), F(1), F(0)))
    assert jd3.q_lattice != ner


def test_ray_window_contents(ell):
    w = ray_window(ell, image_lattice(ell), 2)
    assert len(w) == 6  # origin cone plus rays over the five translates
    dims = sorted(c.dim for c in w)
    assert dims[0] == 0 and set(dims[1:]) == {1}


def test_elliptic_relations_all_pass(ell):
    report = relations_report(ell, 1)
    assert all(c["ok"] for c in report)
    names = [c["name"] for c in report]
    assert names == [
        "pq-definitions-agree",
        "square-zero-pure-type",
        "existence-space-equals-torus-space",
        "image-rays-are-torus-rays",
        "cube-cells-align-with-cell-fan",
        "neron-rays-in-cell-fan",
        "torus-lattice-equals-neron-lattice",
    ]


def test_jordan3_relations_report_data(jd3):
    # off the predicate, only the unconditional checks stay live
    report = {c["name"]: c for c in relations_report(jd3, 1)}
    assert report["pq-definitions-agree"]["ok"]
    assert not report["square-zero-pure-type"]["ok"]
    assert report["existence-space-equals-torus-space"]["ok"] is None
    assert report["image-rays-are-torus-rays"]["ok"] is None
    assert report["cube-cells-align-with-cell-fan"]["ok"] is None
    assert report["neron-rays-in-cell-fan"]["ok"]
    assert report["torus-lattice-equals-neron-lattice"]["ok"] is None


# --- random pencil properties -------------------------------------------

@given(
    lam=st.fractions(min_value=F(1, 4), max_value=4, max_denominator=4),
    num=st.integers(min_value=-8, max_value=8),
    den=st.sampled_from((1, 2, 3, 4)),
)
def test_pencil_points_always_land_in_their_cell(lam, num, den):
    fan = CellFan(elliptic_frame())
    n = fan.frame.pencil(lam, (lam * F(num, den), F(0)))
    idx = fan.cell_containing(n)
    assert idx is not None
    assert fan.cell(*idx).contains(flatten(n))


@given(
    key=st.fractions(min_value=-2, max_value=2, max_denominator=3),
    n=st.integers(min_value=-3, max_value=3),
)
def test_jordan3_cell_round_trip(key, n):
    fan = CellFan(jordan3_frame())
    cell = fan.cell((key,), (n,))
    rep = cell.interior_point()
    back = fan.cell_containing(unflatten(rep, fan.frame.dim))
    assert back == ((key,), (n,))
