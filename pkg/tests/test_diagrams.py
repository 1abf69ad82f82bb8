import itertools

import oracles as O
import pytest

from permutex import diagfile, diagrams, fixtures, search
from permutex.diagrams import (
    CubeDiagram,
    DiagramError,
    Fork,
    Mor,
    SetBackend,
    SquareDiagram,
    StructuralError,
    build_cuboid,
    build_split_cuboid,
    check_cuboid,
    cube_comparison,
    degenerate_cube,
    is_exact_fork,
    is_regular_pushout,
    make_cube,
    pair_into,
    pullback,
    regular_pushout_relational,
    tabulate,
)
from permutex.relcore import Carrier, PreconditionError, FunctionArrow, Relation, image_along, kernel_pair

SB = SetBackend()


def m(src, dst, table):
    return Mor(Carrier(src), Carrier(dst), FunctionArrow(Carrier(src), Carrier(dst), tuple(table)))


def counterexample():
    return SquareDiagram(c=m(3, 2, [0, 0, 1]), g=m(3, 2, [0, 1, 1]), d=m(2, 1, [0, 0]),
                         f=m(2, 1, [0, 0]), s=m(1, 2, [0]), t=m(2, 3, [0, 1]))


# ----------------------------------------------------------------- pullbacks

def test_pullback_along_identity():
    f = m(3, 2, [1, 0, 1])
    P, p_d, p_a = pullback(SB, f, SB.identity(Carrier(2)))
    assert P.size == 3
    assert sorted(p_a.table) == [0, 1, 2]
    assert p_d.table == tuple(f.table[a] for a in p_a.table)


def test_empty_pullback_rejected_for_sets():
    with pytest.raises(PreconditionError):
        pullback(SB, m(1, 2, [0]), m(1, 2, [1]))


def test_pullback_of_constants_is_product():
    P, p_d, p_a = pullback(SB, m(2, 1, [0, 0]), m(2, 1, [0, 0]))
    assert P.size == 4
    assert list(zip(p_d.table, p_a.table)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_pullback_codomain_mismatch():
    with pytest.raises(Exception):
        pullback(SB, m(2, 1, [0, 0]), m(2, 2, [0, 1]))


def test_pullback_universal_property_small():
    """Every commuting cone from a set of size <= 3 factors uniquely."""
    for B, D, A in itertools.product((1, 2), (1, 2, 3), (1, 2, 3)):
        for dt in O.maps(D, B):
            for ft in O.maps(A, B):
                if not set(dt) & set(ft):
                    continue
                d, f = m(D, B, dt), m(A, B, ft)
                P, p_d, p_a = pullback(SB, f, d)
                for X in (1, 2, 3):
                    for xt in O.maps(X, D):
                        for yt in O.maps(X, A):
                            commutes = all(dt[xt[i]] == ft[yt[i]] for i in range(X))
                            u = pair_into((p_d, p_a), m(X, D, xt), m(X, A, yt))
                            assert (u is not None) == commutes
                            if u is not None:
                                assert u.then(p_d).table == xt and u.then(p_a).table == yt
                                solutions = [
                                    z for z in O.maps(X, P.size)
                                    if all(p_d.table[z[i]] == xt[i] and p_a.table[z[i]] == yt[i] for i in range(X))
                                ]
                                assert solutions == [u.table]


# --------------------------------------------------------- tabulations, forks

def test_tabulate_examples():
    t = tabulate(Relation.identity(Carrier(2)))
    assert t.carrier.size == 2 and t.p1.table == t.p2.table == (0, 1)
    assert tabulate(Relation.full(Carrier(2))).carrier.size == 4
    t = tabulate(kernel_pair(FunctionArrow.of([0, 1, 1], 2)))
    assert t.p1.table == (0, 1, 1, 2, 2) and t.p2.table == (0, 1, 2, 1, 2)


def test_exact_fork_examples():
    f = m(3, 2, [0, 1, 1])
    t = tabulate(kernel_pair(f.fn))
    R = t.carrier.size
    assert is_exact_fork(SB, Fork(m(R, 3, t.p1.table), m(R, 3, t.p2.table), f))
    diag = Fork(m(3, 3, [0, 1, 2]), m(3, 3, [0, 1, 2]), f)
    assert not is_exact_fork(SB, diag)
    not_onto = m(3, 3, [0, 1, 1])
    t2 = tabulate(kernel_pair(not_onto.fn))
    assert not is_exact_fork(SB, Fork(m(t2.carrier.size, 3, t2.p1.table), m(t2.carrier.size, 3, t2.p2.table), not_onto))


def test_fork_rejects_non_coequalised():
    with pytest.raises(DiagramError):
        Fork(m(1, 2, [0]), m(1, 2, [1]), m(2, 2, [0, 1]))


# ------------------------------------------------------------------- squares

def test_counterexample_square():
    sq = counterexample()
    assert not is_regular_pushout(SB, sq)
    assert not regular_pushout_relational(SB, sq)
    assert not O.regular_pushout((0, 0, 1), (0, 1, 1), (0, 0), (0, 0))


def test_square_validation():
    with pytest.raises(DiagramError):  # f.s != 1
        SquareDiagram(c=m(2, 2, [0, 1]), g=m(2, 2, [0, 1]), d=m(2, 2, [0, 1]),
                      f=m(2, 2, [0, 1]), s=m(2, 2, [1, 0]), t=m(2, 2, [0, 1]))
    with pytest.raises(DiagramError):  # c not surjective
        SquareDiagram(c=m(2, 2, [0, 0]), g=m(2, 1, [0, 0]), d=m(1, 1, [0]),
                      f=m(2, 1, [0, 0]), s=m(1, 2, [0]), t=m(1, 2, [0]))


def test_pullback_square_is_regular_pushout():
    _, sq = diagfile.load(fixtures.diagram_path("pullback_square"))
    assert is_regular_pushout(SB, sq) and regular_pushout_relational(SB, sq)


def test_set_squares_checks_agree_and_image_of_kernel():
    for sq in search.enumerate_squares(SB, search.SearchBounds(max_carrier=3)):
        assert is_regular_pushout(SB, sq) == regular_pushout_relational(SB, sq)
        assert is_regular_pushout(SB, sq) == O.regular_pushout(sq.c.table, sq.g.table, sq.d.table, sq.f.table)
        assert image_along(kernel_pair(sq.c.fn), sq.g.fn) == kernel_pair(sq.d.fn)


def test_group_squares_regular_and_image_of_kernel(group_backend):
    for sq in search.enumerate_squares(group_backend, search.SearchBounds(max_carrier=6)):
        assert is_regular_pushout(group_backend, sq)
        assert regular_pushout_relational(group_backend, sq)
        assert image_along(kernel_pair(sq.c.fn), sq.g.fn) == kernel_pair(sq.d.fn)


def test_algebra_backend_rejects_non_hom(group_backend):
    z4 = fixtures.algebra("z4")
    bad = Mor(z4, z4, FunctionArrow(z4.carrier, z4.carrier, (0, 0, 1, 1)))
    assert not group_backend.is_morphism(bad)
    with pytest.raises(DiagramError):
        diagrams.validate(group_backend, bad)


# --------------------------------------------------------------------- cubes

def test_degenerate_cube_matches_square():
    for sq in itertools.islice(search.enumerate_squares(SB, search.SearchBounds(max_carrier=3)), 0, None, 7):
        _, epi = cube_comparison(SB, degenerate_cube(SB, sq))
        assert epi == is_regular_pushout(SB, sq)


def test_counterexample_cube_not_epi():
    _, epi = cube_comparison(SB, degenerate_cube(SB, counterexample()))
    assert not epi


def test_cube_v_formula():
    sq = counterexample()
    cube = make_cube(SB, sq, m(3, 2, [0, 1, 1]), m(3, 2, [1, 0, 0]), m(2, 1, [0, 0]))
    v, epi = cube_comparison(SB, cube)
    for e in range(v.fn.src.size):
        x, z = cube.k(e), cube.gamma(e)
        assert (cube.h(v(e)), cube.alpha(v(e))) == (cube.w(x), sq.c(z))
    assert epi == O.cube_epi(sq.c.table, sq.g.table, sq.f.table, (0, 1, 1), (1, 0, 0), (0, 0))


def test_cube_rejects_non_commuting_back():
    one = m(2, 2, [0, 1])
    sq = SquareDiagram(c=one, g=one, d=one, f=one, s=one, t=one)
    with pytest.raises(DiagramError):
        make_cube(SB, sq, one, one, m(2, 2, [1, 0]))
    with pytest.raises(Exception):
        make_cube(SB, counterexample(), m(2, 1, [0, 0]), m(2, 2, [0, 1]), m(1, 2, [0]))


def test_set_cubes_match_oracle():
    cases = list(itertools.islice(search.enumerate_cubes(SB, search.SearchBounds(max_carrier=2)), 2000))
    assert cases
    for cube in cases:
        sq = cube.front
        _, epi = cube_comparison(SB, cube)
        assert epi == O.cube_epi(sq.c.table, sq.g.table, sq.f.table, cube.w.table, cube.delta.table, cube.beta.table)


# ------------------------------------------------------------------- cuboids

def test_point_cuboid_conforms():
    sq = SquareDiagram(c=m(1, 1, [0]), g=m(1, 1, [0]), d=m(1, 1, [0]), f=m(1, 1, [0]), s=m(1, 1, [0]), t=m(1, 1, [0]))
    rep = check_cuboid(SB, build_split_cuboid(SB, degenerate_cube(SB, sq)))
    assert rep.verdict == "conforms" and rep.lower_exact and rep.upper_exact


def test_counterexample_cuboid():
    rep = check_cuboid(SB, build_split_cuboid(SB, degenerate_cube(SB, counterexample())))
    assert rep.lower_exact and not rep.upper_exact and not rep.v_surjective
    assert rep.verdict == "violates"


def test_group_fixture_cuboid():
    b, cub = diagfile.load(fixtures.diagram_path("group_cuboid"))
    rep = check_cuboid(b, cub)
    assert rep.lower_exact and rep.upper_exact


def test_degenerate_cuboid_upper_equals_regular_pushout():
    for sq in itertools.islice(search.enumerate_squares(SB, search.SearchBounds(max_carrier=3)), 0, None, 5):
        rep = check_cuboid(SB, build_split_cuboid(SB, degenerate_cube(SB, sq)))
        assert rep.lower_exact
        assert rep.upper_exact == is_regular_pushout(SB, sq)


def test_regular_variant_has_no_sections():
    b, cube = diagfile.load(fixtures.diagram_path("group_cube"))
    cub = build_cuboid(b, cube.front.morphisms(), cube.w, cube.delta, cube.beta, split=False)
    assert not cub.split
    assert check_cuboid(b, cub).verdict == "conforms"


def test_partial_sections_rejected():
    cub = build_split_cuboid(SB, degenerate_cube(SB, counterexample()))
    fields = cub.morphisms()
    fields["t"] = None
    with pytest.raises(DiagramError):
        diagrams.CuboidDiagram(**fields)


def test_structural_error_when_middle_row_not_exact(monkeypatch):
    b, cube = diagfile.load(fixtures.diagram_path("group_cube"))
    original = diagrams.kernel_pair_object

    def diagonal_for_w(backend, mor):
        if mor is cube.w:
            return mor.src, backend.identity(mor.src), backend.identity(mor.src)
        return original(backend, mor)

    monkeypatch.setattr(diagrams, "kernel_pair_object", diagonal_for_w)
    cub = build_split_cuboid(b, cube)
    with pytest.raises(StructuralError) as info:
        check_cuboid(b, cub)
    assert info.value.report is not None and not info.value.report.middle_rows_exact


def test_cuboid_objects_order():
    cub = build_split_cuboid(SB, degenerate_cube(SB, counterexample()))
    assert list(cub.objects()) == ["S", "D", "B", "R_c", "C", "A", "R_w", "W", "Y", "T", "V", "X"]
    assert isinstance(degenerate_cube(SB, counterexample()), CubeDiagram)
