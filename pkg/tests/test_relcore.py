import itertools

import oracles as O
import pytest
from hypothesis import given
from hypothesis import strategies as st

from permutex.relcore import (
    Carrier,
    DimensionError,
    FunctionArrow,
    PreconditionError,
    Relation,
    compose,
    compose_all,
    epi_mono_factor,
    eq_props,
    graph,
    image_along,
    kernel_pair,
    opposite,
    relation_from_function_pair,
)


@st.composite
def relations(draw, n=None, m=None):
    n = n or draw(st.integers(1, 6))
    m = m or draw(st.integers(1, 6))
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, m - 1))))
    return Relation.from_pairs(Carrier(n), Carrier(m), pairs)


@st.composite
def functions(draw, n=None, m=None):
    n = n or draw(st.integers(1, 6))
    m = m or draw(st.integers(1, 6))
    return FunctionArrow(Carrier(n), Carrier(m), tuple(draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n))))


def test_carrier_rejects_empty():
    with pytest.raises(PreconditionError):
        Carrier(0)


def test_relation_constructors_agree():
    r = Relation.from_pairs(Carrier(2), Carrier(3), [(0, 2), (1, 0)])
    assert Relation.from_matrix(r.matrix()) == r
    assert r.pairs() == [(0, 2), (1, 0)]
    assert (0, 2) in r and (0, 0) not in r
    assert Relation.empty(Carrier(2), Carrier(3)) <= r <= Relation.full(Carrier(2), Carrier(3))


def test_out_of_range_pair_rejected():
    with pytest.raises(DimensionError):
        Relation.from_pairs(Carrier(2), Carrier(2), [(0, 2)])


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        compose(Relation.identity(Carrier(2)), Relation.identity(Carrier(3)))


def test_kernel_pair_example():
    f = FunctionArrow.of([0, 1, 1], 2)
    assert sorted(kernel_pair(f).pairs()) == [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)]


def test_image_along_requires_surjection():
    f = FunctionArrow.of([0, 0], 2)
    with pytest.raises(PreconditionError):
        image_along(Relation.identity(Carrier(2)), f)


def test_eq_props_of_kernel():
    props = eq_props(kernel_pair(FunctionArrow.of([0, 1, 0, 2], 3)))
    assert props.equivalence


def test_epi_mono_factor_first_occurrence():
    e, m = epi_mono_factor(FunctionArrow.of([3, 1, 3, 0], 4))
    assert e.table == (0, 1, 0, 2)
    assert m.table == (3, 1, 0)
    assert e.then(m).table == (3, 1, 3, 0)


@given(relations(), st.data())
def test_compose_matches_oracle(r, data):
    s = data.draw(relations(n=r.dst.size))
    assert set(compose(r, s).pairs()) == O.then(set(r.pairs()), set(s.pairs()))


@given(relations(), st.data())
def test_compose_associative(r, data):
    s = data.draw(relations(n=r.dst.size))
    t = data.draw(relations(n=s.dst.size))
    assert compose(compose(r, s), t) == compose(r, compose(s, t))


@given(relations(), st.data())
def test_opposite_reverses_composition(r, data):
    s = data.draw(relations(n=r.dst.size))
    assert opposite(compose(r, s)) == compose(opposite(s), opposite(r))
    assert opposite(opposite(r)) == r


@given(relations())
def test_identity_is_neutral(r):
    assert compose(Relation.identity(r.src), r) == r == compose(r, Relation.identity(r.dst))


@given(relations(), st.data())
def test_union_intersection(r, data):
    s = data.draw(relations(n=r.src.size, m=r.dst.size))
    assert set((r | s).pairs()) == set(r.pairs()) | set(s.pairs())
    assert set((r & s).pairs()) == set(r.pairs()) & set(s.pairs())
    assert (r & s) <= r <= (r | s)


@given(functions())
def test_kernel_pair_is_f_op_f(f):
    gf = graph(f)
    assert kernel_pair(f) == compose(gf, opposite(gf))
    assert set(kernel_pair(f).pairs()) == O.kernel(f.table)


@given(functions(), st.data())
def test_function_composition_is_relational(f, data):
    g = data.draw(functions(n=f.dst.size))
    assert graph(f.then(g)) == compose(graph(f), graph(g))


@given(functions())
def test_function_pair_relation(f):
    ident = FunctionArrow.identity(f.src)
    assert relation_from_function_pair(ident, f) == graph(f)


@given(functions())
def test_image_of_kernel_along_itself_is_diagonal(f):
    e, _ = epi_mono_factor(f)
    assert image_along(kernel_pair(e), e) == Relation.identity(e.dst)


def test_small_functions_exhaustive():
    for n, m in itertools.product(range(1, 4), repeat=2):
        for table in itertools.product(range(m), repeat=n):
            f = FunctionArrow(Carrier(n), Carrier(m), table)
            F, Fo = graph(f), opposite(graph(f))
            assert compose_all(F, Fo, F) == F
            assert compose_all(Fo, F, Fo) == Fo
            assert (compose(Fo, F) == Relation.identity(f.dst)) == f.is_surjective()
            assert (compose(F, Fo) == Relation.identity(f.src)) == f.is_injective()
