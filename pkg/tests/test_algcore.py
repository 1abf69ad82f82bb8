import itertools
import json

import oracles as O
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permutex import fixtures
from permutex.algcore import (
    Congruence,
    FiniteAlgebra,
    OpTable,
    PermutabilityClass,
    SignatureError,
    algebra_to_dict,
    all_congruences,
    congruence_generated,
    find_maltsev_term,
    hom_check,
    homomorphisms,
    is_congruence,
    parse_algebra,
    permutability_class,
    quotient,
    quotients,
    set_partitions,
)
from permutex.relcore import Carrier, DimensionError, FunctionArrow, ResourceError, compose, kernel_pair


@st.composite
def algebras(draw, max_size=5):
    n = draw(st.integers(1, max_size))
    vals = st.integers(0, n - 1)
    ops = [
        OpTable("m", 2, tuple(draw(st.lists(vals, min_size=n * n, max_size=n * n)))),
        OpTable("u", 1, tuple(draw(st.lists(vals, min_size=n, max_size=n)))),
    ]
    return FiniteAlgebra(Carrier(n), tuple(ops), "rand")


def congruence_sets(cons):
    return sorted(sorted(c.relation.pairs()) for c in cons)


def test_bell_numbers():
    assert [sum(1 for _ in set_partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]
    assert [sum(1 for _ in O.partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


def test_z4_congruences():
    assert [str(c) for c in all_congruences(fixtures.algebra("z4"))] == ["0|1|2|3", "02|13", "0123"]


def test_chain3_congruences():
    assert [str(c) for c in all_congruences(fixtures.algebra("chain3_semilattice"))] == ["0|1|2", "01|2", "0|12", "012"]


@given(algebras())
def test_all_congruences_matches_oracle(a):
    expected = sorted(sorted(c) for c in O.congruences(O.ops_of(a), a.size))
    for strategy in ("partitions", "joins"):
        assert congruence_sets(all_congruences(a, strategy)) == expected


@given(algebras(), st.data())
def test_congruence_generated_matches_oracle(a, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, a.size - 1), st.integers(0, a.size - 1)), max_size=3))
    got = congruence_generated(a, pairs)
    assert set(got.relation.pairs()) == O.generated(O.ops_of(a), a.size, pairs)


@given(algebras(max_size=4), st.data())
def test_homomorphisms_match_brute_force(a, data):
    b = data.draw(algebras(max_size=3))
    brute = [t for t in O.maps(a.size, b.size) if hom_check(a, b, FunctionArrow(a.carrier, b.carrier, t))]
    assert [h.table for h in homomorphisms(a, b)] == brute


@given(algebras())
def test_quotient_map_is_hom_with_right_kernel(a):
    for q, p, theta in quotients(a):
        assert hom_check(a, q, p)
        assert kernel_pair(p) == theta.relation
        assert p.is_surjective()


@given(algebras(max_size=4))
def test_permutability_class_matches_oracle(a):
    cons = [set(c.relation.pairs()) for c in all_congruences(a)]
    two = all(O.then(x, y) == O.then(y, x) for x in cons for y in cons)
    three = all(O.chain(x, y, x) == O.chain(y, x, y) for x in cons for y in cons)
    rep = permutability_class(a)
    expected = (PermutabilityClass.TWO_PERMUTABLE if two
                else PermutabilityClass.THREE_PERMUTABLE_NOT_TWO if three
                else PermutabilityClass.NOT_THREE_PERMUTABLE)
    assert rep.cls == expected
    if rep.witness:
        al, be = (set(t.relation.pairs()) for t in rep.witness)
        first = O.then(al, be) if expected == PermutabilityClass.THREE_PERMUTABLE_NOT_TWO else O.chain(al, be, al)
        other = O.then(be, al) if expected == PermutabilityClass.THREE_PERMUTABLE_NOT_TWO else O.chain(be, al, be)
        assert rep.separating_pair in first - other


def _check_maltsev_table(a, table):
    n = a.size
    p = lambda x, y, z: table[x * n * n + y * n + z]  # noqa: E731
    for x, y in itertools.product(range(n), repeat=2):
        assert p(x, y, y) == x and p(x, x, y) == y
    # term operations preserve every congruence
    for c in all_congruences(a):
        rel = set(c.relation.pairs())
        assert O.compatible([(3, table)], n, rel)


@pytest.mark.parametrize("name", fixtures.GROUPS)
def test_groups_have_maltsev_term(name):
    a = fixtures.algebra(name)
    res = find_maltsev_term(a)
    assert res.found
    _check_maltsev_table(a, res.table)


@pytest.mark.parametrize("name", ["chain3_semilattice", "chain4_semilattice"])
def test_chains_have_no_maltsev_term(name):
    res = find_maltsev_term(fixtures.algebra(name))
    assert not res.found and res.table is None


def test_term_budget_raises():
    with pytest.raises(ResourceError):
        find_maltsev_term(fixtures.algebra("s3"), budget=10)


@settings(max_examples=60)
@given(algebras(max_size=3))
def test_found_term_implies_permutable(a):
    """A Mal'tsev term forces permutability (only this direction holds in general)."""
    try:
        res = find_maltsev_term(a, budget=600)
    except ResourceError:
        return  # clone too large to close at this budget
    if res.found:
        _check_maltsev_table(a, res.table)
        assert permutability_class(a).cls == PermutabilityClass.TWO_PERMUTABLE


def test_witnesses():
    rep3 = permutability_class(fixtures.algebra("chain3_semilattice"))
    assert [str(t) for t in rep3.witness] == ["01|2", "0|12"]
    assert rep3.separating_pair == (0, 2)
    rep4 = permutability_class(fixtures.algebra("chain4_semilattice"))
    assert rep4.cls == PermutabilityClass.NOT_THREE_PERMUTABLE


def test_congruence_constructors():
    c = Congruence.from_labels([0, 0, 1])
    assert str(c) == "01|2"
    assert Congruence.from_relation(c.relation) == c
    assert Congruence.from_blocks(3, [[2], [1, 0]]) == c
    assert c.labels == (0, 0, 1)


def test_is_congruence_rejects_non_compatible():
    z4 = fixtures.algebra("z4")
    assert not is_congruence(z4, Congruence.from_labels([0, 0, 1, 1]).relation)
    assert is_congruence(z4, Congruence.from_labels([0, 1, 0, 1]).relation)


def test_algebra_io_roundtrip():
    a = fixtures.algebra("s3")
    b = parse_algebra(json.dumps(algebra_to_dict(a)))
    assert a == b and hash(a) == hash(b)


@pytest.mark.parametrize("bad, exc", [
    ({"carrier": 2, "ops": [{"name": "m", "arity": 2, "table": [0, 1, 1]}]}, DimensionError),
    ({"carrier": 2, "ops": [{"name": "m", "arity": 4, "table": [0] * 16}]}, SignatureError),
    ({"carrier": 2, "ops": [{"name": "m", "arity": 1, "table": [0, 2]}]}, DimensionError),
    ({"ops": []}, SignatureError),
])
def test_bad_algebras(bad, exc):
    with pytest.raises(exc):
        parse_algebra(json.dumps(bad))


def test_quotient_of_z4():
    z4 = fixtures.algebra("z4")
    q, p = quotient(z4, Congruence.from_labels([0, 1, 0, 1]))
    assert q.size == 2 and p.table == (0, 1, 0, 1)
    assert q == fixtures.algebra("z2")
    assert compose(kernel_pair(p), kernel_pair(p)) == kernel_pair(p)
