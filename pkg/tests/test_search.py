import oracles as O
import pytest

from permutex import diagfile, fixtures, search
from permutex.diagrams import AlgebraBackend, SetBackend
from permutex.relcore import Carrier, PreconditionError
from permutex.search import SearchBounds, random_diagram, revalidate, sweep, verify_permutation

SB = SetBackend()

# Frozen from tests/oracles.py (brute-force enumeration sorted by the canonical key).
SET_SQUARES_3 = 578
SET_SQUARE_VIOLATIONS_3 = 24
FIRST_SQUARE_VIOLATION = 56
COUNTEREXAMPLE_INDEX = 57
SET_CUBES_3 = 97904
SET_CUBE_VIOLATIONS_3 = 1944
FIRST_CUBE_VIOLATION = 5103


def square_tables(sq):
    m = sq.morphisms()
    return tuple(m[k].table for k in "cgdfst")


@pytest.fixture(scope="module")
def oracle_squares():
    return [tabs for _, tabs in O.squares(3)]


def test_square_stream_equals_oracle(oracle_squares):
    got = [square_tables(sq) for sq in search.enumerate_squares(SB, SearchBounds(max_carrier=3))]
    assert got == oracle_squares
    assert len(got) == SET_SQUARES_3


def test_oracle_frozen_square_values(oracle_squares):
    bad = [i for i, (c, g, d, f, s, t) in enumerate(oracle_squares) if not O.regular_pushout(c, g, d, f)]
    assert len(bad) == SET_SQUARE_VIOLATIONS_3 and bad[0] == FIRST_SQUARE_VIOLATION
    assert oracle_squares[COUNTEREXAMPLE_INDEX] == ((0, 0, 1), (0, 1, 1), (0, 0), (0, 0), (0,), (0, 1))


def test_cube_stream_equals_oracle_small():
    got = [square_tables(x.front) + (x.w.table, x.delta.table, x.beta.table)
           for x in search.enumerate_cubes(SB, SearchBounds(max_carrier=2))]
    assert got == O.cubes(2)


def test_square_sweep():
    rep = sweep(SB, "square", SearchBounds(max_carrier=3), workers=1, max_violations=None)
    assert rep.cases_checked == SET_SQUARES_3
    assert rep.violation_total == SET_SQUARE_VIOLATIONS_3 == len(rep.violations)
    assert rep.disagreements == 0 and not rep.truncated
    idx = [v["index"] for v in rep.violations]
    assert idx[0] == FIRST_SQUARE_VIOLATION and COUNTEREXAMPLE_INDEX in idx
    assert all(revalidate(v) for v in rep.violations)


def test_cube_sweep_frozen():
    rep = sweep(SB, "cube", SearchBounds(max_carrier=3), workers=1, max_violations=3)
    assert rep.cases_checked == SET_CUBES_3
    assert rep.violation_total == SET_CUBE_VIOLATIONS_3 and len(rep.violations) == 3
    assert rep.to_dict()["violation_count"] == SET_CUBE_VIOLATIONS_3
    assert rep.violations[0]["index"] == FIRST_CUBE_VIOLATION


def test_first_hit_cube():
    rep = search.search_counterexample(SB, "cube", SearchBounds(max_carrier=3), workers=1)
    assert rep.cases_checked == FIRST_CUBE_VIOLATION + 1
    assert [v["index"] for v in rep.violations] == [FIRST_CUBE_VIOLATION]


def test_truncation(oracle_squares):
    exact = sweep(SB, "square", SearchBounds(max_carrier=3, max_cases=SET_SQUARES_3), workers=1)
    assert not exact.truncated and exact.cases_checked == SET_SQUARES_3
    short = sweep(SB, "square", SearchBounds(max_carrier=3, max_cases=60), workers=1)
    assert short.truncated and short.cases_checked == 60
    expected = [i for i, (c, g, d, f, _, _) in enumerate(oracle_squares[:60]) if not O.regular_pushout(c, g, d, f)]
    assert [v["index"] for v in short.violations] == expected
    none = sweep(SB, "square", SearchBounds(max_carrier=3, max_cases=0), workers=1)
    assert none.truncated and none.cases_checked == 0


def test_max_violations_zero_keeps_total():
    rep = sweep(SB, "square", SearchBounds(max_carrier=3), workers=1, max_violations=0)
    assert rep.violations == [] and rep.to_dict()["violation_count"] == SET_SQUARE_VIOLATIONS_3
    assert rep.verdict == "counterexample_found"


def test_parallel_equals_serial():
    bounds = SearchBounds(max_carrier=3, mode="random", max_cases=300, seed=5)
    serial = sweep(SB, "square", bounds, workers=1)
    assert sweep(SB, "square", bounds, workers=2).dumps() == serial.dumps()
    ex = SearchBounds(max_carrier=3)
    assert sweep(SB, "square", ex, workers=3).dumps() == sweep(SB, "square", ex, workers=1).dumps()


def test_random_is_deterministic():
    bounds = SearchBounds(max_carrier=3, mode="random", seed=11)
    a = [diagfile.dumps(SB, random_diagram(SB, "cube", bounds, i)) for i in range(20)]
    b = [diagfile.dumps(SB, random_diagram(SB, "cube", bounds, i)) for i in range(20)]
    assert a == b
    other = SearchBounds(max_carrier=3, mode="random", seed=12)
    assert a != [diagfile.dumps(SB, random_diagram(SB, "cube", other, i)) for i in range(20)]


def test_case_rng_independent_of_order():
    assert search.case_rng(3, 7).random() == search.case_rng(3, 7).random()
    assert search.splitmix64(0) == 0xE220A8397B1DCDAF


def test_random_square_sweep_finds_violations():
    rep = sweep(SB, "square", SearchBounds(max_carrier=3, mode="random", max_cases=1000), workers=1)
    assert rep.cases_checked + rep.generation_errors == 1000
    assert rep.verdict == "counterexample_found"
    assert all(revalidate(v) for v in rep.violations)


def test_group_squares_and_cubes_conform(group_backend):
    rep = sweep(group_backend, "square", SearchBounds(max_carrier=6), workers=1)
    assert rep.verdict == "all_conform" and rep.cases_checked > 0
    rep = sweep(group_backend, "cube", SearchBounds(max_carrier=4), workers=1)
    assert rep.verdict == "all_conform" and rep.cases_checked > 0


def test_group_random_cuboids(group_backend):
    rep = sweep(group_backend, "cuboid", SearchBounds(max_carrier=6, mode="random", max_cases=100), workers=1)
    assert rep.verdict == "all_conform" and rep.structural_errors == 0


def test_set_cuboid_first_hit_small():
    rep = search.search_counterexample(SB, "cuboid", SearchBounds(max_carrier=3), workers=1)
    assert rep.verdict == "counterexample_found" and rep.structural_errors == 0
    v = rep.violations[0]
    assert revalidate(v)
    assert v["details"]["lower_exact"] and not v["details"]["upper_exact"]


def test_regular_variant_small(group_backend):
    rep = sweep(group_backend, "cuboid", SearchBounds(max_carrier=2, variant="regular"), workers=1)
    assert rep.verdict == "all_conform" and rep.cases_checked > 0
    rep = search.search_counterexample(SB, "cuboid", SearchBounds(max_carrier=3, variant="regular"), workers=1)
    assert rep.verdict == "counterexample_found"


def test_exhaustive_size_cap():
    with pytest.raises(PreconditionError):
        sweep(SB, "cube", SearchBounds(max_carrier=5), workers=1)
    rep = sweep(SB, "cube", SearchBounds(max_carrier=5, allow_large=True, max_cases=10), workers=1)
    assert rep.truncated


def test_generation_error_after_retries(monkeypatch):
    monkeypatch.setattr(search, "_random_square", lambda b, bounds, rng: None)
    with pytest.raises(search.GenerationError):
        random_diagram(SB, "square", SearchBounds(mode="random"), 0)


def test_bounds_validation():
    for kw in ({"max_carrier": 0}, {"mode": "fuzzy"}, {"variant": "x"}, {"max_cases": -1}):
        with pytest.raises(PreconditionError):
            SearchBounds(**kw)
    assert "seed" not in SearchBounds().echo() and "allow_large" not in SearchBounds().echo()
    assert SearchBounds(mode="random").echo()["seed"] == 0


def test_verify_permutation():
    for name in ("z4", "s3", "trivial1"):
        a = fixtures.algebra(name)
        rep = verify_permutation(AlgebraBackend([a]), a, SearchBounds())
        assert rep.verdict == "all_conform"
    chain = fixtures.algebra("chain3_semilattice")
    rep = verify_permutation(AlgebraBackend([chain]), chain, SearchBounds())
    d = rep.violations[0]["details"]
    assert (d["R_f"], d["R_g"], d["pair_in_RfRg_only"]) == ("01|2", "0|12", [0, 2])
    assert verify_permutation(SB, Carrier(3), SearchBounds()).verdict == "counterexample_found"
    assert verify_permutation(SB, Carrier(3), SearchBounds(max_carrier=1)).cases_checked == 0
