"""Exhaustive and seeded-random sweeps over squares, cubes and cuboids.

Exhaustive enumeration is graded by the largest carrier of a case.  Within
a grade, squares are ordered by object sizes (``C, A, D, B``) and then by
their tables in role order (``c, g, d, f, s, t``); cubes and cuboids extend
each square by ``W, Y`` and then ``w, delta, beta``.  The first violation
of a sweep is therefore well defined, and raising ``max_carrier`` only
appends cases.

Random mode derives one generator per case from ``(seed, index)`` with the
SplitMix64 finaliser, so case ``i`` is reproducible on its own and across
machines.
"""
from __future__ import annotations

import itertools
import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterator

from . import diagfile
from .algcore import all_congruences
from .diagrams import (
    AlgebraBackend,
    CubeDiagram,
    DiagramError,
    Mor,
    SetBackend,
    SquareDiagram,
    StructuralError,
    build_cuboid,
    build_split_cuboid,
    check_cuboid,
    cube_comparison,
    is_regular_pushout,
    make_cube,
    regular_pushout_relational,
)
from .relcore import Carrier, FunctionArrow, PermutexError, PreconditionError, compose, kernel_pair

MASK64 = (1 << 64) - 1
EXHAUSTIVE_CUBE_LIMIT = 4
RETRIES = 200
CHUNK = 512


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def case_rng(seed: int, index: int) -> random.Random:
    return random.Random(splitmix64(splitmix64(seed & MASK64) ^ index))


class GenerationError(PermutexError, RuntimeError):
    pass


@dataclass(frozen=True)
class SearchBounds:
    max_carrier: int = 3
    max_cases: int = 1_000_000
    seed: int = 0
    mode: str = "exhaustive"  # or "random"
    variant: str = "split"  # cuboids: "split" or "regular"
    allow_large: bool = False

    def __post_init__(self):
        if self.max_carrier < 1:
            raise PreconditionError("max_carrier must be at least 1")
        if self.mode not in ("exhaustive", "random"):
            raise PreconditionError(f"unknown mode {self.mode!r}")
        if self.variant not in ("split", "regular"):
            raise PreconditionError(f"unknown cuboid variant {self.variant!r}")
        if self.max_cases < 0:
            raise PreconditionError("max_cases must be non-negative")

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("allow_large")
        if self.mode == "exhaustive":
            d.pop("seed")
        return d


@dataclass
class SearchReport:
    shape: str
    backend: dict
    bounds: dict
    cases_checked: int = 0
    violations: list[dict] = field(default_factory=list)
    violation_total: int = 0
    truncated: bool = False
    disagreements: int = 0
    generation_errors: int = 0
    structural_errors: int = 0
    elapsed: float = 0.0

    @property
    def verdict(self) -> str:
        return "counterexample_found" if self.violation_total or self.violations else "all_conform"

    def to_dict(self) -> dict:
        """Machine form; leaves out the wall-clock time so reruns match byte for byte."""
        return {
            "shape": self.shape,
            "backend": self.backend,
            "bounds": self.bounds,
            "verdict": self.verdict,
            "cases_checked": self.cases_checked,
            "violation_count": max(self.violation_total, len(self.violations)),
            "truncated": self.truncated,
            "disagreements": self.disagreements,
            "generation_errors": self.generation_errors,
            "structural_errors": self.structural_errors,
            "violations": self.violations,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def worker_count() -> int:
    env = os.environ.get("PERMUTEX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


# -------------------------------------------------------------- enumeration
#
# Exhaustive streams are cut into work units: small picklable tuples that a
# worker expands into cases.  Objects travel as tokens (a size for sets, a
# pool index for algebras) so every process rebuilds them from its own
# backend.

def _fibres(m: Mor) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(m.fn.dst.size)]
    for x, y in enumerate(m.table):
        out[y].append(x)
    return out


def _determined(src_size: int, pairs) -> list[set[int]] | None:
    """Pointwise constraints ``h(x) = y`` collected from ``pairs``; None on conflict."""
    vals: list[set[int] | None] = [None] * src_size
    for x, y in pairs:
        if vals[x] is None:
            vals[x] = {y}
        elif y not in vals[x]:
            return None
    return [v if v is not None else set() for v in vals]


def _size(b, obj) -> int:
    return b.carrier(obj).size


def _surjections(b, src, dst) -> Iterator[Mor]:
    if _size(b, dst) > _size(b, src):
        return
    for m in b.maps(src, dst):
        if m.is_surjective():
            yield m


def _token(b, obj):
    if isinstance(b, AlgebraBackend):
        return b.pool.index(obj)
    return _size(b, obj)


def _object(b, token):
    return b.pool[token] if isinstance(b, AlgebraBackend) else Carrier(token)


def _encode(b, mors: dict[str, Mor]) -> tuple:
    return tuple((k, _token(b, m.src), _token(b, m.dst), m.table) for k, m in mors.items())


def _decode(b, enc: tuple) -> dict[str, Mor]:
    out = {}
    for k, s, d, table in enc:
        src, dst = _object(b, s), _object(b, d)
        out[k] = Mor(src, dst, FunctionArrow(b.carrier(src), b.carrier(dst), table))
    return out


def _quads(b, level: int):
    """Object quadruples ``(C, A, D, B)`` with ``|C| = level``."""
    objs = b.objects(level)
    for C in objs:
        if _size(b, C) != level:
            continue
        for A, D, B in itertools.product(objs, repeat=3):
            sa, sd, sb = _size(b, A), _size(b, D), _size(b, B)
            if sb <= sd and sb <= sa:
                yield C, A, D, B


def _square_fillers(b, c: Mor, g: Mor, d: Mor) -> Iterator[SquareDiagram]:
    """All (f, s, t) completing c, g, d to a square, in lexicographic order."""
    A, B, C, D = c.dst, d.dst, c.src, d.src
    f_allowed = _determined(_size(b, A), ((c(x), d(g(x))) for x in range(_size(b, C))))
    if f_allowed is None or any(not a for a in f_allowed):
        return
    g_fib = _fibres(g)
    for f in b.maps(A, B, f_allowed):
        f_fib = _fibres(f)
        if any(not fib for fib in f_fib):
            continue
        for s in b.maps(B, A, f_fib):
            t_allowed = [[x for x in g_fib[y] if c(x) == s(d(y))] for y in range(_size(b, D))]
            for t in b.maps(D, C, t_allowed):
                yield SquareDiagram(c=c, g=g, d=d, f=f, s=s, t=t)


def _quad_squares(b, quad) -> Iterator[SquareDiagram]:
    C, A, D, B = quad
    for c in _surjections(b, C, A):
        for g in _surjections(b, C, D):
            for d in _surjections(b, D, B):
                yield from _square_fillers(b, c, g, d)


def _quad_fronts(b, quad) -> Iterator[dict[str, Mor]]:
    """(c, g, d, f), all surjective with f.c = d.g; no sections."""
    C, A, D, B = quad
    for c in _surjections(b, C, A):
        for g in _surjections(b, C, D):
            for d in _surjections(b, D, B):
                allowed = _determined(_size(b, A), ((c(x), d(g(x))) for x in range(_size(b, C))))
                if allowed is None:
                    continue
                for f in b.maps(A, B, allowed):
                    if f.is_surjective():
                        yield {"c": c, "g": g, "d": d, "f": f}


def _backs(b, front: dict[str, Mor], level: int) -> Iterator[tuple[Mor, Mor, Mor]]:
    """(w, delta, beta) over ``front`` such that the whole cube has level ``level``."""
    d = front["d"]
    c_size = _size(b, front["c"].src)
    for W in b.objects(level):
        if c_size < level and _size(b, W) != level:
            continue
        for Y in b.objects(_size(b, W)):
            for w in _surjections(b, W, Y):
                for delta in b.maps(W, d.src):
                    allowed = _determined(_size(b, Y), ((w(x), d(delta(x))) for x in range(_size(b, W))))
                    if allowed is None:
                        continue
                    for beta in b.maps(Y, d.dst, allowed):
                        yield w, delta, beta


def _check_exhaustive_size(b, shape: str, bounds: SearchBounds):
    # an algebra pool is finite, so only plain sets can blow up
    if (shape != "square" and bounds.mode == "exhaustive" and isinstance(b, SetBackend)
            and bounds.max_carrier > EXHAUSTIVE_CUBE_LIMIT and not bounds.allow_large):
        raise PreconditionError(
            f"exhaustive {shape} enumeration is limited to max_carrier <= {EXHAUSTIVE_CUBE_LIMIT}; "
            "use random mode")


def _units(b, shape: str, bounds: SearchBounds) -> Iterator[tuple]:
    """Work units in canonical order.

    Cases are graded by their largest carrier.  Inside a grade, squares
    follow object sizes then tables (``c, g, d, f, s, t``); cubes and
    cuboids take the squares of all grades up to the current one in that
    order and append the back maps (``w, delta, beta``).  A sweep at a
    larger bound therefore starts with the sweep at a smaller one.
    """
    if bounds.mode == "random":
        for lo in range(0, bounds.max_cases, CHUNK):
            yield ("random", shape, bounds, lo, min(lo + CHUNK, bounds.max_cases))
        return
    _check_exhaustive_size(b, shape, bounds)
    for level in range(1, bounds.max_carrier + 1):
        if shape == "square":
            for quad in _quads(b, level):
                yield ("squares", tuple(_token(b, o) for o in quad))
            continue
        regular = shape == "cuboid" and bounds.variant == "regular"
        for lower in range(1, level + 1):
            for quad in _quads(b, lower):
                fronts = _quad_fronts(b, quad) if regular else (s.morphisms() for s in _quad_squares(b, quad))
                for front in fronts:
                    yield ("backs", shape, regular, level, _encode(b, front))


def _unit_cases(b, unit: tuple) -> Iterator[Any]:
    """Cases of one unit in order; ``None`` marks a random case that failed to generate."""
    kind = unit[0]
    if kind == "squares":
        yield from _quad_squares(b, tuple(_object(b, t) for t in unit[1]))
    elif kind == "random":
        _, shape, bounds, lo, hi = unit
        for idx in range(lo, hi):
            try:
                yield random_diagram(b, shape, bounds, idx)
            except GenerationError:
                yield None
    else:
        _, shape, regular, level, enc = unit
        front = _decode(b, enc)
        sq = None if regular else SquareDiagram(**front)
        for w, delta, beta in _backs(b, front, level):
            if shape == "cube":
                yield make_cube(b, sq, w, delta, beta)
            elif not regular:
                yield build_split_cuboid(b, make_cube(b, sq, w, delta, beta))
            else:
                try:
                    yield build_cuboid(b, front, w, delta, beta, split=False)
                except DiagramError:
                    # gbar or a diamond leg is not surjective: outside the lemma
                    continue


def _enumerate(b, shape: str, bounds: SearchBounds) -> Iterator[Any]:
    for unit in _units(b, shape, bounds):
        for case in _unit_cases(b, unit):
            if case is not None:
                yield case


def enumerate_squares(b, bounds: SearchBounds) -> Iterator[SquareDiagram]:
    return _enumerate(b, "square", bounds)


def enumerate_cubes(b, bounds: SearchBounds) -> Iterator[CubeDiagram]:
    return _enumerate(b, "cube", bounds)


def enumerate_cuboids(b, bounds: SearchBounds):
    """Split cuboids over the enumerated cubes, or regular ones when ``bounds.variant == "regular"``."""
    return _enumerate(b, "cuboid", bounds)


ENUMERATORS: dict[str, Callable] = {
    "square": enumerate_squares,
    "cube": enumerate_cubes,
    "cuboid": enumerate_cuboids,
}


# ------------------------------------------------------------------- random

def _random_objects(b, bounds: SearchBounds, rng: random.Random, lo: int = 1):
    objs = [o for o in b.objects(bounds.max_carrier) if _size(b, o) >= lo]
    if not objs:
        return None
    return rng.choice(objs)


def _random_square(b, bounds: SearchBounds, rng: random.Random) -> SquareDiagram | None:
    B = _random_objects(b, bounds, rng)
    A = _random_objects(b, bounds, rng, _size(b, B))
    D = _random_objects(b, bounds, rng, _size(b, B))
    if A is None or D is None:
        return None
    C = _random_objects(b, bounds, rng, max(_size(b, A), _size(b, D)))
    if C is None:
        return None
    f = b.random_map(A, B, rng, surjective=True)
    d = b.random_map(D, B, rng, surjective=True)
    g = b.random_map(C, D, rng, surjective=True)
    if f is None or d is None or g is None:
        return None
    s = b.random_map(B, A, rng, allowed=_fibres(f))
    t = b.random_map(D, C, rng, allowed=_fibres(g))
    if s is None or t is None:
        return None
    f_fib = _fibres(f)
    fixed = {t(y): s(d(y)) for y in range(_size(b, D))}
    c_allowed = [
        [fixed[x]] if x in fixed else f_fib[d(g(x))] for x in range(_size(b, C))
    ]
    c = b.random_map(C, A, rng, allowed=c_allowed, surjective=True)
    if c is None:
        return None
    try:
        return SquareDiagram(c=c, g=g, d=d, f=f, s=s, t=t)
    except DiagramError:
        return None


def _random_cube(b, bounds: SearchBounds, rng: random.Random) -> CubeDiagram | None:
    sq = _random_square(b, bounds, rng)
    if sq is None:
        return None
    W = _random_objects(b, bounds, rng)
    Y = _random_objects(b, bounds, rng)
    if _size(b, Y) > _size(b, W):
        W, Y = Y, W
    w = b.random_map(W, Y, rng, surjective=True)
    delta = b.random_map(W, sq.D, rng)
    if w is None or delta is None:
        return None
    allowed = _determined(_size(b, Y), ((w(x), sq.d(delta(x))) for x in range(_size(b, W))))
    if allowed is None:
        return None
    beta = b.random_map(Y, sq.B, rng, allowed=allowed)
    if beta is None:
        return None
    return make_cube(b, sq, w, delta, beta)


def random_diagram(b, shape: str, bounds: SearchBounds, index: int = 0):
    """A valid diagram of ``shape``; a pure function of ``(seed, index)``."""
    rng = case_rng(bounds.seed, index)
    for _ in range(RETRIES):
        if shape == "square":
            out = _random_square(b, bounds, rng)
        elif shape in ("cube", "cuboid"):
            out = _random_cube(b, bounds, rng)
            if out is not None and shape == "cuboid":
                if bounds.variant == "split":
                    out = build_split_cuboid(b, out)
                else:
                    try:
                        out = build_cuboid(b, out.front.morphisms(), out.w, out.delta, out.beta, split=False)
                    except DiagramError:
                        out = None
        else:
            raise PreconditionError(f"unknown shape {shape!r}")
        if out is not None:
            return out
    raise GenerationError(f"no valid {shape} after {RETRIES} attempts (seed {bounds.seed}, case {index})")


# ------------------------------------------------------------------- checks

def check_square_case(b, sq: SquareDiagram) -> dict | None:
    surj = is_regular_pushout(b, sq)
    rel = regular_pushout_relational(b, sq)
    if surj and rel:
        return None
    return {"regular_pushout": surj, "relational": rel, "disagree": surj != rel, "highlight": ["g", "c"]}


def check_cube_case(b, cube: CubeDiagram) -> dict | None:
    _, epi = cube_comparison(b, cube)
    return None if epi else {"v_surjective": False, "highlight": ["v"]}


def check_cuboid_case(b, cub) -> dict | None:
    try:
        rep = check_cuboid(b, cub)
    except StructuralError as exc:
        return {"structural": str(exc)}
    if rep.verdict == "conforms":
        return None
    return {**rep.to_dict(), "highlight": ["v", "t1", "t2"]}


CHECKS = {"square": check_square_case, "cube": check_cube_case, "cuboid": check_cuboid_case}


_WORKER: dict[str, Any] = {}


def _init_worker(backend) -> None:
    _WORKER["backend"] = backend


def _run_unit(args) -> tuple:
    """Check one unit: ``(count, events)`` with events ``(local index, kind, details, diagram)``."""
    shape, unit = args
    b = _WORKER["backend"]
    check = CHECKS[shape]
    count = 0
    events = []
    for local, case in enumerate(_unit_cases(b, unit)):
        count = local + 1
        if case is None:
            events.append((local, "generation", None, None))
            continue
        res = check(b, case)
        if res is None:
            continue
        if "structural" in res:
            events.append((local, "structural", res, None))
        else:
            events.append((local, "violation", res, diagfile.diagram_to_dict(b, case)))
    return count, events


def sweep(b, shape: str, bounds: SearchBounds, first_hit: bool = False,
          workers: int | None = None, max_violations: int | None = None) -> SearchReport:
    """Check every generated diagram of ``shape``.

    Work units are dealt out in canonical order (to worker processes when
    ``workers > 1``) and merged by case index, so the report does not depend
    on the worker count.  ``first_hit`` stops after the first violation.
    Violation indices are positions in the canonical stream; in random mode
    they are the case indices fed to :func:`random_diagram`.
    """
    if shape not in CHECKS:
        raise PreconditionError(f"unknown shape {shape!r}")
    workers = worker_count() if workers is None else max(1, workers)
    report = SearchReport(shape, b.describe(), bounds.echo())
    t0 = time.perf_counter()
    limit = bounds.max_cases
    units = _units(b, shape, bounds)
    pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(b,)) if workers > 1 else None
    if pool is None:
        _init_worker(b)
    offset = 0
    stop_at = None
    try:
        while stop_at is None:
            batch = [(shape, u) for u in itertools.islice(units, 4 * workers)]
            if not batch:
                break
            results = pool.map(_run_unit, batch) if pool else map(_run_unit, batch)
            for count, events in results:
                if offset >= limit:
                    report.truncated = count > 0
                    stop_at = limit
                    break
                for local, kind, res, diag in events:
                    idx = offset + local
                    if idx >= limit:
                        break
                    if kind == "generation":
                        report.generation_errors += 1
                    elif kind == "structural":
                        report.structural_errors += 1
                    else:
                        report.violation_total += 1
                        report.disagreements += bool(res.get("disagree"))
                        if max_violations is None or len(report.violations) < max_violations:
                            report.violations.append({"index": idx, "details": res, "diagram": diag})
                        if first_hit:
                            stop_at = idx + 1
                            break
                if stop_at is not None:
                    break
                offset += count
                if offset > limit:
                    report.truncated = True
                    stop_at = limit
                    break
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    end = stop_at if stop_at is not None else offset
    report.cases_checked = end - report.generation_errors
    report.elapsed = time.perf_counter() - t0
    return report


def search_counterexample(b, shape: str, bounds: SearchBounds, workers: int | None = None) -> SearchReport:
    return sweep(b, shape, bounds, first_hit=True, workers=workers)


# --------------------------------------------------------------- permutation

def _set_kernels(n: int, max_carrier: int):
    from .algcore import Congruence, set_partitions

    for labels in set_partitions(n):
        if max(labels) + 1 <= max_carrier:
            yield Congruence.from_labels(labels)


def verify_permutation(b, x, bounds: SearchBounds) -> SearchReport:
    """``R_f R_g = R_g R_f`` for all pairs of surjections out of ``x``.

    Surjections with the same kernel give the same relation, so the sweep
    runs over kernels: congruences of ``x`` for an algebra backend, set
    partitions with at most ``max_carrier`` blocks for sets.
    """
    report = SearchReport("permutation", b.describe(), bounds.echo())
    t0 = time.perf_counter()
    if isinstance(b, AlgebraBackend):
        kernels = all_congruences(x)
    else:
        kernels = list(_set_kernels(b.carrier(x).size, bounds.max_carrier))
    count = 0
    for al, be in itertools.combinations(kernels, 2):
        if count >= bounds.max_cases:
            report.truncated = True
            break
        count += 1
        ab = compose(al.relation, be.relation)
        ba = compose(be.relation, al.relation)
        if ab != ba:
            cell = ab.first_difference(ba)
            first, second = (al, be) if cell in ab else (be, al)
            report.violations.append({
                "index": count - 1,
                "details": {
                    "R_f": str(first),
                    "R_g": str(second),
                    "f": list(first.labels),
                    "g": list(second.labels),
                    "pair_in_RfRg_only": list(cell),
                },
            })
    report.cases_checked = count
    report.elapsed = time.perf_counter() - t0
    return report


def revalidate(violation: dict) -> bool:
    """Reload a reported diagram and confirm that it still violates."""
    backend, diagram = diagfile.diagram_from_dict(violation["diagram"])
    shape = violation["diagram"]["shape"]
    return CHECKS[shape](backend, diagram) is not None
