"""Finite algebras given by operation tables, and their congruences."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .relcore import (
    Carrier,
    DimensionError,
    FunctionArrow,
    PermutexError,
    PreconditionError,
    Relation,
    ResourceError,
    compose,
    compose_all,
    eq_props,
)

MAX_ARITY = 3
PARTITION_LIMIT = 8
JOIN_CLOSURE_LIMIT = 20_000
DEFAULT_TERM_BUDGET = 10**6


class SignatureError(PermutexError, ValueError):
    pass


@dataclass(frozen=True)
class OpTable:
    name: str
    arity: int
    table: tuple[int, ...]

    def check(self, size: int) -> None:
        if not 0 <= self.arity <= MAX_ARITY:
            raise SignatureError(f"{self.name}: arity {self.arity} outside 0..{MAX_ARITY}")
        if len(self.table) != size**self.arity:
            raise DimensionError(
                f"{self.name}: table has {len(self.table)} entries, expected {size}^{self.arity}"
            )
        for v in self.table:
            if not 0 <= v < size:
                raise DimensionError(f"{self.name}: value {v} outside carrier of size {size}")

    def index(self, args: Sequence[int], size: int) -> int:
        i = 0
        for a in args:
            i = i * size + a
        return i


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    carrier: Carrier
    ops: tuple[OpTable, ...]
    name: str = ""

    def __post_init__(self):
        names = [op.name for op in self.ops]
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate operation names in {names}")
        for op in self.ops:
            op.check(self.carrier.size)

    @property
    def size(self) -> int:
        return self.carrier.size

    @property
    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((op.name, op.arity) for op in self.ops)

    def op(self, name: str) -> OpTable:
        for op in self.ops:
            if op.name == name:
                return op
        raise KeyError(name)

    def apply(self, op: OpTable, *args: int) -> int:
        return op.table[op.index(args, self.size)]

    def key(self) -> tuple:
        """Structural identity: carrier size and all tables."""
        return (self.size, tuple((op.name, op.arity, op.table) for op in self.ops))

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        label = self.name or "algebra"
        return f"<{label} |{self.size}| {', '.join(f'{n}/{k}' for n, k in self.signature)}>"


class SubproductAlgebra(FiniteAlgebra):
    """Subalgebra of ``left x right`` on an explicit list of pairs.

    Operation tables are only built when someone asks for them; pullbacks
    and tabulations can be large and most checks only need the elements.
    """

    def __init__(self, left: FiniteAlgebra, right: FiniteAlgebra,
                 elements: Sequence[tuple[int, int]], name: str = ""):
        if left.signature != right.signature:
            raise SignatureError("factors have different signatures")
        object.__setattr__(self, "carrier", Carrier(len(elements)))
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "elements", tuple(elements))

    @property
    def signature(self):
        return self.left.signature

    @cached_property
    def ops(self) -> tuple[OpTable, ...]:
        lookup = {e: i for i, e in enumerate(self.elements)}
        n = self.size
        out = []
        for lop, rop in zip(self.left.ops, self.right.ops):
            table = []
            for args in itertools.product(range(n), repeat=lop.arity):
                l = lop.table[lop.index([self.elements[a][0] for a in args], self.left.size)]
                r = rop.table[rop.index([self.elements[a][1] for a in args], self.right.size)]
                try:
                    table.append(lookup[(l, r)])
                except KeyError:
                    raise SignatureError(f"pairs are not closed under {lop.name}") from None
            out.append(OpTable(lop.name, lop.arity, tuple(table)))
        return tuple(out)

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"<subproduct |{self.size}| of {self.left!r} x {self.right!r}>"

    def __reduce__(self):
        return (SubproductAlgebra, (self.left, self.right, self.elements, self.name))


@dataclass(frozen=True)
class Congruence:
    relation: Relation
    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_blocks(cls, size: int, blocks: Iterable[Iterable[int]]) -> "Congruence":
        blocks = tuple(sorted(tuple(sorted(b)) for b in blocks))
        carrier = Carrier(size)
        pairs = [(x, y) for b in blocks for x in b for y in b]
        rel = Relation.from_pairs(carrier, carrier, pairs)
        if sorted(x for b in blocks for x in b) != list(range(size)):
            raise PreconditionError(f"{blocks} is not a partition of {size} elements")
        return cls(rel, blocks)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Congruence":
        groups: dict[int, list[int]] = {}
        for x, lab in enumerate(labels):
            groups.setdefault(lab, []).append(x)
        return cls.from_blocks(len(labels), groups.values())

    @classmethod
    def from_relation(cls, r: Relation) -> "Congruence":
        if not eq_props(r).equivalence:
            raise PreconditionError("relation is not an equivalence")
        seen, blocks = 0, []
        for x, row in enumerate(r.rows):
            if not seen >> x & 1:
                blocks.append(tuple(y for y in range(r.src.size) if row >> y & 1))
                seen |= row
        return cls(r, tuple(blocks))

    @property
    def labels(self) -> tuple[int, ...]:
        """Block index of each element, blocks ordered by least element."""
        out = [0] * self.relation.src.size
        for i, b in enumerate(self.blocks):
            for x in b:
                out[x] = i
        return tuple(out)

    def sort_key(self) -> tuple:
        return (-len(self.blocks), self.labels)

    def __str__(self) -> str:
        return "|".join("".join(map(str, b)) if self.relation.src.size <= 10 else ",".join(map(str, b))
                        for b in self.blocks)


class PermutabilityClass(str, Enum):
    TWO_PERMUTABLE = "two_permutable"
    THREE_PERMUTABLE_NOT_TWO = "three_permutable_not_two"
    NOT_THREE_PERMUTABLE = "not_three_permutable"


@dataclass(frozen=True)
class PermutabilityReport:
    cls: PermutabilityClass
    witness: tuple[Congruence, Congruence] | None = None
    # a pair in the first composite (alpha.beta or alpha.beta.alpha) missing from the other
    separating_pair: tuple[int, int] | None = None
    scope: str = "congruence lattice of this algebra only, not the variety it generates"


# --------------------------------------------------------------- algebra i/o

def load_algebra(path: str | Path) -> FiniteAlgebra:
    path = Path(path)
    return parse_algebra(path.read_text(encoding="utf-8"), default_name=path.stem)


def parse_algebra(text: str, default_name: str = "") -> FiniteAlgebra:
    data = json.loads(text)
    return algebra_from_dict(data, default_name)


def algebra_from_dict(data: dict, default_name: str = "") -> FiniteAlgebra:
    try:
        size = int(data["carrier"])
        ops = tuple(
            OpTable(str(op["name"]), int(op["arity"]), tuple(int(v) for v in op["table"]))
            for op in data.get("ops", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SignatureError(f"malformed algebra description: {exc}") from None
    return FiniteAlgebra(Carrier(size), ops, str(data.get("name", default_name)))


def algebra_to_dict(a: FiniteAlgebra) -> dict:
    return {
        "name": a.name,
        "carrier": a.size,
        "ops": [{"name": op.name, "arity": op.arity, "table": list(op.table)} for op in a.ops],
    }


# -------------------------------------------------------------- congruences

def _translations(a: FiniteAlgebra) -> list[list[list[int]]]:
    """Every basic translation x -> op(c1, .., x, .., ck) as a lookup list."""
    n = a.size
    out = []
    for op in a.ops:
        for pos in range(op.arity):
            for rest in itertools.product(range(n), repeat=op.arity - 1):
                tr = []
                for x in range(n):
                    args = rest[:pos] + (x,) + rest[pos:]
                    tr.append(op.table[op.index(args, n)])
                out.append(tr)
    return out


_TRANSLATION_CACHE: dict[int, tuple[FiniteAlgebra, list[list[int]]]] = {}


def _cached_translations(a: FiniteAlgebra) -> list[list[int]]:
    hit = _TRANSLATION_CACHE.get(id(a))
    if hit is not None and hit[0] is a:
        return hit[1]
    maps = _translations(a)
    if len(_TRANSLATION_CACHE) > 256:
        _TRANSLATION_CACHE.clear()
    _TRANSLATION_CACHE[id(a)] = (a, maps)
    return maps


def is_congruence(a: FiniteAlgebra, r: Relation) -> bool:
    if r.src != a.carrier or r.dst != a.carrier:
        raise DimensionError("relation does not live on the algebra's carrier")
    if not eq_props(r).equivalence:
        return False
    pairs = r.pairs()
    for tr in _cached_translations(a):
        for x, y in pairs:
            if not r.rows[tr[x]] >> tr[y] & 1:
                return False
    return True


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if rx < ry:
            self.parent[ry] = rx
        else:
            self.parent[rx] = ry
        return True

    def labels(self) -> list[int]:
        return [self.find(x) for x in range(len(self.parent))]


def congruence_generated(a: FiniteAlgebra, pairs: Iterable[tuple[int, int]]) -> Congruence:
    """Smallest congruence containing ``pairs``."""
    n = a.size
    uf = _UnionFind(n)
    todo = []
    for x, y in pairs:
        if not (0 <= x < n and 0 <= y < n):
            raise DimensionError(f"pair {(x, y)} outside carrier of size {n}")
        if uf.union(x, y):
            todo.append((x, y))
    maps = _cached_translations(a)
    while todo:
        x, y = todo.pop()
        for tr in maps:
            u, v = tr[x], tr[y]
            if uf.union(u, v):
                todo.append((u, v))
    return Congruence.from_labels(uf.labels())


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length ``n`` in lexicographic order."""
    labels = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(labels)
            return
        for v in range(top + 2):
            labels[i] = v
            yield from rec(i + 1, max(top, v))

    if n == 0:
        return
    yield from rec(1, 0)


def _join(a: Congruence, b: Congruence) -> Congruence:
    uf = _UnionFind(a.relation.src.size)
    for blocks in (a.blocks, b.blocks):
        for blk in blocks:
            for x in blk[1:]:
                uf.union(blk[0], x)
    return Congruence.from_labels(uf.labels())


def all_congruences(a: FiniteAlgebra, strategy: str = "auto") -> list[Congruence]:
    """Every congruence of ``a``, ordered finest first then by block labels.

    ``strategy`` is ``"partitions"`` (filter all set partitions, carrier at
    most 8), ``"joins"`` (close the principal congruences under joins), or
    ``"auto"``.
    """
    n = a.size
    if strategy == "auto":
        strategy = "partitions" if n <= PARTITION_LIMIT else "joins"
    if strategy == "partitions":
        if n > PARTITION_LIMIT:
            raise ResourceError(f"partition enumeration is limited to carriers of size <= {PARTITION_LIMIT}")
        found = []
        for labels in set_partitions(n):
            cong = Congruence.from_labels(labels)
            if is_congruence(a, cong.relation):
                found.append(cong)
    elif strategy == "joins":
        principal = {}
        for x, y in itertools.combinations(range(n), 2):
            c = congruence_generated(a, [(x, y)])
            principal[c.blocks] = c
        bottom = Congruence.from_labels(range(n))
        lattice = {bottom.blocks: bottom, **principal}
        frontier = list(lattice.values())
        gens = list(principal.values())
        while frontier:
            nxt = []
            for c in frontier:
                for p in gens:
                    j = _join(c, p)
                    if j.blocks not in lattice:
                        lattice[j.blocks] = j
                        nxt.append(j)
                        if len(lattice) > JOIN_CLOSURE_LIMIT:
                            raise ResourceError(
                                f"congruence lattice exceeds {JOIN_CLOSURE_LIMIT} elements")
            frontier = nxt
        found = list(lattice.values())
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return sorted(found, key=Congruence.sort_key)


def permutability_class(a: FiniteAlgebra) -> PermutabilityReport:
    congs = all_congruences(a)
    pairs = list(itertools.combinations(congs, 2))
    for al, be in pairs:
        ab = compose(al.relation, be.relation)
        ba = compose(be.relation, al.relation)
        if ab != ba:
            break
    else:
        return PermutabilityReport(PermutabilityClass.TWO_PERMUTABLE)
    first_two = (al, be, ab, ba)

    for al, be in pairs:
        aba = compose_all(al.relation, be.relation, al.relation)
        bab = compose_all(be.relation, al.relation, be.relation)
        if aba != bab:
            x, y = aba.first_difference(bab)
            if (x, y) in aba:
                return PermutabilityReport(PermutabilityClass.NOT_THREE_PERMUTABLE, (al, be), (x, y))
            return PermutabilityReport(PermutabilityClass.NOT_THREE_PERMUTABLE, (be, al), (x, y))

    al, be, ab, ba = first_two
    x, y = ab.first_difference(ba)
    if (x, y) in ab:
        return PermutabilityReport(PermutabilityClass.THREE_PERMUTABLE_NOT_TWO, (al, be), (x, y))
    return PermutabilityReport(PermutabilityClass.THREE_PERMUTABLE_NOT_TWO, (be, al), (x, y))


# ------------------------------------------------------------ Mal'tsev terms

@dataclass(frozen=True)
class MaltsevResult:
    found: bool
    table: tuple[int, ...] | None  # p(x, y, z) at index x*n^2 + y*n + z
    closure_size: int


def find_maltsev_term(a: FiniteAlgebra, budget: int = DEFAULT_TERM_BUDGET) -> MaltsevResult:
    """Search the clone of ternary term operations for p(x,y,y)=x, p(x,x,y)=y.

    The clone is generated from the three projections by applying the basic
    operations coordinatewise.  Elements are processed in creation order and
    each new element is tested as soon as it appears, so the search stops at
    the first witness; if the closure saturates without one there is none.
    Raises ``ResourceError`` when more than ``budget`` elements are generated.
    """
    n = a.size
    dtype = np.uint8 if n <= 256 else np.uint16
    idx = np.arange(n**3)
    px, py, pz = idx // (n * n), (idx // n) % n, idx % n
    xs, ys = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    at_xyy = (xs * n * n + ys * n + ys).ravel()
    at_xxy = (xs * n * n + xs * n + ys).ravel()
    want_x = xs.ravel()
    want_y = ys.ravel()

    def is_witness(t: np.ndarray) -> bool:
        return bool(np.array_equal(t[at_xyy], want_x) and np.array_equal(t[at_xxy], want_y))

    elems: list[np.ndarray] = []
    seen: set[bytes] = set()

    def add(t: np.ndarray) -> bool:
        t = t.astype(dtype, copy=False)
        key = t.tobytes()
        if key in seen:
            return False
        if len(elems) >= budget:
            raise ResourceError(f"term closure exceeded the budget of {budget} elements")
        seen.add(key)
        elems.append(t)
        return is_witness(t)

    def result(t):
        return MaltsevResult(True, tuple(int(v) for v in t), len(elems))

    tables = [(op.arity, np.asarray(op.table, dtype=np.int64)) for op in a.ops]
    for t in (px, py, pz):
        if add(t):
            return result(elems[-1])
    for arity, tab in tables:
        if arity == 0 and add(np.full(n**3, tab[0])):
            return result(elems[-1])

    i = 0
    while i < len(elems):
        cur = elems[i]
        for arity, tab in tables:
            if arity == 1:
                if add(tab[cur]):
                    return result(elems[-1])
            elif arity == 2:
                for j in range(i + 1):
                    other = elems[j]
                    if add(tab[cur.astype(np.int64) * n + other]):
                        return result(elems[-1])
                    if j != i and add(tab[other.astype(np.int64) * n + cur]):
                        return result(elems[-1])
            elif arity == 3:
                for j, k, l in itertools.product(range(i + 1), repeat=3):
                    if i not in (j, k, l):
                        continue
                    u, v, w = elems[j], elems[k], elems[l]
                    if add(tab[(u.astype(np.int64) * n + v) * n + w]):
                        return result(elems[-1])
        i += 1
    return MaltsevResult(False, None, len(elems))


# ----------------------------------------------------- quotients and homs

def quotient(a: FiniteAlgebra, theta: Congruence) -> tuple[FiniteAlgebra, FunctionArrow]:
    if theta.relation.src != a.carrier or not is_congruence(a, theta.relation):
        raise PreconditionError(f"{theta} is not a congruence of {a!r}")
    labels = theta.labels
    k = len(theta.blocks)
    reps = [b[0] for b in theta.blocks]
    ops = []
    for op in a.ops:
        table = tuple(
            labels[op.table[op.index([reps[b] for b in args], a.size)]]
            for args in itertools.product(range(k), repeat=op.arity)
        )
        ops.append(OpTable(op.name, op.arity, table))
    name = f"{a.name}/{theta}" if a.name else ""
    q = FiniteAlgebra(Carrier(k), tuple(ops), name)
    return q, FunctionArrow(a.carrier, q.carrier, labels)


def hom_check(a: FiniteAlgebra, b: FiniteAlgebra, f: FunctionArrow) -> bool:
    if a.signature != b.signature:
        raise SignatureError(f"signatures differ: {a.signature} vs {b.signature}")
    if f.src != a.carrier or f.dst != b.carrier:
        raise DimensionError("map does not go between the algebras' carriers")
    ft = f.table
    for oa, ob in zip(a.ops, b.ops):
        for args in itertools.product(range(a.size), repeat=oa.arity):
            lhs = ft[oa.table[oa.index(args, a.size)]]
            rhs = ob.table[ob.index([ft[x] for x in args], b.size)]
            if lhs != rhs:
                return False
    return True


def homomorphisms(a: FiniteAlgebra, b: FiniteAlgebra,
                  allowed: Sequence[Iterable[int]] | None = None) -> Iterator[FunctionArrow]:
    """All homomorphisms ``a -> b`` in lexicographic table order.

    ``allowed[x]`` optionally restricts the image of ``x``.
    """
    if a.signature != b.signature:
        raise SignatureError(f"signatures differ: {a.signature} vs {b.signature}")
    n, m = a.size, b.size
    choices = [sorted(set(allowed[x])) if allowed is not None else list(range(m)) for x in range(n)]
    # constraints keyed by the largest element they mention
    buckets: list[list[tuple[OpTable, tuple[int, ...], int]]] = [[] for _ in range(n)]
    for oa, ob in zip(a.ops, b.ops):
        for args in itertools.product(range(n), repeat=oa.arity):
            res = oa.table[oa.index(args, n)]
            top = max(args + (res,))
            buckets[top].append((ob, args, res))
    table = [0] * n

    def ok(i: int) -> bool:
        for ob, args, res in buckets[i]:
            if ob.table[ob.index([table[x] for x in args], m)] != table[res]:
                return False
        return True

    def rec(i: int):
        if i == n:
            yield FunctionArrow(a.carrier, b.carrier, tuple(table))
            return
        for v in choices[i]:
            table[i] = v
            if ok(i):
                yield from rec(i + 1)

    yield from rec(0)


def quotients(a: FiniteAlgebra) -> list[tuple[FiniteAlgebra, FunctionArrow, Congruence]]:
    out = []
    for theta in all_congruences(a):
        q, p = quotient(a, theta)
        out.append((q, p, theta))
    return out
