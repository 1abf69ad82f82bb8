"""Finite carriers, binary relations and total functions.

Relations are stored as packed boolean matrices: row ``a`` is a Python int
whose bit ``b`` is set iff ``(a, b)`` is in the relation.  Composition is a
bit-parallel boolean matrix product (OR of the rows selected by each row).

Composition order follows the diagrammatic convention: ``compose(r, s)``
first applies ``r`` then ``s``.  In the juxtaposition notation where a
morphism ``f: A -> B`` is identified with its graph, ``compose(r, s)`` is
written ``s r``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class PermutexError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(PermutexError, ValueError):
    """Carriers of the operands do not line up."""


class PreconditionError(PermutexError, ValueError):
    """An operation was applied outside its domain."""


class ResourceError(PermutexError, RuntimeError):
    """A search exceeded its budget; the result is unknown."""


@dataclass(frozen=True)
class Carrier:
    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise PreconditionError(f"carrier size must be a positive integer, got {self.size!r}")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.size))

    def __len__(self) -> int:
        return self.size


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass(frozen=True)
class Relation:
    src: Carrier
    dst: Carrier
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.src.size:
            raise DimensionError(f"{len(self.rows)} rows for a source of size {self.src.size}")
        limit = 1 << self.dst.size
        for row in self.rows:
            if row < 0 or row >= limit:
                raise DimensionError(f"row {row:#x} has bits outside a target of size {self.dst.size}")

    @classmethod
    def from_pairs(cls, src: Carrier, dst: Carrier, pairs: Iterable[tuple[int, int]]) -> "Relation":
        rows = [0] * src.size
        for a, b in pairs:
            if not (0 <= a < src.size and 0 <= b < dst.size):
                raise DimensionError(f"pair {(a, b)} outside {src.size}x{dst.size}")
            rows[a] |= 1 << b
        return cls(src, dst, tuple(rows))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[bool]]) -> "Relation":
        src = Carrier(len(matrix))
        dst = Carrier(len(matrix[0]))
        pairs = [(a, b) for a, row in enumerate(matrix) for b, v in enumerate(row) if v]
        if any(len(row) != dst.size for row in matrix):
            raise DimensionError("ragged matrix")
        return cls.from_pairs(src, dst, pairs)

    @classmethod
    def identity(cls, carrier: Carrier) -> "Relation":
        return cls(carrier, carrier, tuple(1 << a for a in range(carrier.size)))

    @classmethod
    def full(cls, src: Carrier, dst: Carrier | None = None) -> "Relation":
        dst = src if dst is None else dst
        return cls(src, dst, ((1 << dst.size) - 1,) * src.size)

    @classmethod
    def empty(cls, src: Carrier, dst: Carrier | None = None) -> "Relation":
        dst = src if dst is None else dst
        return cls(src, dst, (0,) * src.size)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        a, b = pair
        return bool(self.rows[a] >> b & 1)

    def __le__(self, other: "Relation") -> bool:
        _same_shape(self, other)
        return all(x & ~y == 0 for x, y in zip(self.rows, other.rows))

    def __ge__(self, other: "Relation") -> bool:
        return other <= self

    def __or__(self, other: "Relation") -> "Relation":
        _same_shape(self, other)
        return Relation(self.src, self.dst, tuple(x | y for x, y in zip(self.rows, other.rows)))

    def __and__(self, other: "Relation") -> "Relation":
        _same_shape(self, other)
        return Relation(self.src, self.dst, tuple(x & y for x, y in zip(self.rows, other.rows)))

    def pairs(self) -> list[tuple[int, int]]:
        """All related pairs in row-major order."""
        return [(a, b) for a, row in enumerate(self.rows) for b in _bits(row)]

    def __len__(self) -> int:
        return sum(bin(row).count("1") for row in self.rows)

    def matrix(self) -> list[list[bool]]:
        return [[bool(row >> b & 1) for b in range(self.dst.size)] for row in self.rows]

    def first_difference(self, other: "Relation") -> tuple[int, int] | None:
        """Row-major first cell where the two matrices differ."""
        _same_shape(self, other)
        for a, (x, y) in enumerate(zip(self.rows, other.rows)):
            diff = x ^ y
            if diff:
                return a, (diff & -diff).bit_length() - 1
        return None

    def __str__(self) -> str:
        return "{" + ", ".join(f"({a},{b})" for a, b in self.pairs()) + "}"


def _same_shape(r: Relation, s: Relation) -> None:
    if r.src != s.src or r.dst != s.dst:
        raise DimensionError(
            f"shape mismatch: {r.src.size}x{r.dst.size} vs {s.src.size}x{s.dst.size}"
        )


@dataclass(frozen=True)
class FunctionArrow:
    src: Carrier
    dst: Carrier
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.src.size:
            raise DimensionError(f"table of length {len(self.table)} for a source of size {self.src.size}")
        for v in self.table:
            if not (0 <= v < self.dst.size):
                raise DimensionError(f"value {v} outside target of size {self.dst.size}")

    @classmethod
    def of(cls, table: Sequence[int], dst_size: int) -> "FunctionArrow":
        return cls(Carrier(len(table)), Carrier(dst_size), tuple(table))

    @classmethod
    def identity(cls, carrier: Carrier) -> "FunctionArrow":
        return cls(carrier, carrier, tuple(range(carrier.size)))

    @classmethod
    def constant(cls, src: Carrier, dst: Carrier, value: int = 0) -> "FunctionArrow":
        return cls(src, dst, (value,) * src.size)

    def __call__(self, x: int) -> int:
        return self.table[x]

    def then(self, other: "FunctionArrow") -> "FunctionArrow":
        """``other . self``."""
        if self.dst != other.src:
            raise DimensionError(
                f"cannot follow a map into {self.dst.size} elements by one out of {other.src.size}"
            )
        return FunctionArrow(self.src, other.dst, tuple(other.table[v] for v in self.table))

    def image(self) -> frozenset[int]:
        return frozenset(self.table)

    def is_surjective(self) -> bool:
        return len(set(self.table)) == self.dst.size

    def is_injective(self) -> bool:
        return len(set(self.table)) == self.src.size


@dataclass(frozen=True)
class EqClassification:
    reflexive: bool
    symmetric: bool
    transitive: bool

    @property
    def equivalence(self) -> bool:
        return self.reflexive and self.symmetric and self.transitive


def compose(r: Relation, s: Relation) -> Relation:
    """Relational composite: first ``r`` then ``s`` (written ``s r``)."""
    if r.dst != s.src:
        raise DimensionError(
            f"cannot compose {r.src.size}x{r.dst.size} with {s.src.size}x{s.dst.size}"
        )
    srows = s.rows
    out = []
    for row in r.rows:
        acc = 0
        while row:
            low = row & -row
            acc |= srows[low.bit_length() - 1]
            row ^= low
        out.append(acc)
    return Relation(r.src, s.dst, tuple(out))


def compose_all(*rels: Relation) -> Relation:
    """Left-to-right diagrammatic composite of a chain of relations."""
    out = rels[0]
    for r in rels[1:]:
        out = compose(out, r)
    return out


def opposite(r: Relation) -> Relation:
    cols = [0] * r.dst.size
    for a, row in enumerate(r.rows):
        bit = 1 << a
        for b in _bits(row):
            cols[b] |= bit
    return Relation(r.dst, r.src, tuple(cols))


def graph(f: FunctionArrow) -> Relation:
    return Relation(f.src, f.dst, tuple(1 << v for v in f.table))


def kernel_pair(f: FunctionArrow) -> Relation:
    """``{(a, a') | f(a) = f(a')}``."""
    fibres: dict[int, int] = {}
    for a, v in enumerate(f.table):
        fibres[v] = fibres.get(v, 0) | 1 << a
    return Relation(f.src, f.src, tuple(fibres[v] for v in f.table))


def is_regular_epi(f: FunctionArrow) -> bool:
    return f.is_surjective()


def image_along(r: Relation, f: FunctionArrow) -> Relation:
    """Direct image of a relation on ``X`` along a surjection ``f: X -> Y``."""
    if r.src != f.src or r.dst != f.src:
        raise DimensionError("relation must live on the domain of the map")
    if not f.is_surjective():
        raise PreconditionError("images are only taken along surjections")
    gf = graph(f)
    return compose(compose(opposite(gf), r), gf)


def eq_props(r: Relation) -> EqClassification:
    if r.src != r.dst:
        raise DimensionError(f"relation {r.src.size}x{r.dst.size} is not on a single carrier")
    ident = Relation.identity(r.src)
    return EqClassification(
        reflexive=ident <= r,
        symmetric=opposite(r) <= r,
        transitive=compose(r, r) <= r,
    )


def epi_mono_factor(f: FunctionArrow) -> tuple[FunctionArrow, FunctionArrow]:
    """Surjection onto the image followed by the inclusion.

    The image carrier lists values in order of first occurrence in ``f``.
    """
    index: dict[int, int] = {}
    for v in f.table:
        index.setdefault(v, len(index))
    image = Carrier(len(index))
    e = FunctionArrow(f.src, image, tuple(index[v] for v in f.table))
    m = FunctionArrow(image, f.dst, tuple(index))
    return e, m


def relation_from_function_pair(r1: FunctionArrow, r2: FunctionArrow) -> Relation:
    """The relation ``r2 r1°``: pairs ``(r1(x), r2(x))``."""
    if r1.src != r2.src:
        raise DimensionError("legs must share a domain")
    return Relation.from_pairs(r1.dst, r2.dst, zip(r1.table, r2.table))
