"""Squares, cubes and cuboids over a finite backend, with their checks.

A backend is either plain finite sets (:class:`SetBackend`) or finite
algebras of one signature with homomorphisms (:class:`AlgebraBackend`).
Every construction here (pullbacks, kernel pairs, tabulations) is a
subobject of a binary product, so a backend only has to say how to carve
one out; element orderings are fixed so that outputs are reproducible.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, fields
from typing import Any, Iterable, Iterator, Sequence

from .algcore import FiniteAlgebra, SubproductAlgebra, hom_check, homomorphisms, quotients
from .relcore import (
    Carrier,
    FunctionArrow,
    PermutexError,
    PreconditionError,
    Relation,
    compose,
    graph,
    kernel_pair,
    opposite,
    relation_from_function_pair,
)


class DiagramError(PermutexError, ValueError):
    """A diagram violates one of its constructional invariants."""


class StructuralError(PermutexError, ValueError):
    """The hypotheses of a cuboid check do not hold."""

    def __init__(self, msg: str, report: "CuboidReport | None" = None):
        super().__init__(msg)
        self.report = report


# ------------------------------------------------------------------ morphisms

@dataclass(frozen=True, eq=False)
class Mor:
    """A morphism of a backend: two objects and the underlying function."""

    src: Any
    dst: Any
    fn: FunctionArrow

    def __call__(self, x: int) -> int:
        return self.fn.table[x]

    @property
    def table(self) -> tuple[int, ...]:
        return self.fn.table

    def then(self, other: "Mor") -> "Mor":
        return Mor(self.src, other.dst, self.fn.then(other.fn))

    def same(self, other: "Mor") -> bool:
        return self.fn == other.fn

    def is_surjective(self) -> bool:
        return self.fn.is_surjective()

    def __repr__(self):
        return f"Mor({list(self.fn.table)} -> {self.fn.dst.size})"


def _commutes(*pairs: tuple[Sequence[Mor], Sequence[Mor]]) -> list[int]:
    """Indices of the path pairs whose composites differ."""
    bad = []
    for n, (left, right) in enumerate(pairs):
        a, b = left[0], right[0]
        for m in left[1:]:
            a = a.then(m)
        for m in right[1:]:
            b = b.then(m)
        if a.fn != b.fn:
            bad.append(n)
    return bad


# ------------------------------------------------------------------- backends

class SetBackend:
    """Finite sets and all functions."""

    name = "set"

    def carrier(self, obj: Carrier) -> Carrier:
        return obj

    def is_morphism(self, m: Mor) -> bool:
        return m.fn.src == m.src and m.fn.dst == m.dst

    def subproduct(self, left, right, elements: Sequence[tuple[int, int]]) -> Carrier:
        if not elements:
            raise PreconditionError("empty subobject: carriers must be non-empty")
        return Carrier(len(elements))

    def identity(self, obj) -> Mor:
        return Mor(obj, obj, FunctionArrow.identity(obj))

    def objects(self, max_carrier: int) -> list[Carrier]:
        return [Carrier(k) for k in range(1, max_carrier + 1)]

    def maps(self, src: Carrier, dst: Carrier,
             allowed: Sequence[Iterable[int]] | None = None) -> Iterator[Mor]:
        choices = [sorted(set(a)) for a in allowed] if allowed is not None else [range(dst.size)] * src.size
        for table in itertools.product(*choices):
            yield Mor(src, dst, FunctionArrow(src, dst, table))

    def random_map(self, src: Carrier, dst: Carrier, rng: random.Random,
                   allowed: Sequence[Iterable[int]] | None = None,
                   surjective: bool = False) -> Mor | None:
        if surjective and allowed is None:
            if dst.size > src.size:
                return None
            # hit every target once at random positions, fill the rest freely
            table = [rng.randrange(dst.size) for _ in range(src.size)]
            for y, x in enumerate(rng.sample(range(src.size), dst.size)):
                table[x] = y
            return Mor(src, dst, FunctionArrow(src, dst, tuple(table)))
        options = [sorted(set(allowed[x])) if allowed is not None else range(dst.size) for x in range(src.size)]
        if any(not o for o in options):
            return None
        for _ in range(64):
            table = tuple(rng.choice(o) for o in options)
            if not surjective or len(set(table)) == dst.size:
                return Mor(src, dst, FunctionArrow(src, dst, table))
        return None

    def random_object(self, max_carrier: int, rng: random.Random) -> Carrier:
        return Carrier(rng.randint(1, max_carrier))

    def describe(self) -> dict:
        return {"kind": "set"}


class AlgebraBackend:
    """Finite algebras of a fixed signature and their homomorphisms.

    ``pool`` lists the objects that enumeration and random generation draw
    from; :meth:`from_fixtures` fills it with every quotient of the given
    algebras.
    """

    name = "algebra"

    def __init__(self, pool: Sequence[FiniteAlgebra], label: str = ""):
        if not pool:
            raise PreconditionError("an algebra backend needs at least one object")
        sig = pool[0].signature
        for a in pool:
            if a.signature != sig:
                raise PreconditionError(f"{a!r} does not have signature {sig}")
        self.signature = sig
        self.pool = list(pool)
        self.label = label
        self._homs: dict[tuple[int, int], tuple[Any, Any, list[Mor]]] = {}

    @classmethod
    def from_fixtures(cls, algebras: Sequence[FiniteAlgebra]) -> "AlgebraBackend":
        seen: dict[tuple, FiniteAlgebra] = {}
        for a in algebras:
            for q, _, _ in quotients(a):
                seen.setdefault(q.key(), q)
        for a in algebras:
            seen[a.key()] = a  # keep the fixture's own name
        pool = sorted(seen.values(), key=lambda a: (a.size, a.key()))
        for a in pool:
            if not a.name:
                object.__setattr__(a, "name", f"q{a.size}")
        label = "+".join(a.name for a in algebras)
        return cls(pool, label)

    def carrier(self, obj: FiniteAlgebra) -> Carrier:
        return obj.carrier

    def is_morphism(self, m: Mor) -> bool:
        if m.fn.src != m.src.carrier or m.fn.dst != m.dst.carrier:
            return False
        return hom_check(m.src, m.dst, m.fn)

    def subproduct(self, left, right, elements):
        if not elements:
            raise PreconditionError("empty subobject: carriers must be non-empty")
        return SubproductAlgebra(left, right, elements)

    def identity(self, obj) -> Mor:
        return Mor(obj, obj, FunctionArrow.identity(obj.carrier))

    def objects(self, max_carrier: int) -> list[FiniteAlgebra]:
        return [a for a in self.pool if a.size <= max_carrier]

    def _all(self, src, dst) -> list[Mor]:
        key = (id(src), id(dst))
        if key not in self._homs:
            # objects are kept alive alongside so their ids stay unique
            self._homs[key] = (src, dst, [Mor(src, dst, f) for f in homomorphisms(src, dst)])
        return self._homs[key][2]

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_homs"] = {}
        return state

    def maps(self, src, dst, allowed=None) -> Iterator[Mor]:
        if allowed is None:
            return iter(self._all(src, dst))
        allowed = [set(a) for a in allowed]
        if any(not a for a in allowed):
            return iter(())
        return (m for m in self._all(src, dst) if all(v in allowed[x] for x, v in enumerate(m.table)))

    def random_map(self, src, dst, rng, allowed=None, surjective=False) -> Mor | None:
        options = [m for m in self.maps(src, dst, allowed) if not surjective or m.is_surjective()]
        return rng.choice(options) if options else None

    def random_object(self, max_carrier: int, rng: random.Random):
        return rng.choice(self.objects(max_carrier))

    def describe(self) -> dict:
        return {"kind": "algebra", "label": self.label, "signature": [list(s) for s in self.signature]}


def _carrier(obj) -> Carrier:
    return obj if isinstance(obj, Carrier) else obj.carrier


def validate(b, *mors: Mor) -> None:
    for m in mors:
        if not b.is_morphism(m):
            raise DiagramError(f"{m!r} is not a morphism of the {b.name} backend")


# ------------------------------------------------------- limits, tabulations

def pullback(b, f: Mor, d: Mor) -> tuple[Any, Mor, Mor]:
    """Pullback of ``f: A -> B`` and ``d: D -> B``.

    Elements are the pairs ``(x, a)`` with ``d(x) = f(a)`` in lexicographic
    order; returns ``(P, p_D, p_A)``.
    """
    if f.fn.dst != d.fn.dst:
        raise PreconditionError("pullback legs must share a codomain")
    elems = [(x, a) for x in range(d.fn.src.size) for a in range(f.fn.src.size) if d(x) == f(a)]
    P = b.subproduct(d.src, f.src, elems)
    cp = _carrier(P)
    p_d = Mor(P, d.src, FunctionArrow(cp, d.fn.src, tuple(x for x, _ in elems)))
    p_a = Mor(P, f.src, FunctionArrow(cp, f.fn.src, tuple(a for _, a in elems)))
    return P, p_d, p_a


def pair_into(target_legs: tuple[Mor, Mor], u: Mor, v: Mor) -> Mor | None:
    """The map ``x -> (u(x), v(x))`` into an object given by two jointly
    injective legs, or None when some pair is missing."""
    left, right = target_legs
    index = {(left(i), right(i)): i for i in range(left.fn.src.size)}
    table = []
    for x in range(u.fn.src.size):
        i = index.get((u(x), v(x)))
        if i is None:
            return None
        table.append(i)
    return Mor(u.src, left.src, FunctionArrow(u.fn.src, left.fn.src, tuple(table)))


@dataclass(frozen=True)
class Tabulation:
    carrier: Carrier
    p1: FunctionArrow
    p2: FunctionArrow


def tabulate(r: Relation) -> Tabulation:
    pairs = r.pairs()
    if not pairs:
        raise PreconditionError("cannot tabulate the empty relation with a non-empty carrier")
    car = Carrier(len(pairs))
    return Tabulation(
        car,
        FunctionArrow(car, r.src, tuple(x for x, _ in pairs)),
        FunctionArrow(car, r.dst, tuple(y for _, y in pairs)),
    )


def kernel_pair_object(b, m: Mor) -> tuple[Any, Mor, Mor]:
    """The kernel pair of ``m`` as a backend object with its two legs."""
    pairs = kernel_pair(m.fn).pairs()
    R = b.subproduct(m.src, m.src, pairs)
    cr = _carrier(R)
    return (
        R,
        Mor(R, m.src, FunctionArrow(cr, m.fn.src, tuple(x for x, _ in pairs))),
        Mor(R, m.src, FunctionArrow(cr, m.fn.src, tuple(y for _, y in pairs))),
    )


def jointly_injective(p1: Mor, p2: Mor) -> bool:
    return len(set(zip(p1.table, p2.table))) == len(p1.table)


def is_pullback_square(apex_legs: tuple[Mor, Mor], cospan: tuple[Mor, Mor]) -> bool:
    """Whether ``apex_legs = (p_D, p_A)`` exhibit a pullback of ``cospan = (d, f)``."""
    p_d, p_a = apex_legs
    d, f = cospan
    if p_d.then(d).fn != p_a.then(f).fn:
        return False
    if not jointly_injective(p_d, p_a):
        return False
    expected = sum(1 for x in range(d.fn.src.size) for a in range(f.fn.src.size) if d(x) == f(a))
    return expected == p_d.fn.src.size


def _row_exact(p1: Mor, p2: Mor, q: Mor) -> bool:
    return (
        q.is_surjective()
        and jointly_injective(p1, p2)
        and relation_from_function_pair(p1.fn, p2.fn) == kernel_pair(q.fn)
    )


# --------------------------------------------------------------------- forks

@dataclass(frozen=True)
class Fork:
    r1: Mor
    r2: Mor
    f: Mor

    def __post_init__(self):
        if self.r1.fn.src != self.r2.fn.src or self.r1.fn.dst != self.f.fn.src or self.r2.fn.dst != self.f.fn.src:
            raise DiagramError("fork legs do not line up")
        if self.r1.then(self.f).fn != self.r2.then(self.f).fn:
            raise DiagramError("f does not coequalise the fork legs")
        if not jointly_injective(self.r1, self.r2):
            raise DiagramError("fork legs are not jointly injective")

    ROLES = {"r1": ("R", "A"), "r2": ("R", "A"), "f": ("A", "B")}

    def morphisms(self) -> dict[str, Mor]:
        return {"r1": self.r1, "r2": self.r2, "f": self.f}


def is_exact_fork(b, fork: Fork) -> bool:
    return _row_exact(fork.r1, fork.r2, fork.f)


# -------------------------------------------------------------------- squares

SQUARE_ROLES = {
    "c": ("C", "A"),
    "g": ("C", "D"),
    "d": ("D", "B"),
    "f": ("A", "B"),
    "s": ("B", "A"),
    "t": ("D", "C"),
}


def _check_roles(roles: dict[str, tuple[str, str]], mors: dict[str, Mor]) -> None:
    objs: dict[str, Carrier] = {}
    for name, (src, dst) in roles.items():
        m = mors.get(name)
        if m is None:
            continue
        for role, car in ((src, m.fn.src), (dst, m.fn.dst)):
            if objs.setdefault(role, car) != car:
                raise DiagramError(f"{name} disagrees with the carrier of {role}")


@dataclass(frozen=True)
class SquareDiagram:
    """A commutative square of split epimorphisms over surjections::

        C --c->> A
        g|^t     f|^s
        D --d->> B
    """

    c: Mor
    g: Mor
    d: Mor
    f: Mor
    s: Mor
    t: Mor

    ROLES = SQUARE_ROLES

    def __post_init__(self):
        _check_roles(SQUARE_ROLES, self.morphisms())
        bad = _commutes(
            ((self.c, self.f), (self.g, self.d)),
            ((self.d, self.s), (self.t, self.c)),
        )
        if bad:
            raise DiagramError(["f.c != d.g", "s.d != c.t"][bad[0]])
        if self.s.then(self.f).fn != FunctionArrow.identity(self.f.fn.dst):
            raise DiagramError("s is not a section of f")
        if self.t.then(self.g).fn != FunctionArrow.identity(self.g.fn.dst):
            raise DiagramError("t is not a section of g")
        if not self.c.is_surjective():
            raise DiagramError("c is not surjective")
        if not self.d.is_surjective():
            raise DiagramError("d is not surjective")

    @property
    def C(self):
        return self.c.src

    @property
    def A(self):
        return self.c.dst

    @property
    def D(self):
        return self.d.src

    @property
    def B(self):
        return self.d.dst

    def morphisms(self) -> dict[str, Mor]:
        return {k: getattr(self, k) for k in SQUARE_ROLES}

    def objects(self) -> dict[str, Any]:
        return {"C": self.C, "A": self.A, "D": self.D, "B": self.B}


def comparison_to_pullback(b, sq: SquareDiagram) -> tuple[Mor, tuple[Any, Mor, Mor]]:
    """The pairing ``<g, c>: C -> D x_B A`` together with the pullback."""
    P, p_d, p_a = pullback(b, sq.f, sq.d)
    m = pair_into((p_d, p_a), sq.g, sq.c)
    assert m is not None  # f.c = d.g
    return m, (P, p_d, p_a)


def is_regular_pushout(b, sq: SquareDiagram) -> bool:
    m, _ = comparison_to_pullback(b, sq)
    return m.is_surjective()


def regular_pushout_relational(b, sq: SquareDiagram) -> bool:
    """``c g° = f° d`` as relations from D to A."""
    lhs = compose(opposite(graph(sq.g.fn)), graph(sq.c.fn))
    rhs = compose(graph(sq.d.fn), opposite(graph(sq.f.fn)))
    return lhs == rhs


# ---------------------------------------------------------------------- cubes

CUBE_ROLES = {
    **SQUARE_ROLES,
    "w": ("W", "Y"),
    "delta": ("W", "D"),
    "beta": ("Y", "B"),
    "k": ("V", "W"),
    "gamma": ("V", "C"),
    "h": ("X", "Y"),
    "alpha": ("X", "A"),
    "j": ("W", "V"),
    "i": ("Y", "X"),
    "v": ("V", "X"),
}

CUBE_INPUTS = ("c", "g", "d", "f", "s", "t", "w", "delta", "beta")


@dataclass(frozen=True)
class CubeDiagram:
    """Front square plus ``w: W ->> Y``, ``delta: W -> D``, ``beta: Y -> B``.

    ``V = W x_D C`` (legs ``k``, ``gamma``) and ``X = Y x_B A`` (legs ``h``,
    ``alpha``) are computed by :func:`make_cube`, along with the induced
    sections ``j``, ``i`` and the comparison ``v``.
    """

    front: SquareDiagram
    w: Mor
    delta: Mor
    beta: Mor
    k: Mor
    gamma: Mor
    h: Mor
    alpha: Mor
    j: Mor
    i: Mor
    v: Mor

    ROLES = CUBE_ROLES

    def __post_init__(self):
        sq = self.front
        _check_roles(CUBE_ROLES, self.morphisms())
        if self.w.then(self.beta).fn != self.delta.then(sq.d).fn:
            raise DiagramError("beta.w != d.delta")
        if not self.w.is_surjective():
            raise DiagramError("w is not surjective")
        if not is_pullback_square((self.k, self.gamma), (self.delta, sq.g)):
            raise DiagramError("(V, k, gamma) is not a pullback of g along delta")
        if not is_pullback_square((self.h, self.alpha), (self.beta, sq.f)):
            raise DiagramError("(X, h, alpha) is not a pullback of f along beta")
        bad = _commutes(
            ((self.v, self.h), (self.k, self.w)),
            ((self.v, self.alpha), (self.gamma, sq.c)),
        )
        if bad:
            raise DiagramError("comparison v does not commute with the pullback legs")
        if self.j.then(self.k).fn != FunctionArrow.identity(self.w.fn.src):
            raise DiagramError("j is not a section of k")
        if self.i.then(self.h).fn != FunctionArrow.identity(self.w.fn.dst):
            raise DiagramError("i is not a section of h")

    @property
    def V(self):
        return self.k.src

    @property
    def X(self):
        return self.h.src

    @property
    def W(self):
        return self.w.src

    @property
    def Y(self):
        return self.w.dst

    def morphisms(self) -> dict[str, Mor]:
        out = self.front.morphisms()
        out.update({k: getattr(self, k) for k in ("w", "delta", "beta", "k", "gamma", "h", "alpha", "j", "i", "v")})
        return out

    def objects(self) -> dict[str, Any]:
        out = self.front.objects()
        out.update({"W": self.W, "Y": self.Y, "V": self.V, "X": self.X})
        return out


def make_cube(b, front: SquareDiagram, w: Mor, delta: Mor, beta: Mor) -> CubeDiagram:
    if w.then(beta).fn != delta.then(front.d).fn:
        raise DiagramError("beta.w != d.delta")
    if delta.fn.dst != front.g.fn.dst or beta.fn.dst != front.f.fn.dst:
        raise DiagramError("delta/beta do not land in D/B")
    V, k, gamma = pullback(b, front.g, delta)
    X, h, alpha = pullback(b, front.f, beta)
    j = pair_into((k, gamma), b.identity(w.src), delta.then(front.t))
    i = pair_into((h, alpha), b.identity(w.dst), beta.then(front.s))
    v = pair_into((h, alpha), k.then(w), gamma.then(front.c))
    if v is None:
        raise DiagramError("comparison does not land in Y x_B A")
    return CubeDiagram(front, w, delta, beta, k, gamma, h, alpha, j, i, v)


def degenerate_cube(b, sq: SquareDiagram) -> CubeDiagram:
    """The cube with back face ``D = D -> B`` (w = delta = 1_D, beta = d).

    Its comparison is ``<g, c>`` up to the iso ``D x_D C = C``.
    """
    one = b.identity(sq.D)
    return make_cube(b, sq, one, one, sq.d)


def cube_comparison(b, cube: CubeDiagram) -> tuple[Mor, bool]:
    return cube.v, cube.v.is_surjective()


# -------------------------------------------------------------------- cuboids

CUBOID_ROLES = {
    "s1": ("S", "D"), "s2": ("S", "D"), "d": ("D", "B"),
    "c1": ("R_c", "C"), "c2": ("R_c", "C"), "c": ("C", "A"),
    "w1": ("R_w", "W"), "w2": ("R_w", "W"), "w": ("W", "Y"),
    "t1": ("T", "V"), "t2": ("T", "V"), "v": ("V", "X"),
    "gbar": ("R_c", "S"), "g": ("C", "D"), "f": ("A", "B"),
    "deltabar": ("R_w", "S"), "delta": ("W", "D"), "beta": ("Y", "B"),
    "kbar": ("T", "R_w"), "k": ("V", "W"), "h": ("X", "Y"),
    "gammabar": ("T", "R_c"), "gamma": ("V", "C"), "alpha": ("X", "A"),
    "tbar": ("S", "R_c"), "t": ("D", "C"), "s": ("B", "A"),
    "jbar": ("R_w", "T"), "j": ("W", "V"), "i": ("Y", "X"),
}
CUBOID_SECTIONS = ("tbar", "t", "s", "jbar", "j", "i")


@dataclass(frozen=True)
class CuboidDiagram:
    """Four horizontal forks joined by three diamonds::

        T  => V  -> X        (upper row, t1 t2 v)
        R_w => W ->> Y       (w1 w2 w)
        R_c => C ->> A       (c1 c2 c)
        S  => D  -> B        (lower row, s1 s2 d)

    with diamonds T over (R_w, R_c) above S, V over (W, C) above D and X over
    (Y, A) above B.  The split variant carries the sections ``tbar, t, s,
    jbar, j, i``; the regular variant leaves them as None.
    """

    s1: Mor
    s2: Mor
    d: Mor
    c1: Mor
    c2: Mor
    c: Mor
    w1: Mor
    w2: Mor
    w: Mor
    t1: Mor
    t2: Mor
    v: Mor
    gbar: Mor
    g: Mor
    f: Mor
    deltabar: Mor
    delta: Mor
    beta: Mor
    kbar: Mor
    k: Mor
    h: Mor
    gammabar: Mor
    gamma: Mor
    alpha: Mor
    tbar: Mor | None = None
    t: Mor | None = None
    s: Mor | None = None
    jbar: Mor | None = None
    j: Mor | None = None
    i: Mor | None = None

    ROLES = CUBOID_ROLES

    @property
    def split(self) -> bool:
        return self.t is not None

    def __post_init__(self):
        secs = [getattr(self, n) for n in CUBOID_SECTIONS]
        if any(m is None for m in secs) and any(m is not None for m in secs):
            raise DiagramError("either all six sections are given or none")
        _check_roles(CUBOID_ROLES, {k: m for k, m in self.morphisms().items()})
        eqs = [
            ("s1.gbar = g.c1", (self.gbar, self.s1), (self.c1, self.g)),
            ("s2.gbar = g.c2", (self.gbar, self.s2), (self.c2, self.g)),
            ("s1.deltabar = delta.w1", (self.deltabar, self.s1), (self.w1, self.delta)),
            ("s2.deltabar = delta.w2", (self.deltabar, self.s2), (self.w2, self.delta)),
            ("k.t1 = w1.kbar", (self.t1, self.k), (self.kbar, self.w1)),
            ("k.t2 = w2.kbar", (self.t2, self.k), (self.kbar, self.w2)),
            ("gamma.t1 = c1.gammabar", (self.t1, self.gamma), (self.gammabar, self.c1)),
            ("gamma.t2 = c2.gammabar", (self.t2, self.gamma), (self.gammabar, self.c2)),
            ("gbar.gammabar = deltabar.kbar", (self.gammabar, self.gbar), (self.kbar, self.deltabar)),
            ("g.gamma = delta.k", (self.gamma, self.g), (self.k, self.delta)),
            ("f.alpha = beta.h", (self.alpha, self.f), (self.h, self.beta)),
            ("h.v = w.k", (self.v, self.h), (self.k, self.w)),
            ("alpha.v = c.gamma", (self.v, self.alpha), (self.gamma, self.c)),
            ("f.c = d.g", (self.c, self.f), (self.g, self.d)),
            ("beta.w = d.delta", (self.w, self.beta), (self.delta, self.d)),
        ]
        if self.split:
            eqs += [
                ("c1.tbar = t.s1", (self.tbar, self.c1), (self.s1, self.t)),
                ("c2.tbar = t.s2", (self.tbar, self.c2), (self.s2, self.t)),
                ("gammabar.jbar = tbar.deltabar", (self.jbar, self.gammabar), (self.deltabar, self.tbar)),
                ("t1.jbar = j.w1", (self.jbar, self.t1), (self.w1, self.j)),
                ("t2.jbar = j.w2", (self.jbar, self.t2), (self.w2, self.j)),
                ("gamma.j = t.delta", (self.j, self.gamma), (self.delta, self.t)),
                ("alpha.i = s.beta", (self.i, self.alpha), (self.beta, self.s)),
                ("v.j = i.w", (self.j, self.v), (self.w, self.i)),
                ("c.t = s.d", (self.t, self.c), (self.d, self.s)),
            ]
        for label, left, right in eqs:
            if _commutes((left, right)):
                raise DiagramError(f"diagram does not commute: {label}")
        if self.split:
            for sec, ret, label in (
                (self.tbar, self.gbar, "gbar.tbar"), (self.t, self.g, "g.t"), (self.s, self.f, "f.s"),
                (self.jbar, self.kbar, "kbar.jbar"), (self.j, self.k, "k.j"), (self.i, self.h, "h.i"),
            ):
                if sec.then(ret).fn != FunctionArrow.identity(ret.fn.dst):
                    raise DiagramError(f"{label} is not an identity")
        else:
            for name in ("gbar", "g", "f", "kbar", "k", "h"):
                if not getattr(self, name).is_surjective():
                    raise DiagramError(f"diamond leg {name} is not surjective")

    def morphisms(self) -> dict[str, Mor]:
        out = {}
        for fld in fields(self):
            m = getattr(self, fld.name)
            if m is not None:
                out[fld.name] = m
        return out

    def objects(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name, m in self.morphisms().items():
            src, dst = CUBOID_ROLES[name]
            out.setdefault(src, m.src)
            out.setdefault(dst, m.dst)
        order = ["S", "D", "B", "R_c", "C", "A", "R_w", "W", "Y", "T", "V", "X"]
        return {k: out[k] for k in order}


@dataclass(frozen=True)
class CuboidReport:
    lower_exact: bool
    upper_exact: bool
    middle_rows_exact: bool
    diamonds_are_pullbacks: bool
    v_surjective: bool
    upper_is_kernel_pair: bool

    @property
    def verdict(self) -> str:
        return "conforms" if (not self.lower_exact or self.upper_exact) else "violates"

    def to_dict(self) -> dict:
        return {
            "lower_exact": self.lower_exact,
            "upper_exact": self.upper_exact,
            "middle_rows_exact": self.middle_rows_exact,
            "diamonds_are_pullbacks": self.diamonds_are_pullbacks,
            "v_surjective": self.v_surjective,
            "upper_is_kernel_pair": self.upper_is_kernel_pair,
            "verdict": self.verdict,
        }


def check_cuboid(b, cub: CuboidDiagram) -> CuboidReport:
    """Exactness of the four rows; raises StructuralError when the cuboid's
    hypotheses (pullback diamonds, exact middle rows) fail."""
    diamonds = (
        is_pullback_square((cub.kbar, cub.gammabar), (cub.deltabar, cub.gbar))
        and is_pullback_square((cub.k, cub.gamma), (cub.delta, cub.g))
        and is_pullback_square((cub.h, cub.alpha), (cub.beta, cub.f))
    )
    middle = _row_exact(cub.c1, cub.c2, cub.c) and _row_exact(cub.w1, cub.w2, cub.w)
    lower = _row_exact(cub.s1, cub.s2, cub.d)
    v_surj = cub.v.is_surjective()
    kp = jointly_injective(cub.t1, cub.t2) and (
        relation_from_function_pair(cub.t1.fn, cub.t2.fn) == kernel_pair(cub.v.fn)
    )
    report = CuboidReport(
        lower_exact=lower,
        upper_exact=v_surj and kp,
        middle_rows_exact=middle,
        diamonds_are_pullbacks=diamonds,
        v_surjective=v_surj,
        upper_is_kernel_pair=kp,
    )
    if not diamonds:
        raise StructuralError("a diamond is not a pullback", report)
    if not middle:
        raise StructuralError("a middle row is not an exact fork", report)
    return report


def _induced(b, src_legs: tuple[Mor, Mor], dst_legs: tuple[Mor, Mor], a: Mor, bb: Mor) -> Mor:
    """Map between tabulated relations induced by ``(x, y) -> (a x, bb y)``."""
    m = pair_into(dst_legs, src_legs[0].then(a), src_legs[1].then(bb))
    if m is None:
        raise DiagramError("induced map does not land in the target relation")
    return m


def build_cuboid(b, front_maps: dict[str, Mor], w: Mor, delta: Mor, beta: Mor,
                 split: bool = True) -> CuboidDiagram:
    """Kernel-pair cuboid over a cube.

    Rows are the tabulated kernel pairs of ``d``, ``c`` and ``w``; the back
    diamond ``T`` is the pullback of ``gbar: R_c -> R_d`` and
    ``deltabar: R_w -> R_d``.  With ``split=False`` the sections are dropped
    and the regular variant is produced (``front_maps`` then only needs
    ``c, g, d, f``).
    """
    c, g, d, f = (front_maps[k] for k in ("c", "g", "d", "f"))
    S, s1, s2 = kernel_pair_object(b, d)
    Rc, c1, c2 = kernel_pair_object(b, c)
    Rw, w1, w2 = kernel_pair_object(b, w)
    gbar = _induced(b, (c1, c2), (s1, s2), g, g)
    deltabar = _induced(b, (w1, w2), (s1, s2), delta, delta)
    T, kbar, gammabar = pullback(b, gbar, deltabar)
    V, k, gamma = pullback(b, g, delta)
    X, h, alpha = pullback(b, f, beta)
    v = pair_into((h, alpha), k.then(w), gamma.then(c))
    t1 = pair_into((k, gamma), kbar.then(w1), gammabar.then(c1))
    t2 = pair_into((k, gamma), kbar.then(w2), gammabar.then(c2))
    if v is None or t1 is None or t2 is None:
        raise DiagramError("cube does not commute")
    secs: dict[str, Mor | None] = dict.fromkeys(CUBOID_SECTIONS)
    if split:
        t, s = front_maps["t"], front_maps["s"]
        tbar = _induced(b, (s1, s2), (c1, c2), t, t)
        jbar = pair_into((kbar, gammabar), b.identity(Rw), deltabar.then(tbar))
        j = pair_into((k, gamma), b.identity(w.src), delta.then(t))
        i = pair_into((h, alpha), b.identity(w.dst), beta.then(s))
        secs = dict(tbar=tbar, t=t, s=s, jbar=jbar, j=j, i=i)
    return CuboidDiagram(
        s1=s1, s2=s2, d=d, c1=c1, c2=c2, c=c, w1=w1, w2=w2, w=w, t1=t1, t2=t2, v=v,
        gbar=gbar, g=g, f=f, deltabar=deltabar, delta=delta, beta=beta,
        kbar=kbar, k=k, h=h, gammabar=gammabar, gamma=gamma, alpha=alpha, **secs,
    )


def build_split_cuboid(b, cube: CubeDiagram) -> CuboidDiagram:
    return build_cuboid(b, cube.front.morphisms(), cube.w, cube.delta, cube.beta, split=True)


# ------------------------------------------------------------- shape tables

SHAPES = {
    "fork": Fork,
    "square": SquareDiagram,
    "cube": CubeDiagram,
    "cuboid": CuboidDiagram,
}


def shape_of(diagram) -> str:
    for name, cls in SHAPES.items():
        if isinstance(diagram, cls):
            return name
    raise TypeError(f"not a diagram: {diagram!r}")


def diagram_objects(diagram) -> dict[str, Any]:
    if isinstance(diagram, Fork):
        return {"R": diagram.r1.src, "A": diagram.f.src, "B": diagram.f.dst}
    return diagram.objects()


def diagram_roles(diagram) -> dict[str, tuple[str, str]]:
    return type(diagram).ROLES
