"""Expressions over named arrows, their evaluation, and chain replay.

Grammar (one expression per script line)::

    expr := NAME | "op(" expr ")" | "id(" NAME ")" | "comp(" expr "," expr ")"

``comp(a, b)`` means "first ``a`` then ``b``", i.e. ``b a`` in juxtaposition
notation.  A chain line may carry a justification after ``;``.  Lines whose
first non-blank character is ``#`` are comments.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

from .relcore import (
    Carrier,
    DimensionError,
    FunctionArrow,
    PermutexError,
    Relation,
    compose,
    graph,
    opposite,
)


class ExprError(PermutexError, ValueError):
    pass


class UnresolvedName(ExprError, KeyError):
    def __str__(self):
        return self.args[0]


class ParseError(ExprError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        super().__init__(msg)
        self.line = line
        self.col = col

    def __str__(self):
        where = ""
        if self.line is not None:
            where = f"line {self.line}" + (f", column {self.col}" if self.col is not None else "") + ": "
        return where + self.args[0]


@dataclass(frozen=True)
class ArrowRef:
    name: str


@dataclass(frozen=True)
class Opposite:
    child: "RelExpr"


@dataclass(frozen=True)
class Compose:
    first: "RelExpr"
    second: "RelExpr"


@dataclass(frozen=True)
class Identity:
    carrier: str


RelExpr = Union[ArrowRef, Opposite, Compose, Identity]


def comp(*parts: RelExpr) -> RelExpr:
    """Diagrammatic chain ``comp(a, b, c)`` = first a, then b, then c."""
    out = parts[0]
    for p in parts[1:]:
        out = Compose(out, p)
    return out


def render(e: RelExpr) -> str:
    """Script syntax."""
    if isinstance(e, ArrowRef):
        return e.name
    if isinstance(e, Identity):
        return f"id({e.carrier})"
    if isinstance(e, Opposite):
        return f"op({render(e.child)})"
    return f"comp({render(e.first)}, {render(e.second)})"


def juxtaposed(e: RelExpr) -> str:
    """Juxtaposition notation, rightmost factor applied first."""
    if isinstance(e, ArrowRef):
        return e.name
    if isinstance(e, Identity):
        return f"1_{e.carrier}"
    if isinstance(e, Opposite):
        inner = juxtaposed(e.child)
        return inner + "°" if isinstance(e.child, (ArrowRef, Identity)) else f"({inner})°"
    return f"{juxtaposed(e.second)} {juxtaposed(e.first)}"


@dataclass
class Environment:
    arrows: dict[str, Union[FunctionArrow, Relation]] = field(default_factory=dict)
    carriers: dict[str, Carrier] = field(default_factory=dict)

    def relation(self, name: str) -> Relation:
        try:
            value = self.arrows[name]
        except KeyError:
            raise UnresolvedName(f"unknown arrow {name!r}") from None
        return graph(value) if isinstance(value, FunctionArrow) else value


class EvalError(ExprError):
    def __init__(self, msg: str, subtree: RelExpr):
        super().__init__(f"{msg} in {render(subtree)}")
        self.subtree = subtree


def evaluate(e: RelExpr, env: Environment) -> Relation:
    if isinstance(e, ArrowRef):
        return env.relation(e.name)
    if isinstance(e, Identity):
        try:
            return Relation.identity(env.carriers[e.carrier])
        except KeyError:
            raise UnresolvedName(f"unknown carrier {e.carrier!r}") from None
    if isinstance(e, Opposite):
        return opposite(evaluate(e.child, env))
    if isinstance(e, Compose):
        left = evaluate(e.first, env)
        right = evaluate(e.second, env)
        try:
            return compose(left, right)
        except DimensionError as exc:
            raise EvalError(str(exc), e) from None
    raise TypeError(f"not an expression: {e!r}")


def check_identity(lhs: RelExpr, rhs: RelExpr, env: Environment) -> bool:
    a, b = evaluate(lhs, env), evaluate(rhs, env)
    if a.src != b.src or a.dst != b.dst:
        raise DimensionError(
            f"{render(lhs)} is {a.src.size}x{a.dst.size} but {render(rhs)} is {b.src.size}x{b.dst.size}"
        )
    return a == b


@dataclass(frozen=True)
class Derivation:
    steps: tuple[RelExpr, ...]
    notes: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        if len(self.steps) < 2:
            raise ExprError("a derivation needs at least two expressions")
        if self.notes and len(self.notes) != len(self.steps):
            raise ExprError("one note per step")


@dataclass(frozen=True)
class StepResult:
    index: int  # equality between steps[index] and steps[index + 1]
    lhs: str
    rhs: str
    equal: bool
    first_difference: tuple[int, int] | None
    note: str = ""


@dataclass(frozen=True)
class DerivationReport:
    steps: tuple[StepResult, ...]

    @property
    def verdict(self) -> bool:
        return all(s.equal for s in self.steps)

    @property
    def first_failure(self) -> StepResult | None:
        return next((s for s in self.steps if not s.equal), None)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "steps": [
                {
                    "index": s.index,
                    "lhs": s.lhs,
                    "rhs": s.rhs,
                    "equal": s.equal,
                    "first_difference": list(s.first_difference) if s.first_difference else None,
                }
                for s in self.steps
            ],
        }


class StepError(ExprError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"step {index}: {cause}")
        self.index = index
        self.cause = cause


def check_derivation(d: Derivation, env: Environment) -> DerivationReport:
    values = []
    for i, e in enumerate(d.steps):
        try:
            values.append(evaluate(e, env))
        except PermutexError as exc:
            raise StepError(i, exc) from exc
    results = []
    for i in range(len(values) - 1):
        a, b = values[i], values[i + 1]
        if a.src != b.src or a.dst != b.dst:
            raise StepError(i + 1, DimensionError(
                f"{a.src.size}x{a.dst.size} relation followed by {b.src.size}x{b.dst.size}"))
        diff = a.first_difference(b)
        results.append(StepResult(
            index=i,
            lhs=juxtaposed(d.steps[i]),
            rhs=juxtaposed(d.steps[i + 1]),
            equal=diff is None,
            first_difference=diff,
            note=d.notes[i + 1] if d.notes else "",
        ))
    return DerivationReport(tuple(results))


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),]))")


class _Parser:
    def __init__(self, text: str, line: int | None):
        self.text = text
        self.line = line
        self.pos = 0
        self.last = 0  # start of the most recent token

    def error(self, msg: str, at: int | None = None):
        raise ParseError(msg, self.line, (self.last if at is None else at) + 1)

    def peek(self) -> str | None:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            return None if not self.text[self.pos:].strip() else "?"
        return m.group("name") or m.group("punct")

    def take(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            if self.text[self.pos:].strip():
                at = self.pos + len(self.text[self.pos:]) - len(self.text[self.pos:].lstrip())
                self.error(f"unexpected character {self.text[at]!r}", at)
            self.error("unexpected end of expression", len(self.text.rstrip()))
        self.last = m.start(m.lastgroup)
        self.pos = m.end()
        return m.group("name") or m.group("punct")

    def expect(self, tok: str):
        got = self.take()
        if got != tok:
            self.error(f"expected {tok!r}, found {got!r}")

    def expr(self) -> RelExpr:
        tok = self.take()
        if tok in "(),":
            self.error(f"unexpected {tok!r}")
        if self.peek() != "(":
            return ArrowRef(tok)
        if tok == "op":
            self.expect("(")
            child = self.expr()
            self.expect(")")
            return Opposite(child)
        if tok == "id":
            self.expect("(")
            name = self.take()
            if name in "(),":
                self.error("id() takes an object name")
            self.expect(")")
            return Identity(name)
        if tok == "comp":
            self.expect("(")
            first = self.expr()
            self.expect(",")
            second = self.expr()
            self.expect(")")
            return Compose(first, second)
        self.error(f"unknown operator {tok!r}")

    def parse(self) -> RelExpr:
        e = self.expr()
        rest = self.text[self.pos:]
        if rest.strip():
            self.error(f"trailing input {rest.strip()!r}", self.pos + len(rest) - len(rest.lstrip()))
        return e


def parse_expr(text: str, line: int | None = None) -> RelExpr:
    return _Parser(text, line).parse()


def parse_derivation(text: str, name: str = "") -> Derivation:
    steps, notes = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        expr_text, _, note = raw.partition(";")
        steps.append(parse_expr(expr_text, lineno))
        notes.append(note.strip())
    try:
        return Derivation(tuple(steps), tuple(notes), name)
    except ExprError as exc:
        raise ParseError(str(exc)) from None


def load_derivation(path: str | Path) -> Derivation:
    path = Path(path)
    return parse_derivation(path.read_text(encoding="utf-8"), name=path.stem)


def format_derivation(d: Derivation) -> str:
    lines = []
    for i, e in enumerate(d.steps):
        note = d.notes[i] if d.notes else ""
        lines.append(render(e) + (f"  ; {note}" if note else ""))
    return "\n".join(lines) + "\n"


def environment(arrows: Mapping[str, Union[FunctionArrow, Relation]],
                carriers: Mapping[str, Carrier] | None = None) -> Environment:
    return Environment(dict(arrows), dict(carriers or {}))
