"""Access to the algebra, derivation and diagram files shipped in ``data/``."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .algcore import FiniteAlgebra, load_algebra

DATA = Path(str(resources.files("permutex") / "data"))

GROUPS = ("z2", "z4", "v4", "s3", "z6")
ALGEBRAS = GROUPS + ("chain3_semilattice", "chain4_semilattice", "trivial1")


def algebra_path(name: str) -> Path:
    return DATA / "algebras" / f"{name}.alg"


def algebra(name: str) -> FiniteAlgebra:
    return load_algebra(algebra_path(name))


def resolve(kind: str, arg: str) -> Path:
    """A path as given, or else the shipped file of that name."""
    p = Path(arg)
    if p.exists():
        return p
    suffix = {"algebras": ".alg", "derivations": ".deriv", "diagrams": ".diag"}[kind]
    candidate = DATA / kind / (p.name if p.suffix else p.name + suffix)
    if candidate.exists():
        return candidate
    raise FileNotFoundError(arg)


def derivation_path(name: str) -> Path:
    return DATA / "derivations" / f"{name}.deriv"


def diagram_path(name: str) -> Path:
    return DATA / "diagrams" / f"{name}.diag"
