"""Write the shipped derivation scripts and diagram files under src/permutex/data/."""
from pathlib import Path

from permutex import diagfile, fixtures
from permutex.diagrams import (
    AlgebraBackend,
    Fork,
    Mor,
    SetBackend,
    SquareDiagram,
    build_split_cuboid,
    degenerate_cube,
    make_cube,
    tabulate,
)
from permutex.relcore import Carrier, FunctionArrow, kernel_pair
from permutex.relexpr import ArrowRef, Opposite, comp, render

DATA = Path(__file__).resolve().parents[1] / "src" / "permutex" / "data"

c, g, d, f, w, delta, beta = (ArrowRef(n) for n in ("c", "g", "d", "f", "w", "delta", "beta"))


def op(x):
    return Opposite(x)


# Arguments of comp are in application order: comp(d, op(f)) is f°d.
PO_CHAIN = [
    (comp(d, op(f)), "start: f°d"),
    (comp(d, op(f), op(c), c), "c c° = 1 since c is surjective"),
    (comp(d, op(d), op(g), c), "c° f° = (f c)° = (d g)° = g° d°"),
    (comp(op(g), c, op(c), g, op(g), c), "d° d = R_d = g R_c g°, image of R_c along g"),
    (comp(op(g), g, op(g), c, op(c), c), "R_g R_c = R_c R_g (permutation step)"),
    (comp(op(g), c), "c c° c = c and g g° = 1"),
]

CUBOID_CHAIN = [
    (comp(beta, op(f)), "start: f°beta"),
    (comp(op(w), w, beta, op(f), op(c), c), "c c° = 1 and w w° = 1"),
    (comp(op(w), delta, d, op(d), op(g), c), "c° f° = g° d° and beta w = d delta"),
    (comp(op(w), delta, op(g), c, op(c), g, op(g), c), "d° d = g R_c g°"),
    (comp(op(w), delta, op(g), g, op(g), c, op(c), c), "R_g R_c = R_c R_g (permutation step)"),
    (comp(op(w), delta, op(g), c), "c c° c = c and g g° = 1"),
]


def write_chain(name, header, chain):
    lines = [f"# {line}" for line in header] + [f"{render(e)}  ; {note}" for e, note in chain]
    (DATA / "derivations" / f"{name}.deriv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def mor(src, dst, table, b):
    return Mor(src, dst, FunctionArrow(b.carrier(src), b.carrier(dst), tuple(table)))


def counterexample_square(b):
    C, A, D, B = Carrier(3), Carrier(2), Carrier(2), Carrier(1)
    return SquareDiagram(
        c=mor(C, A, [0, 0, 1], b), g=mor(C, D, [0, 1, 1], b), d=mor(D, B, [0, 0], b),
        f=mor(A, B, [0, 0], b), s=mor(B, A, [0], b), t=mor(D, C, [0, 1], b))


def pullback_square(b):
    # C = D x A listed as (y, a) -> 2y + a
    C, A, D, B = Carrier(4), Carrier(2), Carrier(2), Carrier(1)
    return SquareDiagram(
        c=mor(C, A, [0, 1, 0, 1], b), g=mor(C, D, [0, 0, 1, 1], b), d=mor(D, B, [0, 0], b),
        f=mor(A, B, [0, 0], b), s=mor(B, A, [0], b), t=mor(D, C, [0, 2], b))


def main():
    (DATA / "derivations").mkdir(parents=True, exist_ok=True)
    (DATA / "diagrams").mkdir(parents=True, exist_ok=True)
    write_chain("prop_maltsev_po", [
        "A split square is a regular pushout when kernel pairs permute:",
        "f°d = c g°.  Needs a square environment (c, g, d, f).",
    ], PO_CHAIN)
    write_chain("thm_upper_cuboid", [
        "Comparison of the back face of a cube: f°beta = c g° delta w°.",
        "Needs a cube environment (c, g, d, f, w, delta, beta).",
    ], CUBOID_CHAIN)

    sb = SetBackend()
    sq = counterexample_square(sb)
    diagfile.save(DATA / "diagrams" / "counterexample_square.diag", sb, sq)
    diagfile.save(DATA / "diagrams" / "pullback_square.diag", sb, pullback_square(sb))
    cube = degenerate_cube(sb, sq)
    diagfile.save(DATA / "diagrams" / "counterexample_cube.diag", sb, cube)
    diagfile.save(DATA / "diagrams" / "counterexample_cuboid.diag", sb, build_split_cuboid(sb, cube))

    A3 = Carrier(3)
    fn = FunctionArrow(A3, Carrier(2), (0, 1, 1))
    tab = tabulate(kernel_pair(fn))
    R = tab.carrier
    fork = Fork(r1=mor(R, A3, tab.p1.table, sb), r2=mor(R, A3, tab.p2.table, sb), f=mor(A3, Carrier(2), fn.table, sb))
    diagfile.save(DATA / "diagrams" / "exact_fork.diag", sb, fork)

    # v4 = z2 x z2 with x = 2 * high + low
    v4, z2, one, z4 = (fixtures.algebra(n) for n in ("v4", "z2", "trivial1", "z4"))
    gb = AlgebraBackend([one, z2, v4, z4], label="groups")
    gsq = SquareDiagram(
        c=mor(v4, z2, [0, 1, 0, 1], gb), g=mor(v4, z2, [0, 0, 1, 1], gb),
        d=mor(z2, one, [0, 0], gb), f=mor(z2, one, [0, 0], gb),
        s=mor(one, z2, [0], gb), t=mor(z2, v4, [0, 2], gb))
    diagfile.save(DATA / "diagrams" / "group_square.diag", gb, gsq)
    gcube = make_cube(gb, gsq, mor(z4, z2, [0, 1, 0, 1], gb), mor(z4, z2, [0, 1, 0, 1], gb), mor(z2, one, [0, 0], gb))
    diagfile.save(DATA / "diagrams" / "group_cube.diag", gb, gcube)

    # Z4 -> Z2 -> 1 on the front, the same quotient at the back
    front = SquareDiagram(
        c=mor(z4, z2, [0, 1, 0, 1], gb), g=mor(z4, one, [0, 0, 0, 0], gb),
        d=mor(one, one, [0], gb), f=mor(z2, one, [0, 0], gb),
        s=mor(one, z2, [0], gb), t=mor(one, z4, [0], gb))
    cube2 = make_cube(gb, front, mor(z4, z2, [0, 1, 0, 1], gb), mor(z4, one, [0, 0, 0, 0], gb), mor(z2, one, [0, 0], gb))
    diagfile.save(DATA / "diagrams" / "group_cuboid.diag", gb, build_split_cuboid(gb, cube2))
    for p in sorted((DATA / "diagrams").iterdir()) + sorted((DATA / "derivations").iterdir()):
        print("wrote", p.name)


if __name__ == "__main__":
    main()
