"""Write the shipped algebra fixtures to src/permutex/data/algebras/."""
import itertools
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "permutex" / "data" / "algebras"


def group(name, n, mul, inv, one):
    return {
        "name": name,
        "carrier": n,
        "ops": [
            {"name": "mul", "arity": 2, "table": [mul(x, y) for x in range(n) for y in range(n)]},
            {"name": "inv", "arity": 1, "table": [inv(x) for x in range(n)]},
            {"name": "one", "arity": 0, "table": [one]},
        ],
    }


def cyclic(n):
    return group(f"z{n}", n, lambda x, y: (x + y) % n, lambda x: (-x) % n, 0)


def klein():
    return group("v4", 4, lambda x, y: x ^ y, lambda x: x, 0)


def s3():
    perms = sorted(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}

    def mul(x, y):  # (x*y)(k) = x(y(k))
        p, q = perms[x], perms[y]
        return idx[tuple(p[q[k]] for k in range(3))]

    def inv(x):
        p = perms[x]
        q = [0] * 3
        for k in range(3):
            q[p[k]] = k
        return idx[tuple(q)]

    return group("s3", 6, mul, inv, idx[(0, 1, 2)])


def chain(n):
    return {
        "name": f"chain{n}_semilattice",
        "carrier": n,
        "ops": [{"name": "meet", "arity": 2, "table": [min(x, y) for x in range(n) for y in range(n)]}],
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    algebras = {
        "z2": cyclic(2),
        "z4": cyclic(4),
        "z6": cyclic(6),
        "v4": klein(),
        "s3": s3(),
        "chain3_semilattice": chain(3),
        "chain4_semilattice": chain(4),
        "trivial1": {"name": "trivial1", "carrier": 1, "ops": [
            {"name": "mul", "arity": 2, "table": [0]},
            {"name": "inv", "arity": 1, "table": [0]},
            {"name": "one", "arity": 0, "table": [0]},
        ]},
    }
    for name, data in algebras.items():
        (OUT / f"{name}.alg").write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
        print("wrote", name)


if __name__ == "__main__":
    main()
