"""Run the headline sweeps and write one JSON report per configuration.

    python scripts/run_sweeps.py --out results/ [--workers N] [--quick]

Prints a summary table; reports are byte-identical across reruns.
"""
import argparse
from dataclasses import dataclass
from pathlib import Path

from permutex import fixtures, search
from permutex.diagrams import AlgebraBackend, SetBackend
from permutex.search import SearchBounds


@dataclass(frozen=True)
class Experiment:
    name: str
    backend: str  # "set" or "groups"
    shape: str
    bounds: SearchBounds
    first_hit: bool = False


EXPERIMENTS = [
    Experiment("set_squares_3", "set", "square", SearchBounds(max_carrier=3)),
    Experiment("set_cubes_3", "set", "cube", SearchBounds(max_carrier=3)),
    Experiment("set_cuboid_hit_4", "set", "cuboid", SearchBounds(max_carrier=4), first_hit=True),
    Experiment("group_squares_6", "groups", "square", SearchBounds(max_carrier=6)),
    Experiment("group_cubes_6", "groups", "cube", SearchBounds(max_carrier=6, allow_large=True)),
    Experiment("group_cuboids_random", "groups", "cuboid",
               SearchBounds(max_carrier=6, mode="random", max_cases=1000)),
]

QUICK = {"set_cubes_3": SearchBounds(max_carrier=2), "group_cubes_6": SearchBounds(max_carrier=4)}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--quick", action="store_true", help="smaller bounds for the two slowest sweeps")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    groups = AlgebraBackend.from_fixtures([fixtures.algebra(n) for n in ("z4", "v4", "s3")])
    print(f"{'experiment':24} {'cases':>8} {'violations':>10} {'verdict':>22} {'seconds':>8}")
    for ex in EXPERIMENTS:
        bounds = QUICK.get(ex.name, ex.bounds) if args.quick else ex.bounds
        b = SetBackend() if ex.backend == "set" else groups
        rep = search.sweep(b, ex.shape, bounds, first_hit=ex.first_hit, workers=args.workers, max_violations=5)
        (out / f"{ex.name}.json").write_text(rep.dumps(), encoding="utf-8")
        count = rep.to_dict()["violation_count"]
        print(f"{ex.name:24} {rep.cases_checked:>8} {count:>10} {rep.verdict:>22} {rep.elapsed:>8.2f}")


if __name__ == "__main__":
    main()
