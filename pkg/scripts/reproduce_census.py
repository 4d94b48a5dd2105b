"""Factor the N=512 system for the six epsilons of the census table (uniform or Shishkin).

Each run needs about 1.1 GB and takes on the order of a minute.  Writes a text
table to stdout and JSON next to --out.

    python scripts/reproduce_census.py --mesh uniform --out results/census
"""

import argparse
import json
from pathlib import Path

from cholfill.analyzer import emit_report
from cholfill.cholesky import Mode
from cholfill.cli import RunConfig, run_sweep
from cholfill.mesh import MeshKind

EPSILONS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--mesh", default="uniform", choices=["uniform", "shishkin"])
    ap.add_argument("--mode", default="ieee", choices=["ieee", "ftz"])
    ap.add_argument("--eps", default=",".join(map(str, EPSILONS)))
    ap.add_argument("--out", type=Path, default=Path("results/census"))
    args = ap.parse_args()

    cfg = RunConfig(
        "sweep",
        N=args.n,
        epsilons=tuple(float(e) for e in args.eps.split(",")),
        mesh=MeshKind(args.mesh),
        mode=Mode(args.mode),
        allow_large=True,
    )
    reports, errors = run_sweep(cfg)
    table = emit_report(reports, "table")
    print(table)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    stem = f"{args.out}_{args.mesh}_{args.mode}_N{args.n}"
    Path(stem + ".txt").write_text(table)
    Path(stem + ".json").write_text(json.dumps([r.to_dict() | {"profile": None} for r in reports], indent=2))
    for e, msg in errors:
        print(f"eps={e:g} failed: {msg}")


if __name__ == "__main__":
    main()
