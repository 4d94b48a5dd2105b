"""Max |L| per subdiagonal of the N=128 factor, for a few epsilons, as CSV.

    python scripts/diagonal_profile.py --n 128 --out results/profile
"""

import argparse
from pathlib import Path

from cholfill.analyzer import diagonal_profile, profile_csv
from cholfill.assembly import assemble
from cholfill.cholesky import REALMIN, factor
from cholfill.mesh import get_problem, uniform_mesh


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--eps", default="1,1e-6")
    ap.add_argument("--out", type=Path, default=Path("results/profile"))
    args = ap.parse_args()

    mesh = uniform_mesh(args.n)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    for eps in (float(e) for e in args.eps.split(",")):
        A, _ = assemble(mesh, mesh, get_problem("ones", eps))
        L, _ = factor(A, overwrite=True)
        prof = diagonal_profile(L)
        path = Path(f"{args.out}_N{args.n}_eps{eps:g}.csv")
        path.write_text(profile_csv(prof))
        print(f"eps={eps:g}: first below realmin at {prof.first_below(REALMIN)}, absent {prof.absent_runs()} -> {path}")


if __name__ == "__main__":
    main()
