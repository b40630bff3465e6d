"""Rotated-basis eigenvalue trajectories for one parity block, plus the plateaus nearest the tabulated levels.

    python scripts/theta_trajectories.py --N 80 --parity 0 --out traj.csv
"""
import argparse
import sys

from gausswell.model import PotentialParams
from gausswell.records import RR_SCAN_COLUMNS, decimal_string, reference_table, write_csv
from gausswell.rrcr import theta_scan


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--J", default="0.8")
    ap.add_argument("--lam", default="0.1")
    ap.add_argument("--N", type=int, default=80)
    ap.add_argument("--parity", type=int, choices=[0, 1], default=0)
    ap.add_argument("--theta-min", type=float, default=0.3)
    ap.add_argument("--theta-max", type=float, default=1.2)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--out", default="trajectories.csv")
    args = ap.parse_args()
    params = PotentialParams(args.J, args.lam)
    traj = theta_scan(params, args.N, args.theta_min, args.theta_max, args.step, parity=args.parity)
    rows = [{"theta": decimal_string(float(th)), "path_id": k, "Re_E": decimal_string(float(E.real)),
             "Im_E": decimal_string(float(E.imag)),
             "stability": "" if st != st else decimal_string(float(st))}
            for k in range(traj.paths.shape[0])
            for th, E, st in zip(traj.thetas, traj.paths[k], traj.stability[k])]
    with open(args.out, "w") as fh:
        write_csv(rows, RR_SCAN_COLUMNS, fh)
    # many plateaus are basis artifacts; report the ones nearest the tabulated levels
    for table, below in ((1, True), (2, False)):
        for ref in reference_table(table)[1:]:
            if ref.n % 2 != args.parity:
                continue
            p = traj.nearest_plateau(ref.E, below_critical=below)
            if p is not None:
                print(f"table {table} n={ref.n:2d} theta*={p.theta_star:.3f} "
                      f"E={p.E.real:.10f}{p.E.imag:+.10f}i |dE|={abs(p.E - ref.E):.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
