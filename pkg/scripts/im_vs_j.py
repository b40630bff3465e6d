"""Signed Im E of a type-b plateau as J varies (the sign flip marks where it turns physical).

    python scripts/im_vs_j.py --index 0 --out im_vs_j.csv
"""
import argparse
import sys

from gausswell import drivers
from gausswell.records import FIG_COLUMNS, decimal_string, write_csv


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--lam", default="0.1")
    ap.add_argument("--index", type=int, default=0)
    ap.add_argument("--N", type=int, default=80)
    ap.add_argument("--out", default="im_vs_j.csv")
    args = ap.parse_args()
    grid = [f"{0.6 + 0.05 * k:.2f}" for k in range(17)]
    pts = drivers.im_vs_j(args.lam, grid, args.index, args.N)
    rows = [{"J": J, "Re_E": decimal_string(p.E.real) if p.E is not None else "",
             "Im_E": decimal_string(p.E.imag) if p.E is not None else "", "status": p.status}
            for J, p in zip(grid, pts)]
    with open(args.out, "w") as fh:
        write_csv(rows, FIG_COLUMNS, fh)
    for r in rows:
        print(r["J"], r["Im_E"], r["status"])
    print("sign changes:", drivers.sign_changes([p.E.imag for p in pts if p.E is not None]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
