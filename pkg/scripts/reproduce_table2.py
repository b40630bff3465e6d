"""Type-b table by Hankel quantization; writes CSV and prints agreement per row.

    python scripts/reproduce_table2.py --rows 0-10 --out table2.csv
"""
import argparse
import sys

from gausswell import drivers
from gausswell.records import RPM_TABLE_COLUMNS, write_csv


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", default="0-40")
    ap.add_argument("--out", default="table2.csv")
    args = ap.parse_args()
    lo, _, hi = args.rows.partition("-")
    rows = range(int(lo), int(hi or lo) + 1)

    def show(r):
        m_re, m_im = r.matched()
        print(f"n={r.n:2d} D={r.D_final} {r.status:10s} decimals re {m_re:2d} im {m_im:2d}  {r.seconds:6.1f}s",
              flush=True)

    result = drivers.table2(rows=rows, progress=show)
    with open(args.out, "w") as fh:
        write_csv([r.csv_row() for r in result], RPM_TABLE_COLUMNS, fh)
    print(f"total {sum(r.seconds for r in result) / 60:.1f} min -> {args.out}")
    return 0 if all(r.status == "converged" for r in result) else 2


if __name__ == "__main__":
    sys.exit(main())
