"""Command-line workbench.

    gausswell rpm find --seed 1.0 --tol 1e-15
    gausswell rpm table 2 --format csv --out table2.csv
    gausswell rr scan --theta-min 0.55 --theta-max 0.95 --parity even
    gausswell hf-check --J 2 --seed 3.2037 --parity odd
    gausswell fig-im-vs-j --index 0
    gausswell compare a.json b.json --radius 1e-3

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence (or a
reproduced value outside its tolerance).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from . import drivers, records
from .model import PotentialParams
from .rrcr import MatchingError, classify_poles, theta_scan

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("gausswell")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    params: PotentialParams = field(default_factory=lambda: PotentialParams("0.8", "0.1"))
    digits: int = 120
    s: int | None = None
    d: int = 0
    D_min: int = 2
    D_max: int = 34
    seeds: list = field(default_factory=list)
    tol: float = 1e-20
    N: int = 80
    theta_min: float = 0.55
    theta_max: float = 0.95
    theta_step: float = 0.005
    omega: float = 1.0
    fmt: str = "csv"
    out: str | None = None
    deep: bool = False

    def validate(self) -> None:
        if not self.params.is_valid:
            raise InputError(f"solvers need J > 0 and lambda > 0 (got J={self.params.J}, lambda={self.params.lam})")
        if self.digits < 30:
            raise InputError("--digits must be >= 30")
        if self.s not in (None, 0, 1):
            raise InputError("--parity must be even or odd")
        if self.d < 0 or not 2 <= self.D_min < self.D_max:
            raise InputError("need d >= 0 and 2 <= Dmin < Dmax")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.N < 2:
            raise InputError("--N must be >= 2")
        if not 0 <= self.theta_min <= self.theta_max < math.pi / 2:
            raise InputError("need 0 <= theta-min <= theta-max < pi/2")
        if not self.theta_step > 0:
            raise InputError("--theta-step must be positive")
        if not self.omega > 0:
            raise InputError("--omega must be positive")
        if self.fmt not in ("csv", "json"):
            raise InputError("--format is csv or json")


def _positive_decimal(text: str) -> str:
    try:
        value = Decimal(text)
    except Exception:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}")
    if not value.is_finite() or value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text!r}")
    return text


def parse_seed(text: str) -> complex:
    parts = text.split(",")
    if len(parts) > 2:
        raise argparse.ArgumentTypeError(f"seed is re[,im], got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed is re[,im], got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("seed must be finite")
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def _parity(text: str) -> int:
    table = {"even": 0, "0": 0, "odd": 1, "1": 1}
    if text not in table:
        raise argparse.ArgumentTypeError("parity is even|odd")
    return table[text]


def _common(p: argparse.ArgumentParser, rpm: bool = False, rr: bool = False) -> None:
    p.add_argument("--J", type=_positive_decimal, default="0.8")
    p.add_argument("--lambda", dest="lam", type=_positive_decimal, default="0.1")
    p.add_argument("--parity", type=_parity, default=None)
    p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    if rpm:
        p.add_argument("--digits", type=int, default=120)
        p.add_argument("--Dmax", type=int, default=34)
        p.add_argument("--Dmin", type=int, default=2)
        p.add_argument("--d", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-20)
    if rr:
        p.add_argument("--N", type=int, default=80)
        p.add_argument("--theta-min", type=float, default=0.55)
        p.add_argument("--theta-max", type=float, default=0.95)
        p.add_argument("--theta-step", type=float, default=0.005)
        p.add_argument("--omega", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gausswell", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    rpm = sub.add_parser("rpm", help="Riccati-Pade Hankel quantization")
    rsub = rpm.add_subparsers(dest="action", required=True)
    find = rsub.add_parser("find", help="follow root sequences from seeds")
    _common(find, rpm=True)
    find.add_argument("--seed", type=parse_seed, action="append", required=True)
    find.add_argument("--max-shift", type=float, default=None)
    table = rsub.add_parser("table", help="reproduce the bundled reference tables")
    _common(table, rpm=True, rr=True)
    table.add_argument("table", type=int, choices=[1, 2])
    table.add_argument("--rows", default=None, help="row range a-b (inclusive)")
    table.add_argument("--deep", action="store_true", help="also run RPM type-a sequences (slow)")

    rr = sub.add_parser("rr", help="complex-rotation Rayleigh-Ritz")
    rrsub = rr.add_subparsers(dest="action", required=True)
    scan = rrsub.add_parser("scan", help="eigenvalue trajectories over theta")
    _common(scan, rr=True)
    scan.add_argument("--against", default=None, help="records file; emit log10 distances per theta")

    hf = sub.add_parser("hf-check", help="slope dE/dJ by central differences")
    _common(hf, rpm=True)
    hf.add_argument("--seed", type=parse_seed, required=True, help="bound-state seed")
    hf.add_argument("--resonance-seed", type=parse_seed, default=None, help="type-b partner seed")
    hf.add_argument("--dJ", type=float, default=1e-3)

    fig = sub.add_parser("fig-im-vs-j", help="signed Im E of a type-b plateau versus J")
    _common(fig, rr=True)
    fig.set_defaults(theta_min=0.85, theta_max=0.95)
    fig.add_argument("--J-min", type=float, default=0.6)
    fig.add_argument("--J-max", type=float, default=1.4)
    fig.add_argument("--J-step", type=float, default=0.05)
    fig.add_argument("--index", type=int, default=0)

    cmp_ = sub.add_parser("compare", help="match two record files")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    cmp_.add_argument("--radius", type=float, default=1e-3)
    cmp_.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    cmp_.add_argument("--out", default=None)
    return ap


def config_from(args) -> RunConfig:
    cfg = RunConfig(fmt=args.fmt, out=args.out)
    if hasattr(args, "J"):
        cfg.params = PotentialParams(args.J, args.lam)
        cfg.s = args.parity
    for name, attr in [("digits", "digits"), ("d", "d"), ("Dmin", "D_min"), ("Dmax", "D_max"), ("tol", "tol"),
                       ("N", "N"), ("theta_min", "theta_min"), ("theta_max", "theta_max"),
                       ("theta_step", "theta_step"), ("omega", "omega"), ("deep", "deep")]:
        if hasattr(args, name):
            setattr(cfg, attr, getattr(args, name))
    if getattr(args, "seed", None) is not None:
        cfg.seeds = args.seed if isinstance(args.seed, list) else [args.seed]
    return cfg


def _emit(cfg: RunConfig, csv_rows: list[dict], columns: list[str], payload: dict) -> None:
    if cfg.fmt == "csv":
        text = records.csv_text(csv_rows, columns)
    else:
        text = json.dumps(payload, indent=1) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def _root_label(E, params: PotentialParams) -> str:
    """bound (real, below threshold), companion (negative real root) or resonance."""
    if E.imag != 0:
        return "resonance"
    if E.real < 0:
        return "companion"
    return "bound" if E.real < params.threshold else "resonance"


def cmd_rpm_find(cfg: RunConfig, max_shift: float | None = None) -> int:
    cfg.validate()
    s = cfg.s or 0
    run = drivers.RpmRun(s=s, d=cfg.d, D_min=cfg.D_min, D_max=cfg.D_max, digits=cfg.digits, tol=cfg.tol,
                         restarts=2)
    recs, rows, ok = [], [], True
    for i, seed in enumerate(cfg.seeds):
        seq = drivers.rpm_sequence(cfg.params, run, seed, max_shift=max_shift)
        ok &= seq.status == "converged"
        for D, E, _ in seq.roots:
            re_s, im_s = records.complex_strings(E, cfg.digits)
            rows.append({"seed": i, "D": D, "Re_E": re_s, "Im_E": im_s, "status": seq.status})
        if seq.converged is None:
            log.warning("seed %s: no root found", seed)
            continue
        E = seq.converged
        recs.append(records.make_record(
            _root_label(E, cfg.params), "rpm", E, cfg.digits, s=s, d=cfg.d, J=str(cfg.params.J),
            **{"lambda": str(cfg.params.lam)}, D_final=seq.D_final, err_est=f"{seq.err_estimate:.3e}",
            status=seq.status,
            history=[dict(zip(("D", "Re_E", "Im_E"), (D, *records.complex_strings(z, cfg.digits))))
                     for D, z, _ in seq.roots]))
        log.info("seed %s -> %s (%s, D=%s, err %.2e)", seed, complex(E), seq.status, seq.D_final, seq.err_estimate)
    _emit(cfg, rows, ["seed", "D", "Re_E", "Im_E", "status"], {"schema": records.SCHEMA, "records": recs})
    return EXIT_OK if ok else EXIT_NUMERIC


def _row_range(text: str | None, top: int) -> list[int]:
    if text is None:
        return list(range(top + 1))
    a, _, b = text.partition("-")
    try:
        lo, hi = int(a), int(b or a)
    except ValueError:
        raise InputError(f"--rows expects a-b, got {text!r}")
    if not 0 <= lo <= hi <= top:
        raise InputError(f"rows must lie in 0..{top}")
    return list(range(lo, hi + 1))


def _row_ok(row: drivers.RowResult) -> bool:
    """Tolerance a reproduced row must meet."""
    if row.E is None:
        return False
    if row.method == "rr":
        return row.distance() <= 1e-3
    if row.table == 2 and row.n <= 10:
        return max(row.ulps()) <= 2
    return abs(complex(row.E) - row.ref.E) / abs(row.ref.E) <= 1e-15


def cmd_rpm_table(cfg: RunConfig, table: int, rows_text: str | None) -> int:
    cfg.validate()
    refs = records.reference_table(table)
    rows = _row_range(rows_text, refs[-1].n)

    def report(row):
        m_re, m_im = row.matched()
        log.info("table %d n=%d %s: %s, D=%s, decimals matched re %d im %s (%.1fs)", table, row.n, row.method,
                 row.status, row.D_final, m_re, m_im, row.seconds)

    if table == 2:
        result = drivers.table2(cfg.params, rows, progress=report)
    else:
        result = [r for r in drivers.table1(cfg.params, cfg.N, cfg.deep, cfg.omega, progress=report)
                  if r.n in rows]
    csv_rows, recs, failed = [], [], []
    for row in result:
        r = row.csv_row()
        if row.method != "rpm":
            r["status"] = row.status if row.method == "rpm-deep" else f"rr_{row.status}"
        csv_rows.append(r)
        if row.E is not None:
            m_re, m_im = row.matched()
            recs.append(records.make_record(
                "type_a" if table == 1 and row.n > 0 else ("bound" if table == 1 else "type_b"),
                "rr" if row.method == "rr" else "rpm", row.E, row.digits, n=row.n, D_final=row.D_final,
                status=row.status, matched_re=m_re, matched_im=m_im, theta_star=row.theta_star))
        gated = row.method != "rpm-deep" and not (table == 1 and row.n == 0)
        if gated and not _row_ok(row):
            failed.append(row.n)
    if failed:
        log.warning("rows outside tolerance: %s", failed)
    _emit(cfg, csv_rows, records.RPM_TABLE_COLUMNS, {"schema": records.SCHEMA, "records": recs})
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_rr_scan(cfg: RunConfig, against: str | None) -> int:
    cfg.validate()
    try:
        traj = theta_scan(cfg.params, cfg.N, cfg.theta_min, cfg.theta_max, cfg.theta_step, cfg.omega, cfg.s)
    except MatchingError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    recs = [records.make_record(r.label, "rr", r.E, None, theta_star=r.theta_star, uncertainty=r.uncertainty,
                                N=cfg.N, flag=r.flag)
            for r in classify_poles(traj, cfg.params)]
    if against:
        targets = records.load_records(against)
        rows = []
        for k, t in enumerate(targets):
            E = complex(float(t["Re_E"]), float(t["Im_E"]))
            for i, th in enumerate(traj.thetas):
                dist = np.min(np.abs(traj.eigenvalues[i] - E))
                rows.append({"theta": records.decimal_string(float(th)), "target": k,
                             "Re_E": t["Re_E"], "Im_E": t["Im_E"],
                             "log10_dist": "-inf" if dist == 0 else f"{math.log10(dist):.6f}"})
        _emit(cfg, rows, ["theta", "target", "Re_E", "Im_E", "log10_dist"],
              {"schema": records.SCHEMA, "records": recs, "distances": rows})
        return EXIT_OK
    rows = []
    single = traj.thetas.size == 1
    for k in range(traj.paths.shape[0]):
        for i, th in enumerate(traj.thetas):
            E = traj.paths[k, i]
            st = traj.stability[k, i]
            rows.append({"theta": records.decimal_string(float(th)), "path_id": k,
                         "Re_E": records.decimal_string(float(E.real)), "Im_E": records.decimal_string(float(E.imag)),
                         "stability": "" if single or np.isnan(st) else records.decimal_string(float(st))})
    _emit(cfg, rows, records.RR_SCAN_COLUMNS, {"schema": records.SCHEMA, "records": recs})
    return EXIT_OK


def cmd_hf_check(cfg: RunConfig, dJ: float, resonance_seed: complex | None) -> int:
    cfg.validate()
    if not dJ > 0 or float(cfg.params.J) - dJ <= 0:
        raise InputError("need dJ > 0 and J - dJ > 0")
    s = cfg.s or 0
    seed = cfg.seeds[0].real
    rows, ok = [], True
    slope = drivers.bound_slope(cfg.params, s, seed, dJ, D_max=cfg.D_max, digits=cfg.digits)
    inside = 0 < slope.value < 2
    ok &= inside
    rows.append({"label": slope.label, "J": str(cfg.params.J), "dRe_dJ": f"{slope.value:.12g}", "dAbsIm_dJ": "",
                 "check": "0<dE/dJ<2" if inside else "VIOLATED"})
    if resonance_seed is not None:
        rs = drivers.resonance_slope(cfg.params, s, seed, resonance_seed, dJ)
        rows.append({"label": rs.label, "J": str(cfg.params.J), "dRe_dJ": f"{rs.value:.12g}",
                     "dAbsIm_dJ": f"{rs.abs_im:.12g}",
                     "check": ("0<dReE/dJ<2" if 0 < rs.value < 2 else "dReE/dJ outside (0,2)") + "; "
                     + ("d|ImE|/dJ<0" if rs.abs_im < 0 else "d|ImE|/dJ>=0")})
    _emit(cfg, rows, ["label", "J", "dRe_dJ", "dAbsIm_dJ", "check"], {"schema": "hf-check/1", "slopes": rows})
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_fig_im_vs_j(cfg: RunConfig, J_min: float, J_max: float, J_step: float, index: int) -> int:
    if not (0 < J_min <= J_max and J_step > 0):
        raise InputError("need 0 < J-min <= J-max and J-step > 0")
    if index < 0:
        raise InputError("--index must be >= 0")
    cfg.validate()
    count = int(round((J_max - J_min) / J_step)) + 1
    grid = [str(Decimal(str(J_min)) + k * Decimal(str(J_step))) for k in range(count)]
    try:
        pts = drivers.im_vs_j(cfg.params.lam, grid, index, cfg.N, cfg.omega, cfg.theta_min, cfg.theta_max,
                              cfg.theta_step)
    except MatchingError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    rows = [{"J": J, "Re_E": "" if p.E is None else records.decimal_string(p.E.real),
             "Im_E": "" if p.E is None else records.decimal_string(p.E.imag), "status": p.status}
            for J, p in zip(grid, pts)]
    _emit(cfg, rows, records.FIG_COLUMNS, {"schema": "fig-im-vs-j/1", "index": index, "points": rows})
    return EXIT_OK


def cmd_compare(cfg: RunConfig, a: str, b: str, radius: float) -> int:
    try:
        ra, rb = records.load_records(a), records.load_records(b)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read records: {exc}")
    if not radius > 0:
        raise InputError("--radius must be positive")
    rep = records.match_records(ra, rb, radius)
    rows = rep.rows(ra, rb)
    for side, idx, recs in (("a", rep.unmatched_a, ra), ("b", rep.unmatched_b, rb)):
        for i in idx:
            log.info("unmatched %s[%d]: %s %s", side, i, recs[i]["Re_E"], recs[i]["Im_E"])
    columns = ["a", "b", "Re_E_a", "Im_E_a", "Re_E_b", "Im_E_b", "log10_dist", "ambiguous"]
    _emit(cfg, rows, columns, {"schema": "compare/1", "pairs": rows, "unmatched_a": rep.unmatched_a,
                               "unmatched_b": rep.unmatched_b, "ambiguous": rep.ambiguous})
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = config_from(args)
        if args.command == "rpm" and args.action == "find":
            return cmd_rpm_find(cfg, args.max_shift)
        if args.command == "rpm":
            return cmd_rpm_table(cfg, args.table, args.rows)
        if args.command == "rr":
            return cmd_rr_scan(cfg, args.against)
        if args.command == "hf-check":
            return cmd_hf_check(cfg, args.dJ, args.resonance_seed)
        if args.command == "fig-im-vs-j":
            return cmd_fig_im_vs_j(cfg, args.J_min, args.J_max, args.J_step, args.index)
        return cmd_compare(cfg, args.a, args.b, args.radius)
    except (InputError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except ArithmeticError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
