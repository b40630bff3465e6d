"""Serialization: decimal strings, CSV tables, JSON resonance records, matching.

Numbers leave the process as decimal strings at full working precision and
come back in at a precision wide enough to hold every digit, so a JSON file
re-read by :func:`match_records` reproduces the values exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from decimal import Context, Decimal, localcontext
from importlib import resources

import gmpy2
from gmpy2 import mpc, mpfr

SCHEMA = "resonance-record/1"

RPM_TABLE_COLUMNS = ["n", "D_final", "Re_E", "abs_Im_E", "err_est", "status"]
RR_SCAN_COLUMNS = ["theta", "path_id", "Re_E", "Im_E", "stability"]
FIG_COLUMNS = ["J", "Re_E", "Im_E", "status"]

# decimal arithmetic must never round what gmpy2 produced
_WIDE = Context(prec=5000, Emin=-10**6, Emax=10**6)


def decimal_string(x, digits: int | None = None) -> str:
    """Shortest faithful decimal for floats; for mpfr, enough digits to re-round to the same value."""
    if x is None:
        return ""
    if isinstance(x, mpfr):
        if not gmpy2.is_finite(x):
            return str(float(x))
        if digits is None:
            digits = max(17, 1 + math.ceil(x.precision * math.log10(2)))
        mant, exp, _ = x.digits(10, digits)
        if mant.strip("-0") == "":
            return "0"
        sign = "-" if mant.startswith("-") else ""
        d = Decimal(f"{sign}0.{mant.lstrip('-')}E{exp}").normalize(_WIDE)
        return _plain(d)
    if isinstance(x, (int, float)):
        if isinstance(x, float) and not math.isfinite(x):
            return str(x)
        return _plain(Decimal(repr(x)).normalize(_WIDE)) if isinstance(x, float) else str(x)
    return str(x)


def _plain(d: Decimal) -> str:
    # positional notation unless the exponent is extreme
    _, digits, exp = d.as_tuple()
    if -30 <= exp + len(digits) <= 30:
        return format(d, "f")
    return str(d)


def parse_decimal(text: str) -> mpfr:
    """mpfr holding every digit of ``text`` (at least the current precision)."""
    text = text.strip()
    bits = int(len(text) * math.log2(10)) + 64
    with gmpy2.context(gmpy2.get_context(), precision=max(bits, gmpy2.get_context().precision)):
        return mpfr(text)


def parse_complex(re_text: str, im_text: str) -> mpc:
    re_v, im_v = parse_decimal(re_text), parse_decimal(im_text or "0")
    bits = max(re_v.precision, im_v.precision)
    with gmpy2.context(gmpy2.get_context(), precision=bits, real_prec=bits, imag_prec=bits):
        return mpc(re_v, im_v)


def magnitude(x):
    """|x| without rounding: gmpy2 would round abs() to the ambient (53-bit) precision."""
    if isinstance(x, mpfr):
        with gmpy2.context(gmpy2.get_context(), precision=x.precision):
            return abs(x)
    return abs(x)


def complex_strings(E, digits: int | None = None) -> tuple[str, str]:
    if isinstance(E, mpc):
        return decimal_string(E.real, digits), decimal_string(E.imag, digits)
    E = complex(E)
    return decimal_string(E.real), decimal_string(E.imag)


# ---------------------------------------------------------------- reference data

@dataclass(frozen=True)
class ReferenceRow:
    table: int
    n: int
    re: str
    abs_im: str

    @property
    def E(self) -> complex:
        return complex(float(self.re), -float(self.abs_im or 0))

    def exact(self) -> mpc:
        return parse_complex(self.re, "-" + self.abs_im if self.abs_im else "0")


@dataclass(frozen=True)
class ReferenceValue:
    key: str
    J: str
    lam: str
    s: int
    family: str
    re: str
    abs_im: str

    @property
    def E(self) -> complex:
        return complex(float(self.re), -float(self.abs_im or 0))

    def exact(self) -> mpc:
        return parse_complex(self.re, "-" + self.abs_im if self.abs_im else "0")


def _data_lines(name: str) -> list[str]:
    text = resources.files("gausswell.data").joinpath(name).read_text()
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def reference_table(table: int) -> list[ReferenceRow]:
    if table not in (1, 2):
        raise ValueError("table must be 1 or 2")
    rows = csv.DictReader(_data_lines("reference_tables.csv"))
    return [ReferenceRow(int(r["table"]), int(r["n"]), r["Re_E"], r["abs_Im_E"])
            for r in rows if int(r["table"]) == table]


def reference_values() -> dict[str, ReferenceValue]:
    rows = csv.DictReader(_data_lines("reference_values.csv"))
    return {r["key"]: ReferenceValue(r["key"], r["J"], r["lambda"], int(r["s"]), r["family"],
                                     r["Re_E"], r["abs_Im_E"]) for r in rows}


def _decimals(ref: str) -> int:
    return len(ref.split(".")[1]) if "." in ref else 0


def _as_decimal(value) -> Decimal:
    return Decimal(decimal_string(value, 80) if isinstance(value, mpfr) else str(value))


def ulp_distance(value, ref: str) -> float:
    """|value - ref| in units of the last printed decimal of ``ref``."""
    with localcontext(_WIDE):
        ulp = Decimal(1).scaleb(-_decimals(ref))
        return float(abs(_as_decimal(value) - Decimal(ref)) / ulp)


def matched_digits(value, ref: str) -> int:
    """Leading decimals (after the point) shared by ``ref`` and ``value`` rounded like it."""
    ndec = _decimals(ref)
    with localcontext(_WIDE):
        got = format(_as_decimal(value).quantize(Decimal(1).scaleb(-ndec)), "f")
    want = format(Decimal(ref), "f")
    if got.split(".")[0] != want.split(".")[0]:
        return 0
    count = 0
    for x, y in zip(got.partition(".")[2], want.partition(".")[2]):
        if x != y:
            break
        count += 1
    return count


# ---------------------------------------------------------------- CSV / JSON

def write_csv(rows: list[dict], columns: list[str], handle) -> None:
    w = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: row.get(k, "") for k in columns})


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()


def make_record(label: str, method: str, E, digits: int | None = None, **extra) -> dict:
    re_s, im_s = complex_strings(E, digits)
    rec = {"schema": SCHEMA, "label": label, "method": method, "Re_E": re_s, "Im_E": im_s}
    for key, value in extra.items():
        if value is None:
            continue
        rec[key] = decimal_string(value) if isinstance(value, (float, mpfr)) else value
    return rec


def dump_records(records: list[dict]) -> str:
    return json.dumps({"schema": SCHEMA, "records": records}, indent=1) + "\n"


def load_records(path: str) -> list[dict]:
    """Records from a JSON dump or from any CSV with Re_E and Im_E/abs_Im_E columns."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        data = json.loads(text)
        recs = data["records"] if isinstance(data, dict) else data
        for r in recs:
            if r.get("schema", SCHEMA) != SCHEMA:
                raise ValueError(f"unsupported record schema {r.get('schema')!r}")
            if "Re_E" not in r or "Im_E" not in r:
                raise ValueError("record lacks Re_E/Im_E")
        return recs
    rows = list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))
    if not rows or "Re_E" not in rows[0]:
        raise ValueError(f"{path}: no Re_E column")
    out = []
    for r in rows:
        if not r["Re_E"]:
            continue
        if "Im_E" in r:
            im = r["Im_E"]
        elif "abs_Im_E" in r:
            im = "-" + r["abs_Im_E"] if r["abs_Im_E"] else "0"
        else:
            raise ValueError(f"{path}: no Im_E or abs_Im_E column")
        out.append({**r, "Re_E": r["Re_E"], "Im_E": im or "0"})
    return out


# ---------------------------------------------------------------- matching

@dataclass
class MatchReport:
    pairs: list  # (index_a, index_b, log10 |dE|)
    unmatched_a: list
    unmatched_b: list
    ambiguous: list  # indices in a with more than one candidate in range

    def rows(self, a: list[dict], b: list[dict]) -> list[dict]:
        out = []
        for i, k, lg in self.pairs:
            out.append({"a": i, "b": k, "Re_E_a": a[i]["Re_E"], "Im_E_a": a[i]["Im_E"],
                        "Re_E_b": b[k]["Re_E"], "Im_E_b": b[k]["Im_E"],
                        "log10_dist": "-inf" if lg == -math.inf else f"{lg:.6f}",
                        "ambiguous": int(i in self.ambiguous)})
        return out


def match_records(a: list[dict], b: list[dict], radius: float) -> MatchReport:
    """One-to-one nearest-neighbour matching, closest pairs first."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    Ea = [parse_complex(r["Re_E"], r["Im_E"]) for r in a]
    Eb = [parse_complex(r["Re_E"], r["Im_E"]) for r in b]
    cands = []
    counts = [0] * len(a)
    for i, x in enumerate(Ea):
        for k, y in enumerate(Eb):
            bits = max(x.real.precision, y.real.precision)
            with gmpy2.context(gmpy2.get_context(), precision=bits, real_prec=bits, imag_prec=bits):
                dist = abs(x - y)
            if dist <= radius:
                cands.append((dist, i, k))
                counts[i] += 1
    cands.sort(key=lambda c: c[0])
    used_a, used_b, pairs = set(), set(), []
    for dist, i, k in cands:
        if i in used_a or k in used_b:
            continue
        used_a.add(i)
        used_b.add(k)
        pairs.append((i, k, -math.inf if dist == 0 else float(gmpy2.log10(dist))))
    pairs.sort()
    return MatchReport(
        pairs=pairs,
        unmatched_a=[i for i in range(len(a)) if i not in used_a],
        unmatched_b=[k for k in range(len(b)) if k not in used_b],
        ambiguous=[i for i, c in enumerate(counts) if c > 1],
    )
