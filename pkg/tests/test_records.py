import json
import math

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import given, strategies as st

from gausswell.records import (
    SCHEMA,
    csv_text,
    decimal_string,
    dump_records,
    load_records,
    make_record,
    match_records,
    matched_digits,
    parse_complex,
    parse_decimal,
    reference_table,
    reference_values,
    ulp_distance,
)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(decimal_string(x)) == x


@given(st.integers(60, 600), st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_mpfr_round_trip(bits, num, den):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        x = mpfr(num) / den * mpfr(10) ** -7
        text = decimal_string(x)
        assert mpfr(parse_decimal(text), bits) == x


def test_wide_digits_survive():
    text = "1.00408072428393443017523" + "1" * 60
    x = parse_decimal(text)
    assert decimal_string(x, len(text) - 1) == text


def test_json_round_trip(tmp_path):
    E = parse_complex("9.17823869795450358376112233445566778899", "-24.263016247192105546239")
    rec = make_record("type_b", "rpm", E, D_final=34, err_est=1e-22)
    path = tmp_path / "r.json"
    path.write_text(dump_records([rec]))
    back = load_records(str(path))[0]
    assert back["schema"] == SCHEMA and back["D_final"] == 34
    assert parse_complex(back["Re_E"], back["Im_E"]) == parse_complex(rec["Re_E"], rec["Im_E"])
    assert back["Re_E"].startswith("9.17823869795450358376112233445566778899")


def test_unknown_schema_rejected(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"records": [{"schema": "other/9", "Re_E": "1", "Im_E": "0"}]}))
    with pytest.raises(ValueError):
        load_records(str(path))


def test_csv_with_abs_im(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(csv_text([{"n": 0, "Re_E": "1.5", "abs_Im_E": "0.25"}], ["n", "Re_E", "abs_Im_E"]))
    rec = load_records(str(path))[0]
    assert rec["Im_E"] == "-0.25"


def test_matching_identical_gives_sentinel():
    recs = [make_record("type_a", "rr", 1 - 2j), make_record("type_b", "rr", 3 - 0.5j)]
    report = match_records(recs, recs, 1e-3)
    assert [p[2] for p in report.pairs] == [-math.inf, -math.inf]
    assert report.rows(recs, recs)[0]["log10_dist"] == "-inf"
    assert not report.unmatched_a and not report.unmatched_b


def test_matching_disjoint_and_one_to_one():
    a = [make_record("type_a", "rr", 1 - 1j)]
    b = [make_record("type_a", "rr", 5 - 1j)]
    assert match_records(a, b, 0.1).pairs == []
    b2 = [make_record("type_a", "rr", 1.01 - 1j), make_record("type_a", "rr", 1.001 - 1j)]
    report = match_records(a, b2, 0.1)
    assert report.pairs[0][1] == 1 and report.unmatched_b == [0] and report.ambiguous == [0]
    with pytest.raises(ValueError):
        match_records(a, b, 0)


def test_digit_measures():
    assert matched_digits(parse_decimal("9.178238697954503583761"), "9.178238697954503583761") == 21
    assert matched_digits(1.25, "1.35") == 0
    assert ulp_distance(parse_decimal("1.0002"), "1.0000") == pytest.approx(2.0)


def test_reference_data():
    t1, t2 = reference_table(1), reference_table(2)
    assert [r.n for r in t1] == list(range(11)) and [r.n for r in t2] == list(range(41))
    assert t1[0].abs_im == "" and t2[16].re == "9.17823869795450358376"
    vals = reference_values()
    assert vals["E0_cr_J0.8"].family == "companion"
    with pytest.raises(ValueError):
        reference_table(3)
