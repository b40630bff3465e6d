import math

import gmpy2
import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausswell.model import (
    PotentialParams,
    barrier_info,
    decimal_mpfr,
    eval_potential,
    harmonic_estimate,
    taylor_coeffs,
)


def test_rejects_negative_parameters():
    with pytest.raises(ValueError):
        PotentialParams(-1, 0.1)
    with pytest.raises(ValueError):
        PotentialParams(1, -0.1)


def test_zero_parameters_constructible_but_invalid_for_solvers():
    p = PotentialParams(0, 0)
    assert not p.is_valid
    with pytest.raises(ValueError):
        p.require_valid()


def test_potential_values(params):
    assert eval_potential(params, 0.0) == 0.0
    assert eval_potential(params, 50.0) == pytest.approx(1.6, abs=1e-12)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(eval_potential(params, x), [(t * t - 1.6) * math.exp(-0.1 * t * t) + 1.6 for t in x])


def test_potential_is_even(params):
    for x in (0.3, 1.7, 4.2):
        assert eval_potential(params, x) == eval_potential(params, -x)
    z = 1.1 + 0.4j
    assert abs(eval_potential(params, z) - eval_potential(params, -z)) < 1e-14


def test_barrier_is_the_maximum(params):
    b = barrier_info(params)
    xs = np.linspace(0.1, 20, 20001)
    v = eval_potential(params, xs)
    assert b.x_b == pytest.approx(xs[np.argmax(v)], abs=2e-3)
    assert b.V_b == pytest.approx(v.max(), rel=1e-6)
    assert b.V_b >= v.max()
    assert b.threshold == pytest.approx(1.6)


def test_barrier_needs_positive_lambda():
    with pytest.raises(ValueError):
        barrier_info(PotentialParams(1, 0))


def test_decimal_parsing_is_exact():
    with gmpy2.context(gmpy2.get_context(), precision=300):
        tenth = decimal_mpfr(0.1)
        assert abs(float(tenth * 10 - 1)) < 1e-85
        assert decimal_mpfr("0.1") == tenth


@given(st.floats(0.05, 5), st.floats(0.001, 1))
def test_taylor_coefficients_match_mpmath(J, lam):
    # oracle: numerical Taylor expansion of the potential itself
    mpmath.mp.dps = 50
    p = PotentialParams(J, lam)
    with gmpy2.context(gmpy2.get_context(), precision=200):
        v = [float(c) for c in taylor_coeffs(p, 6)]
    f = lambda x: (x**2 - 2 * mpmath.mpf(repr(J))) * mpmath.exp(-mpmath.mpf(repr(lam)) * x**2) + 2 * mpmath.mpf(repr(J))
    ref = mpmath.taylor(f, 0, 12)
    for j in range(1, 7):
        assert v[j - 1] == pytest.approx(float(ref[2 * j]), rel=1e-12, abs=1e-300)
    assert abs(ref[0]) < 1e-40


def test_second_order_coefficient(params):
    with gmpy2.context(gmpy2.get_context(), precision=200):
        v = taylor_coeffs(params, 3)
    assert float(v[0]) == pytest.approx(2 * 0.8 * 0.1 + 1)
    assert float(v[1]) == pytest.approx(-0.1 * (0.8 * 0.1 + 1))


def test_harmonic_estimate():
    p = PotentialParams(10, 0.001)
    assert harmonic_estimate(p, 0) == pytest.approx(math.sqrt(1.02))
    assert harmonic_estimate(p, 2) == pytest.approx(5 * math.sqrt(1.02))
    with pytest.raises(ValueError):
        harmonic_estimate(p, -1)
