import mpmath
import pytest
from gmpy2 import mpc
from hypothesis import given, strategies as st

from gausswell.model import PotentialParams
from gausswell.numerics import PrecisionContext
from gausswell.riccati import riccati_coeffs, riccati_coeffs_with_dE


def series_oracle(J, lam, s, E, jmax, dps=60):
    """f_j from the power series of psi itself: psi'' = (V - E) psi, f = -phi'/phi with psi = x^s phi."""
    mpmath.mp.dps = dps
    J, lam, E = mpmath.mpf(J), mpmath.mpf(lam), mpmath.mpc(E)
    K = 2 * jmax + 4
    V = mpmath.taylor(lambda x: (x**2 - 2 * J) * mpmath.exp(-lam * x**2) + 2 * J, 0, K)
    c = [mpmath.mpc(0)] * (K + s + 3)
    c[s] = mpmath.mpc(1)
    for k in range(s, K + s):
        rhs = sum(V[i] * c[k - i] for i in range(0, k + 1)) - E * c[k]
        c[k + 2] = rhs / ((k + 2) * (k + 1))
    phi = c[s:s + K + 1]
    dphi = [(n + 1) * phi[n + 1] for n in range(K)]
    q = []
    for n in range(K):
        q.append((dphi[n] - sum(phi[i] * q[n - i] for i in range(1, n + 1))) / phi[0])
    return [-q[2 * j + 1] for j in range(jmax + 1)]


@pytest.mark.parametrize("s", [0, 1])
@pytest.mark.parametrize("E", [1.3, complex(4.25, -0.03), complex(-1.1, 0.2)])
def test_coefficients_match_wavefunction_series(s, E):
    ctx = PrecisionContext(60)
    series = riccati_coeffs(PotentialParams("0.8", "0.1"), s, E, 12, ctx)
    ref = series_oracle("0.8", "0.1", s, E, 12)
    for j in range(13):
        got = complex(series.f[j])
        want = complex(ref[j])
        assert abs(got - want) <= 1e-13 * max(1.0, abs(want)), j


def test_harmonic_limit_is_exact():
    # lambda = 0 leaves V = x^2, whose ground state has f(x) = x exactly at E = 1
    for s in (0, 1):
        series = riccati_coeffs(PotentialParams(1, 0), s, 2 * s + 1, 20, PrecisionContext(50))
        assert series.f[0] == 1
        assert all(abs(fj) < 1e-45 for fj in series.f[1:])


def test_leading_coefficients(ctx, params):
    series = riccati_coeffs(params, 1, 2.0, 3, ctx)
    assert complex(series.f[0]) == pytest.approx(2 / 3)
    # f_1 = (f_0^2 - v_1) / 5 with v_1 = 2 J lam + 1
    assert complex(series.f[1]) == pytest.approx(((2 / 3) ** 2 - 1.16) / 5)


def test_validation(ctx, params):
    with pytest.raises(ValueError):
        riccati_coeffs(params, 2, 1.0, 3, ctx)
    with pytest.raises(ValueError):
        riccati_coeffs_with_dE(params, 0, 1.0, -1, ctx)


def test_plain_and_differentiated_agree(ctx, params):
    a = riccati_coeffs(params, 0, complex(3, -1), 30, ctx)
    b = riccati_coeffs_with_dE(params, 0, complex(3, -1), 30, ctx)
    assert all(x == y for x, y in zip(a.f, b.f))


# |E| bounded away from 0, where some f_j vanish and relative errors lose meaning
energies = st.complex_numbers(min_magnitude=1e-2, max_magnitude=15, allow_nan=False, allow_infinity=False)


@given(energies, st.sampled_from([0, 1]))
def test_energy_derivative_matches_central_difference(E, s):
    digits = 80
    ctx = PrecisionContext(digits)
    params = PotentialParams("0.8", "0.1")
    series = riccati_coeffs_with_dE(params, s, E, 50, ctx)
    with ctx.active():
        h = mpc(1) / 10 ** (digits // 3)  # truncation h^2 and roundoff eps/h balance near 1e-53
        Ep, Em = series.E + h, series.E - h
    plus = riccati_coeffs(params, s, Ep, 50, ctx)
    minus = riccati_coeffs(params, s, Em, 50, ctx)
    with ctx.active():
        for j in range(51):
            fd = (plus.f[j] - minus.f[j]) / (2 * h)
            scale = max(abs(series.g[j]), abs(fd), 1e-300)
            assert abs(series.g[j] - fd) / scale <= 10.0 ** (-digits // 2), j


def test_conjugation_symmetry(ctx, params):
    a = riccati_coeffs(params, 1, complex(5.1, -0.3), 25, ctx)
    b = riccati_coeffs(params, 1, complex(5.1, 0.3), 25, ctx)
    with ctx.active():
        assert all(x.conjugate() == y for x, y in zip(a.f, b.f))
