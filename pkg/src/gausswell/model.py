"""Gaussian well with two barriers: V(x) = (x^2 - 2J) exp(-lambda x^2) + 2J."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr


@dataclass(frozen=True)
class PotentialParams:
    """Well-depth ``J`` and Gaussian width ``lam``.

    Values are kept as given (float, int, str or Decimal) so that the
    arbitrary-precision code can parse them as exact decimals; ``0.1`` means
    one tenth, not the nearest binary double.
    """

    J: float | str = 0.8
    lam: float | str = 0.1

    def __post_init__(self) -> None:
        if not (float(self.J) >= 0 and float(self.lam) >= 0):
            raise ValueError(f"J and lambda must be non-negative, got J={self.J}, lambda={self.lam}")

    @property
    def is_valid(self) -> bool:
        return float(self.J) > 0 and float(self.lam) > 0

    def require_valid(self) -> None:
        if not self.is_valid:
            raise ValueError(f"solvers need J > 0 and lambda > 0, got J={self.J}, lambda={self.lam}")

    @property
    def threshold(self) -> float:
        return 2 * float(self.J)

    def exact(self) -> tuple[mpfr, mpfr]:
        """(J, lambda) as mpfr values at the current gmpy2 precision."""
        return decimal_mpfr(self.J), decimal_mpfr(self.lam)


@dataclass(frozen=True)
class BarrierInfo:
    x_b: float
    V_b: float
    threshold: float


def decimal_mpfr(value) -> mpfr:
    """Parse ``value`` as an exact decimal at the active precision."""
    if isinstance(value, float):
        value = repr(value)
    elif isinstance(value, mpfr):
        return mpfr(value)
    return mpfr(str(value))


def eval_potential(params: PotentialParams, x):
    """V(x) for real or complex ``x`` (numpy arrays accepted)."""
    J = float(params.J)
    lam = float(params.lam)
    try:
        import numpy as np

        if isinstance(x, np.ndarray):
            return (x**2 - 2 * J) * np.exp(-lam * x**2) + 2 * J
    except ImportError:  # pragma: no cover
        pass
    if isinstance(x, complex):
        return (x * x - 2 * J) * cmath.exp(-lam * x * x) + 2 * J
    return (x * x - 2 * J) * math.exp(-lam * x * x) + 2 * J


def barrier_info(params: PotentialParams) -> BarrierInfo:
    J = float(params.J)
    lam = float(params.lam)
    if lam <= 0:
        raise ValueError("barrier geometry needs lambda > 0")
    x_b = math.sqrt((2 * J * lam + 1) / lam)
    V_b = math.exp(-2 * J * lam - 1) / lam + 2 * J
    return BarrierInfo(x_b=x_b, V_b=V_b, threshold=2 * J)


def taylor_coeffs(params: PotentialParams, n_max: int) -> list[mpfr]:
    """Coefficients v_1..v_{n_max} of x^{2j} in V(x), at the active precision.

    v_j = (-lam)^{j-1}/(j-1)! - 2J (-lam)^j / j!
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    J, lam = params.exact()
    prec = gmpy2.get_context().precision
    return list(_taylor_cached(J, lam, n_max, prec))


@lru_cache(maxsize=64)
def _taylor_cached(J: mpfr, lam: mpfr, n_max: int, prec: int) -> tuple[mpfr, ...]:
    out = []
    term = mpfr(1)  # (-lam)^{j-1}/(j-1)!
    for j in range(1, n_max + 1):
        nxt = term * (-lam) / j  # (-lam)^j / j!
        out.append(term - 2 * J * nxt)
        term = nxt
    return tuple(out)


def harmonic_estimate(params: PotentialParams, n: int) -> float:
    """sqrt(2 J lam + 1) (2n + 1).

    Only meaningful for lam << 1 and energies well below the threshold 2J.
    """
    if n < 0:
        raise ValueError("quantum number must be >= 0")
    return math.sqrt(2 * float(params.J) * float(params.lam) + 1) * (2 * n + 1)
