"""Arbitrary-precision substrate: precision contexts, pivoted LU, damped Newton.

All multiprecision values are gmpy2 ``mpfr``/``mpc``.  Precision is never
changed implicitly: callers enter a :class:`PrecisionContext` and every value
created inside carries its precision.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

BITS_PER_DIGIT = math.log2(10)


class NumericsError(ArithmeticError):
    pass


class DerivativeUnderflow(NumericsError):
    pass


class MaxIterationsExceeded(NumericsError):
    """Newton did not meet its tolerance; carries the best iterate found."""

    def __init__(self, message: str, best, residual, iterations: int):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = 60

    def __post_init__(self) -> None:
        if self.digits < 30:
            raise ValueError("working precision must be at least 30 digits")

    @property
    def bits(self) -> int:
        return int(math.ceil(self.digits * BITS_PER_DIGIT)) + 8

    @contextlib.contextmanager
    def active(self):
        with gmpy2.context(gmpy2.get_context(), precision=self.bits,
                           real_prec=self.bits, imag_prec=self.bits):
            yield self

    def real(self, value) -> mpfr:
        from .model import decimal_mpfr

        with self.active():
            return decimal_mpfr(value)

    def complex(self, value) -> mpc:
        """Convert a Python number, string or gmpy2 value to ``mpc``."""
        with self.active():
            return to_mpc(value)

    def eps(self) -> mpfr:
        with self.active():
            return mpfr(2) ** (-self.bits)


def default_digits(D_max: int) -> int:
    return max(60, 4 * D_max)


def to_mpc(value) -> mpc:
    """Convert at the active precision; floats are read as their shortest repr."""
    from .model import decimal_mpfr

    if isinstance(value, mpc):
        return mpc(value)
    if isinstance(value, complex):
        return mpc(decimal_mpfr(value.real), decimal_mpfr(value.imag))
    if isinstance(value, str) and ("j" in value or "i" in value):
        return mpc(complex(value.replace("i", "j")))
    return mpc(decimal_mpfr(value), 0)


def _finite(z) -> bool:
    if isinstance(z, mpc):
        return gmpy2.is_finite(z.real) and gmpy2.is_finite(z.imag)
    if isinstance(z, mpfr):
        return gmpy2.is_finite(z)
    return math.isfinite(abs(z))


def _check_square(matrix: Sequence[Sequence]) -> int:
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise ValueError("determinant needs a non-empty square matrix")
    for row in matrix:
        for a in row:
            if not _finite(a):
                raise ValueError("matrix has a non-finite entry")
    return n


def det_lu(matrix: Sequence[Sequence]):
    """Determinant by LU with partial pivoting on modulus.

    An exactly singular pivot column gives 0 rather than an error.
    """
    n = _check_square(matrix)
    A = [list(row) for row in matrix]
    det = A[0][0] * 0 + 1
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(A[r][c]))
        if A[p][c] == 0:
            return det * 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        pivot = A[c][c]
        det *= pivot
        Ac = A[c]
        for r in range(c + 1, n):
            m = A[r][c] / pivot
            if m == 0:
                continue
            Ar = A[r]
            for k in range(c + 1, n):
                Ar[k] -= m * Ac[k]
    return det


def det_lu_dlog(matrix: Sequence[Sequence], dmatrix: Sequence[Sequence]):
    """Determinant of A and tr(A^{-1} dA) by one forward-differentiated LU.

    ``dmatrix`` is the derivative of ``matrix`` with respect to a scalar
    parameter; the trace is d(log det)/d(parameter).  Pivoting follows the
    values only, so the derivative rides along the same elimination.
    Returns ``(det, None)`` when the matrix is singular.
    """
    n = _check_square(matrix)
    A = [list(row) for row in matrix]
    B = [list(row) for row in dmatrix]
    det = A[0][0] * 0 + 1
    trace = det * 0
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(A[r][c]))
        if A[p][c] == 0:
            return det * 0, None
        if p != c:
            A[c], A[p] = A[p], A[c]
            B[c], B[p] = B[p], B[c]
            det = -det
        pivot = A[c][c]
        dpivot = B[c][c]
        det *= pivot
        inv = 1 / pivot
        trace += dpivot * inv
        Ac, Bc = A[c], B[c]
        for r in range(c + 1, n):
            Ar, Br = A[r], B[r]
            m = Ar[c] * inv
            dm = (Br[c] - m * dpivot) * inv
            for k in range(c + 1, n):
                Ar[k] -= m * Ac[k]
                Br[k] -= dm * Ac[k] + m * Bc[k]
    return det, trace


@dataclass
class NewtonResult:
    root: object
    residual: object
    iterations: int


def newton_solve(
    func: Callable,
    seed,
    tol: float,
    max_iter: int = 50,
    max_halvings: int = 20,
    accelerate: bool = True,
) -> NewtonResult:
    """Damped complex Newton iteration.

    ``func(z)`` returns ``(value, derivative)``.  A step is halved (at most
    ``max_halvings`` times) while ``|value|`` fails to decrease.  Succeeds when
    ``|step| <= tol * max(1, |z|)``.

    With ``accelerate`` the iteration watches for linear convergence, which
    is the signature of a cluster of nearby roots, and then tries the step
    scaled by the estimated multiplicity m = 1/(1 - rho), where rho is the
    ratio of successive plain Newton steps.  The scaled step is still subject
    to the damping test.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    z = seed
    value, deriv = func(z)
    best, best_abs = z, abs(value)
    prev_plain = prev_rho = None
    for it in range(1, max_iter + 1):
        if value == 0:
            return NewtonResult(z, abs(value), it - 1)
        if deriv == 0 or not _finite(deriv):
            raise DerivativeUnderflow(f"derivative vanished at non-root z={complex(z)}")
        step = value / deriv
        if not _finite(step):
            raise DerivativeUnderflow(f"Newton step is not finite at z={complex(z)}")

        scale = 1
        rho = None
        if accelerate and prev_plain is not None and abs(prev_plain) > 0:
            q = step / prev_plain
            rho = abs(q)
            if not (0.3 < rho < 0.995 and q.real > 0.95 * rho):
                rho = None
            elif prev_rho is not None and abs(rho - prev_rho) < 0.05:
                # two consistent ratios: linear convergence onto a cluster
                scale = max(1, min(256, round(1 / (1 - rho))))

        if abs(step) <= tol * max(1, abs(z)):
            # converged: polishing step is below tolerance, no damping needed
            return NewtonResult(z - step, abs(value), it)

        trial = step * scale
        abs_value = abs(value)
        new_z = z - trial
        new_value, new_deriv = func(new_z)
        halvings = 0
        while not abs(new_value) < abs_value and halvings < max_halvings:
            trial = trial / 2
            halvings += 1
            new_z = z - trial
            new_value, new_deriv = func(new_z)

        # after an accelerated step the next ratios must come from plain ones
        plain = scale == 1 and halvings == 0
        prev_plain = step if plain else None
        prev_rho = rho if plain else None
        z, value, deriv = new_z, new_value, new_deriv
        if abs(value) < best_abs:
            best, best_abs = z, abs(value)
        if abs(trial) <= tol * max(1, abs(z)):
            return NewtonResult(z, abs(value), it)
        if halvings == max_halvings and abs(value) >= abs_value:
            raise MaxIterationsExceeded(
                f"no decrease after {max_halvings} halvings at z={complex(z)}", best, best_abs, it
            )
    raise MaxIterationsExceeded(f"Newton did not converge in {max_iter} iterations", best, best_abs, max_iter)
