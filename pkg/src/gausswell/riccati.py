"""Taylor coefficients of the regularized logarithmic derivative.

With f(x) = s/x - psi'(x)/psi(x) = x * sum_j f_j x^{2j}, the Riccati equation

    f'(x) + 2 s f(x) / x - f(x)^2 + V(x) - E = 0

gives, with u_0 = -E and u_j = v_j (the x^{2j} coefficients of V),

    f_0 = E / (2s + 1)
    f_j = (sum_{k<j} f_k f_{j-1-k} - v_j) / (2j + 2s + 1).

Differentiating in E yields the companion recurrence for g_j = df_j/dE.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpc

from .model import PotentialParams, taylor_coeffs
from .numerics import PrecisionContext, to_mpc


@dataclass
class RiccatiSeries:
    s: int
    E: mpc
    f: list
    g: list | None = field(default=None)

    @property
    def j_max(self) -> int:
        return len(self.f) - 1


def _check(s: int, j_max: int) -> None:
    if s not in (0, 1):
        raise ValueError(f"parity index must be 0 or 1, got {s!r}")
    if j_max < 0:
        raise ValueError("j_max must be non-negative")


def riccati_coeffs(params: PotentialParams, s: int, E, j_max: int, ctx: PrecisionContext) -> RiccatiSeries:
    _check(s, j_max)
    with ctx.active():
        E = to_mpc(E)
        v = taylor_coeffs(params, j_max) if j_max else []
        f = [E / (2 * s + 1)]
        for j in range(1, j_max + 1):
            acc = f[0] * f[j - 1]
            for k in range(1, j):
                acc += f[k] * f[j - 1 - k]
            f.append((acc - v[j - 1]) / (2 * j + 2 * s + 1))
    return RiccatiSeries(s=s, E=E, f=f)


def riccati_coeffs_with_dE(params: PotentialParams, s: int, E, j_max: int, ctx: PrecisionContext) -> RiccatiSeries:
    _check(s, j_max)
    with ctx.active():
        E = to_mpc(E)
        v = taylor_coeffs(params, j_max) if j_max else []
        f = [E / (2 * s + 1)]
        g = [mpc(1) / (2 * s + 1)]
        for j in range(1, j_max + 1):
            acc = f[0] * f[j - 1]
            dacc = f[0] * g[j - 1]
            for k in range(1, j):
                acc += f[k] * f[j - 1 - k]
                dacc += f[k] * g[j - 1 - k]
            # sum_k (f_k g_{j-1-k} + g_k f_{j-1-k}) = 2 sum_k f_k g_{j-1-k}
            den = 2 * j + 2 * s + 1
            f.append((acc - v[j - 1]) / den)
            g.append(2 * dacc / den)
    return RiccatiSeries(s=s, E=E, f=f, g=g)
