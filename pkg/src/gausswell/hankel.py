"""Hankel-determinant quantization.

The D x D Hankel matrix built from f_{d+1} .. f_{d+2D-1} is singular exactly
at the energies where the Pade approximant of f(x) becomes consistent; its
roots E^[D] converge to bound states and resonances as D grows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import gmpy2
from gmpy2 import mpc, mpfr

from .model import PotentialParams
from .numerics import (
    MaxIterationsExceeded,
    NumericsError,
    PrecisionContext,
    det_lu,
    det_lu_dlog,
    newton_solve,
    to_mpc,
)
from .riccati import RiccatiSeries, riccati_coeffs, riccati_coeffs_with_dE

log = logging.getLogger(__name__)


class SpuriousRoot(NumericsError):
    """Newton ran off to a root far from the seed."""


@dataclass(frozen=True)
class HankelSpec:
    D: int
    d: int = 0
    s: int = 0

    def __post_init__(self) -> None:
        if self.D < 2:
            raise ValueError("Hankel dimension must be >= 2")
        if self.d < 0:
            raise ValueError("d must be >= 0")
        if self.s not in (0, 1):
            raise ValueError("parity index must be 0 or 1")

    @property
    def j_max(self) -> int:
        """Highest Riccati coefficient index consumed."""
        return self.d + 2 * self.D - 1


@dataclass
class HankelSequence:
    s: int
    d: int
    D_min: int
    D_max: int
    roots: list = field(default_factory=list)  # (D, E, residual)
    failures: list = field(default_factory=list)  # (D, reason)
    abandoned: list = field(default_factory=list)  # roots of runs given up on
    converged: mpc | None = None
    err_estimate: float = math.inf
    status: str = "diverged"

    @property
    def D_final(self) -> int | None:
        return self.roots[-1][0] if self.roots else None

    def differences(self) -> list[float]:
        """|E^[D] - E^[D-1]| for consecutive successful dimensions."""
        return [float(abs(b[1] - a[1])) for a, b in zip(self.roots, self.roots[1:])]


def _matrix(coeffs, spec: HankelSpec):
    o = spec.d + 1
    return [[coeffs[o + i + k] for k in range(spec.D)] for i in range(spec.D)]


def _require(series: RiccatiSeries, spec: HankelSpec, need_g: bool = False) -> None:
    if series.j_max < spec.j_max:
        raise ValueError(f"series has f_0..f_{series.j_max}, need up to f_{spec.j_max}")
    if need_g and series.g is None:
        raise ValueError("series carries no energy derivatives")


def hankel_value(series: RiccatiSeries, spec: HankelSpec):
    _require(series, spec)
    return det_lu(_matrix(series.f, spec))


def hankel_value_and_dE(series: RiccatiSeries, spec: HankelSpec, method: str = "trace"):
    """H and dH/dE.

    ``method="trace"`` uses dH/dE = H tr(A^{-1} dA/dE) from one differentiated
    LU; ``method="rows"`` sums the D determinants with one row replaced by
    its energy derivative (Jacobi's formula, O(D^4), kept as a cross-check).
    """
    _require(series, spec, need_g=True)
    A = _matrix(series.f, spec)
    dA = _matrix(series.g, spec)
    if method == "trace":
        H, tr = det_lu_dlog(A, dA)
        if tr is None:
            # singular: fall back to the row expansion for the derivative
            return H, _row_expansion(A, dA)
        return H, H * tr
    if method == "rows":
        return det_lu(A), _row_expansion(A, dA)
    raise ValueError(f"unknown method {method!r}")


def _row_expansion(A, dA):
    total = None
    for r in range(len(A)):
        M = [dA[i] if i == r else A[i] for i in range(len(A))]
        term = det_lu(M)
        total = term if total is None else total + term
    return total


def _newton_function(params: PotentialParams, spec: HankelSpec, ctx: PrecisionContext):
    def func(E):
        series = riccati_coeffs_with_dE(params, spec.s, E, spec.j_max, ctx)
        with ctx.active():
            return hankel_value_and_dE(series, spec)

    return func


@dataclass
class RootResult:
    root: mpc
    residual: object
    iterations: int


def find_root(params: PotentialParams, spec: HankelSpec, seed, tol: float, ctx: PrecisionContext,
              max_iter: int = 60) -> RootResult:
    """Polish a root of H_D^d(E) from ``seed`` by damped Newton."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    with ctx.active():
        seed = to_mpc(seed)
        res = newton_solve(_newton_function(params, spec, ctx), seed, tol, max_iter)
        if abs(res.root) >= 10 * (abs(seed) + 1):
            raise SpuriousRoot(f"root {complex(res.root)} wandered far from seed {complex(seed)}")
    return RootResult(res.root, res.residual, res.iterations)


def _converged(diffs: list[float], err: float, tol: float) -> bool:
    if err > tol:
        return False
    last = diffs[-3:]
    if len(last) < 3:
        return False
    if all(x <= tol for x in last):
        return True
    if last[0] > last[1] > last[2]:
        return True
    # envelope test: the last three steps sit below the three before them
    before = diffs[-6:-3]
    return bool(before) and max(last) < max(before)


def track_sequence(params: PotentialParams, s: int, d: int, D_min: int, D_max: int, seed, tol: float,
                   ctx: PrecisionContext, newton_tol: float | None = None, max_shift: float | None = None,
                   max_iter: int = 60, accept: Callable[[mpc], bool] | None = None,
                   early_stop: bool = False, restarts: int = 1) -> HankelSequence:
    """Follow the root sequence E^[D], D = D_min..D_max, warm-starting each D.

    ``max_shift`` bounds how far a root may move from the previous D before
    the step counts as a failure (the first root may sit anywhere near the
    seed); ``accept`` may veto a root (for instance one
    that belongs to a different family).  Failures before the first success are taken to
    mean the root has not emerged yet at that D and are only logged; after
    the sequence has started, three consecutive failures abandon the run:
    up to ``restarts`` times the tracker returns to the original seed (real
    roots often exist only from some D on, with a complex pair before that),
    after which the sequence ends as diverged.  With ``early_stop`` the loop ends at the first D where the convergence
    test already holds.
    """
    params.require_valid()
    if not 2 <= D_min < D_max:
        raise ValueError("need 2 <= D_min < D_max")
    newton_tol = tol / 100 if newton_tol is None else newton_tol
    seq = HankelSequence(s=s, d=d, D_min=D_min, D_max=D_max)
    with ctx.active():
        start = current = to_mpc(seed)
    misses = 0
    for D in range(D_min, D_max + 1):
        spec = HankelSpec(D=D, d=d, s=s)
        try:
            r = find_root(params, spec, current, newton_tol, ctx, max_iter=max_iter)
            if max_shift is not None and seq.roots and abs(r.root - current) > max_shift:
                raise SpuriousRoot(f"root moved {float(abs(r.root - current)):.3g} from the previous D")
            if accept is not None and not accept(r.root):
                raise SpuriousRoot(f"root {complex(r.root)} rejected by acceptance test")
        except (NumericsError, ZeroDivisionError) as exc:
            seq.failures.append((D, str(exc)))
            log.debug("D=%d: %s", D, exc)
            if seq.roots:
                misses += 1
                if misses >= 3:
                    if restarts <= 0:
                        seq.status = "diverged"
                        break
                    restarts -= 1
                    seq.abandoned.extend(seq.roots)
                    seq.roots = []
                    current, misses = start, 0
            continue
        misses = 0
        seq.roots.append((D, r.root, r.residual))
        current = r.root
        log.debug("D=%d E=%s (%d its)", D, complex(r.root), r.iterations)
        if early_stop:
            diffs = seq.differences()
            if diffs and _converged(diffs, diffs[-1], tol):
                seq.status = "stagnated"
                break
    else:
        seq.status = "stagnated"

    if not seq.roots:
        seq.status = "diverged"
    else:
        seq.converged = seq.roots[-1][1]
        diffs = seq.differences()
        seq.err_estimate = diffs[-1] if diffs else math.inf
        if seq.status != "diverged" and _converged(diffs, seq.err_estimate, tol):
            seq.status = "converged"
    return seq


def seed_scan(params: PotentialParams, s: int, d: int, D_probe: int, rectangle, grid, ctx: PrecisionContext,
              polish: bool = True, dedup: float = 1e-6) -> list[mpc]:
    """Candidate seeds from local minima of |H| on a grid.

    ``rectangle`` is (re_min, re_max, im_min, im_max); ``grid`` is (n_re, n_im).
    With ``polish`` each minimum is refined by Newton at ``D_probe`` and kept
    only if the root lands inside the (slightly padded) rectangle.
    """
    re0, re1, im0, im1 = map(float, rectangle)
    nre, nim = grid
    if nre < 4 or nim < 4:
        raise ValueError("grid must be at least 4 x 4")
    spec = HankelSpec(D=D_probe, d=d, s=s)
    xs = [re0 + (re1 - re0) * i / (nre - 1) for i in range(nre)]
    ys = [im0 + (im1 - im0) * k / (nim - 1) for k in range(nim)]
    logabs = [[0.0] * nim for _ in range(nre)]
    with ctx.active():
        for i, x in enumerate(xs):
            for k, y in enumerate(ys):
                series = riccati_coeffs(params, s, complex(x, y), spec.j_max, ctx)
                h = abs(hankel_value(series, spec))
                logabs[i][k] = -math.inf if h == 0 else float(gmpy2.log(h))
    minima = []
    for i in range(nre):
        for k in range(nim):
            here = logabs[i][k]
            neigh = [logabs[a][b] for a in range(max(0, i - 1), min(nre, i + 2))
                     for b in range(max(0, k - 1), min(nim, k + 2)) if (a, b) != (i, k)]
            if all(here < v for v in neigh):
                minima.append(complex(xs[i], ys[k]))

    pad_re = 0.5 * (re1 - re0) / (nre - 1)
    pad_im = 0.5 * (im1 - im0) / (nim - 1)
    out: list[mpc] = []
    for z in minima:
        if polish:
            try:
                cand = find_root(params, spec, z, 1e-12, ctx).root
            except NumericsError:
                continue
            c = complex(cand)
            if not (re0 - pad_re <= c.real <= re1 + pad_re and im0 - pad_im <= c.imag <= im1 + pad_im):
                continue
        else:
            cand = ctx.complex(z)
        if all(abs(cand - o) > dedup * max(1.0, float(abs(o))) for o in out):
            out.append(cand)
    return out


def scaling_relation_check(series: RiccatiSeries, spec: HankelSpec, gamma) -> mpfr:
    """Mismatch of H(f~) = gamma^{D(2D+2d+1)} H(f) with f~_j = gamma^{2j+1} f_j.

    The difference is measured against the Hadamard bound (product of row
    norms) of the scaled matrix, the natural scale of rounding error in a
    determinant; away from a root this is the relative error.
    """
    gamma = mpfr(gamma)
    if not (gmpy2.is_finite(gamma) and gamma > 0):
        raise ValueError("gamma must be finite and positive")
    scaled = RiccatiSeries(s=series.s, E=series.E,
                           f=[fj * gamma ** (2 * j + 1) for j, fj in enumerate(series.f)])
    H = hankel_value(series, spec)
    Ht = hankel_value(scaled, spec)
    expected = gamma ** (spec.D * (2 * spec.D + 2 * spec.d + 1)) * H
    bound = mpfr(1)
    for row in _matrix(scaled.f, spec):
        bound *= gmpy2.sqrt(sum(abs(a) ** 2 for a in row))
    return abs(Ht - expected) / max(abs(Ht), bound)
