"""Experiment drivers shared by the CLI, the scripts and the acceptance suite."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Callable, Iterable

import numpy as np
from gmpy2 import mpc

from .hankel import HankelSequence, track_sequence
from .model import PotentialParams
from .numerics import PrecisionContext
from .records import (
    ReferenceRow,
    decimal_string,
    magnitude,
    matched_digits,
    reference_table,
    ulp_distance,
)
from .rrcr import THETA_CRIT, build_rotated_hamiltonian, RotationSetup, theta_scan

log = logging.getLogger(__name__)


def working_digits(D_max: int, scale: float = 1.0) -> int:
    """Digits that survive the cancellation in a D_max Hankel determinant.

    Roughly 3 + 1.5 log10(1 + |E|) digits are lost per unit of D.
    """
    return int(40 + D_max * (3 + 1.5 * math.log10(1 + abs(scale))))


@dataclass(frozen=True)
class RpmRun:
    s: int = 0
    d: int = 0
    D_min: int = 2
    D_max: int = 34
    digits: int = 120
    tol: float = 1e-20
    early_stop: bool = False
    restarts: int = 1


def rpm_sequence(params: PotentialParams, run: RpmRun, seed, accept: Callable | None = None,
                 max_shift: float | None = None) -> HankelSequence:
    return track_sequence(params, run.s, run.d, run.D_min, run.D_max, seed, run.tol,
                          PrecisionContext(run.digits), max_shift=max_shift, accept=accept,
                          early_stop=run.early_stop, restarts=run.restarts)


def shifted(params: PotentialParams, dJ: str | float) -> PotentialParams:
    """Same potential with J moved by an exact decimal ``dJ``."""
    return replace(params, J=str(Decimal(str(params.J)) + Decimal(str(dJ))))


# ---------------------------------------------------------------- tables

@dataclass
class RowResult:
    table: int
    n: int
    method: str
    E: object = None  # mpc for rpm, complex for rr, None when missing
    D_final: int | None = None
    err_est: float = math.inf
    status: str = "missing"
    ref: ReferenceRow | None = None
    digits: int | None = None
    seconds: float = 0.0
    theta_star: float | None = None

    def csv_row(self) -> dict:
        if self.E is None:
            re_s = im_s = ""
        elif isinstance(self.E, mpc):
            re_s, im_s = decimal_string(self.E.real, self.digits), decimal_string(magnitude(self.E.imag), self.digits)
        else:
            re_s, im_s = decimal_string(self.E.real), decimal_string(abs(self.E.imag))
        return {"n": self.n, "D_final": "" if self.D_final is None else self.D_final,
                "Re_E": re_s, "abs_Im_E": im_s,
                "err_est": "" if not math.isfinite(self.err_est) else f"{self.err_est:.3e}",
                "status": self.status}

    def _parts(self):
        return self.E.real, magnitude(self.E.imag)

    def matched(self) -> tuple[int, int | None]:
        """Printed decimals reproduced in Re E and |Im E| (None when |Im E| is not printed)."""
        if self.E is None or self.ref is None:
            return 0, None
        re, im = self._parts()
        return matched_digits(re, self.ref.re), (matched_digits(im, self.ref.abs_im) if self.ref.abs_im else None)

    def ulps(self) -> tuple[float, float]:
        if self.E is None or self.ref is None:
            return math.inf, math.inf
        re, im = self._parts()
        return ulp_distance(re, self.ref.re), (ulp_distance(im, self.ref.abs_im) if self.ref.abs_im else 0.0)

    def significant_digits(self) -> tuple[float, float]:
        """-log10 of the relative error of Re E and |Im E| against the reference."""
        if self.E is None or self.ref is None:
            return 0.0, 0.0
        out = []
        for ulps, text in zip(self.ulps(), (self.ref.re, self.ref.abs_im or "0")):
            rel = ulps * 10.0 ** -len(text.partition(".")[2]) / abs(float(text)) if float(text) else 0.0
            out.append(math.inf if rel == 0 else -math.log10(rel))
        return tuple(out)

    def distance(self) -> float:
        if self.E is None or self.ref is None:
            return math.inf
        return abs(complex(self.E) - self.ref.E)


def _near(ref: complex, radius: float, min_abs_im: float = 0.0) -> Callable:
    def accept(E) -> bool:
        z = complex(E)
        return abs(z - ref) < radius and z.imag < 0 and abs(z.imag) > min_abs_im
    return accept


def table2_settings(n: int, ref: complex) -> RpmRun:
    """Sequence settings per row of the type-b table.

    Rows up to 10 run at D <= 34; higher rows emerge near D = n and get up to
    D = 60 with early stopping.
    """
    if n <= 10:
        return RpmRun(s=n % 2, D_min=max(5, n - 4), D_max=34,
                      digits=max(160, working_digits(34, abs(ref))), tol=1e-22)
    return RpmRun(s=n % 2, D_min=max(5, n - 4), D_max=60, digits=working_digits(60, abs(ref)),
                  tol=1e-19, early_stop=True)


def table2_row(params: PotentialParams, ref: ReferenceRow, run: RpmRun | None = None,
               perturbation: float = 1e-3) -> RowResult:
    """Type-b row from a seed = reference * (1 + perturbation)."""
    target = ref.E
    run = run or table2_settings(ref.n, target)
    seed = target * (1 + perturbation)
    # the type-b root must stay complex; near-real rows sit next to a real bound-state root
    accept = _near(target, 2e-2 * abs(target), min_abs_im=1e-3 * abs(target.imag))
    t0 = time.perf_counter()
    seq = rpm_sequence(params, run, seed, accept=accept)
    return RowResult(2, ref.n, "rpm", seq.converged, seq.D_final, seq.err_estimate, seq.status, ref,
                     run.digits, time.perf_counter() - t0)


def table2(params: PotentialParams | None = None, rows: Iterable[int] | None = None,
           progress: Callable[[RowResult], None] | None = None) -> list[RowResult]:
    params = params or PotentialParams("0.8", "0.1")
    refs = reference_table(2)
    wanted = set(range(len(refs))) if rows is None else set(rows)
    out = []
    for ref in refs:
        if ref.n not in wanted:
            continue
        row = table2_row(params, ref)
        out.append(row)
        if progress:
            progress(row)
    return out


def bound_state(params: PotentialParams, s: int, seed: float, D_max: int = 34, digits: int = 120,
                tol: float = 1e-15, D_min: int = 12, max_shift: float | None = None) -> HankelSequence:
    """Real root sequence; real bound-state roots exist only from moderate D on."""
    run = RpmRun(s=s, D_min=D_min, D_max=D_max, digits=digits, tol=tol, restarts=2)
    return rpm_sequence(params, run, float(seed), max_shift=max_shift)


def polished_seed(params: PotentialParams, s: int, seed: float, N: int = 80, count: int = 6) -> tuple[int, float]:
    """The theta = 0 Rayleigh-Ritz level of parity ``s`` nearest ``seed``: (index, value).

    Bound states can sit within ~|Im E_b| of a type-b root, closer than a
    rough seed can tell apart; the variational level resolves them.
    """
    levels = lowest_levels(params, N, s, count)
    k = int(np.argmin(np.abs(levels - seed)))
    return k, float(levels[k])


def rr_table1_rows(params: PotentialParams, N: int, rows: Iterable[int], omega: float = 1.0,
                   theta_min: float = 0.55, theta_max: float = 0.95, step: float = 0.005) -> list[RowResult]:
    """Type-a rows from theta < pi/4 plateaus, one scan per parity block of N functions."""
    refs = {r.n: r for r in reference_table(1)}
    rows = list(rows)
    scans = {}
    out = []
    for n in rows:
        ref = refs[n]
        parity = n % 2
        t0 = time.perf_counter()
        if parity not in scans:
            scans[parity] = theta_scan(params, N, theta_min, theta_max, step, omega=omega, parity=parity)
        p = scans[parity].nearest_plateau(ref.E, below_critical=True)
        if p is None:
            out.append(RowResult(1, n, "rr", ref=ref, status="no_plateau"))
            continue
        out.append(RowResult(1, n, "rr", p.E, None, p.stability, "plateau", ref,
                             seconds=time.perf_counter() - t0, theta_star=p.theta_star))
    return out


def table1(params: PotentialParams | None = None, N: int = 80, deep: bool = False, omega: float = 1.0,
           progress: Callable[[RowResult], None] | None = None, deep_D_max: int = 132) -> list[RowResult]:
    """Row 0 by RPM (bound state), rows 1-10 by RR; ``deep`` adds RPM type-a sequences."""
    params = params or PotentialParams("0.8", "0.1")
    refs = reference_table(1)
    row0 = refs[0]
    t0 = time.perf_counter()
    seq = bound_state(params, 0, float(row0.re))
    first = RowResult(1, 0, "rpm", seq.converged, seq.D_final, seq.err_estimate, seq.status, row0, 120,
                      time.perf_counter() - t0)
    out = [first]
    if progress:
        progress(first)
    for row in rr_table1_rows(params, N, range(1, len(refs)), omega=omega):
        out.append(row)
        if progress:
            progress(row)
    if deep:
        partners = {r.n: r for r in reference_table(2)}
        for ref in refs[1:]:
            row = table1_deep_row(params, ref, partners[ref.n], deep_D_max)
            out.append(row)
            if progress:
                progress(row)
    return out


def table1_deep_row(params: PotentialParams, ref: ReferenceRow, partner: ReferenceRow,
                    D_max: int = 132) -> RowResult:
    """RPM type-a sequence; the acceptance radius keeps it off the nearby type-b root."""
    target = ref.E
    sep = abs(target - partner.E)
    run = RpmRun(s=ref.n % 2, D_min=max(5, ref.n), D_max=D_max, digits=working_digits(D_max, abs(target)),
                 tol=1e-12, restarts=D_max)
    t0 = time.perf_counter()
    seq = rpm_sequence(params, run, target, accept=_near(target, sep / 3))
    return RowResult(1, ref.n, "rpm-deep", seq.converged, seq.D_final, seq.err_estimate, seq.status, ref,
                     run.digits, time.perf_counter() - t0)


# ---------------------------------------------------------------- partner pairs, slopes

@dataclass
class PartnerPair:
    s: int
    bound: HankelSequence
    resonance: HankelSequence

    @property
    def gap(self) -> float:
        return abs(float(self.resonance.converged.real - self.bound.converged.real))

    @property
    def width(self) -> float:
        return abs(float(self.resonance.converged.imag))


def partner_pair(params: PotentialParams, s: int, bound_seed: float, resonance_seed: complex,
                 D_max: int = 34, digits: int = 160) -> PartnerPair:
    """A bound state and the near-real type-b root next to it.

    The two sit a distance ~|Im E_b| apart, inside a cluster of spurious real
    roots, so the bound-state sequence refuses moves larger than half the
    seed separation and the resonance is tracked from small D where its root
    is isolated.
    """
    _, bound_seed = polished_seed(params, s, bound_seed)
    sep = abs(complex(resonance_seed) - bound_seed)
    bs = bound_state(params, s, bound_seed, D_max=max(D_max, 40), digits=max(digits, 200),
                     tol=1e-14, max_shift=sep / 2)
    run = RpmRun(s=s, D_min=8, D_max=D_max, digits=digits, tol=1e-20, restarts=2)
    res = rpm_sequence(params, run, resonance_seed,
                       accept=_near(complex(resonance_seed), 1e-2, min_abs_im=1e-3 * abs(complex(resonance_seed).imag)))
    return PartnerPair(s, bs, res)


@dataclass
class Slope:
    label: str
    J: float
    value: float  # dE/dJ of the real part
    abs_im: float | None = None  # d|Im E|/dJ for resonances
    energies: tuple = field(default_factory=tuple)


def bound_slope(params: PotentialParams, s: int, seed: float, dJ: float = 1e-3, **kw) -> Slope:
    """Central difference of the bound-state energy in J.

    ``seed`` picks the level at J; at J +- dJ the same level is re-seeded
    from the variational spectrum.
    """
    if not dJ > 0 or float(params.J) - dJ <= 0:
        raise ValueError("need dJ > 0 and J - dJ > 0")
    k, _ = polished_seed(params, s, seed)
    E = []
    for sign in (1, -1):
        p = shifted(params, sign * Decimal(str(dJ)))
        seq = bound_state(p, s, lowest_levels(p, 80, s, k + 1)[k], **kw)
        if seq.converged is None:
            raise ArithmeticError(f"bound state at J{'+' if sign > 0 else '-'}dJ did not converge")
        E.append(seq.converged.real)
    return Slope(f"bound s={s}", float(params.J), float((E[0] - E[1]) / (2 * dJ)), energies=tuple(E))


def resonance_slope(params: PotentialParams, s: int, bound_seed: float, resonance_seed: complex,
                    dJ: float = 1e-3) -> Slope:
    """Central differences of Re E and |Im E| for a type-b partner.

    At J +- dJ the resonance seed is the shifted bound state plus the
    offset E_b - E_bs found at J, since the root moves with its partner.
    """
    if not dJ > 0 or float(params.J) - dJ <= 0:
        raise ValueError("need dJ > 0 and J - dJ > 0")
    pair = partner_pair(params, s, bound_seed, resonance_seed)
    if pair.bound.converged is None or pair.resonance.converged is None:
        raise ArithmeticError("partner pair at J did not converge")
    k, _ = polished_seed(params, s, float(pair.bound.converged.real))
    offset = complex(pair.resonance.converged) - float(pair.bound.converged.real)
    res = []
    for sign in (1, -1):
        p = shifted(params, sign * Decimal(str(dJ)))
        E_bs = float(lowest_levels(p, 80, s, k + 1)[k])
        pp = partner_pair(p, s, E_bs, E_bs + offset)
        if pp.resonance.converged is None:
            raise ArithmeticError("shifted resonance did not converge")
        res.append(pp.resonance.converged)
    d_re = float((res[0].real - res[1].real) / (2 * dJ))
    d_im = float((abs(res[0].imag) - abs(res[1].imag)) / (2 * dJ))
    return Slope(f"type_b s={s}", float(params.J), d_re, d_im, tuple(res))


# ---------------------------------------------------------------- figures

@dataclass
class FigPoint:
    J: float
    E: complex | None
    status: str
    theta_star: float | None = None


def lowest_levels(params: PotentialParams, N: int, parity: int, count: int = 1, omega: float = 1.0) -> np.ndarray:
    """Lowest theta = 0 Rayleigh-Ritz levels in one parity block."""
    H = build_rotated_hamiltonian(RotationSetup(params, 0.0, N, omega, parity))
    return np.sort(np.linalg.eigvalsh(H.real))[:count]


def im_vs_j(lam: str | float, J_values: Iterable, index: int = 0, N: int = 80, omega: float = 1.0,
            theta_min: float = 0.85, theta_max: float = 0.95, step: float = 0.005) -> list[FigPoint]:
    """Signed Im of the ``index``-th type-b plateau as J varies.

    The level is identified by the ``index//2``-th theta = 0 level of parity
    ``index % 2``; a plateau further than 1% from it counts as missing.
    """
    parity, k = index % 2, index // 2
    out = []
    for J in J_values:
        params = PotentialParams(J, lam)
        target = lowest_levels(params, N, parity, k + 1, omega)[k]
        traj = theta_scan(params, N, theta_min, theta_max, step, omega=omega, parity=parity)
        p = traj.nearest_plateau(target)
        if p is None or abs(p.E - target) > 1e-2 * (1 + abs(target)) or p.theta_star <= THETA_CRIT:
            out.append(FigPoint(float(J), None, "no_plateau"))
        else:
            out.append(FigPoint(float(J), p.E, "ok", p.theta_star))
    return out


def sign_changes(values: Iterable[float]) -> int:
    signs = [np.sign(v) for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)
