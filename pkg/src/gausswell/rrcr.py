"""Complex-rotation Rayleigh-Ritz in the harmonic-oscillator basis.

The rotated operator e^{-2i theta} p^2 + V(e^{i theta} x) is represented in
the eigenbasis of p^2 + x^2 (optionally with length scale ``omega`` and
optionally restricted to one parity), diagonalized densely for each angle,
and eigenvalue paths are followed in theta to find stationary points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

from .model import PotentialParams

THETA_CRIT = math.pi / 4


class QuadratureError(ArithmeticError):
    pass


class EigenSolverError(ArithmeticError):
    pass


class MatchingError(RuntimeError):
    def __init__(self, message: str, theta: float):
        super().__init__(message)
        self.theta = theta


@dataclass(frozen=True)
class RotationSetup:
    params: PotentialParams
    theta: float
    N: int
    omega: float = 1.0
    parity: int | None = None  # None: both parities; 0/1: even/odd functions only

    def __post_init__(self) -> None:
        if not 0 <= self.theta < math.pi / 2:
            raise ValueError("rotation angle must lie in [0, pi/2)")
        if self.N < 2:
            raise ValueError("basis size must be >= 2")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.parity not in (None, 0, 1):
            raise ValueError("parity must be None, 0 or 1")
        alpha = float(self.params.lam) * complex(math.cos(2 * self.theta), math.sin(2 * self.theta))
        if (alpha / self.omega).real <= -1:
            raise ValueError("Gaussian matrix elements diverge for this theta/omega")

    @property
    def past_critical(self) -> bool:
        return self.theta > THETA_CRIT


def basis_indices(N: int, parity: int | None = None) -> np.ndarray:
    """Oscillator quantum numbers spanned by an N-function basis."""
    if parity is None:
        return np.arange(N)
    return parity + 2 * np.arange(N)


def ho_kinetic_and_x2(N: int, omega: float = 1.0, parity: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of p^2 and x^2 in the oscillator basis.

    With the basis phi_n(sqrt(omega) x), x^2 carries a factor 1/omega and
    p^2 a factor omega; p^2 + x^2 is diag(2n+1) at omega = 1.
    """
    if N < 2:
        raise ValueError("basis size must be >= 2")
    idx = basis_indices(N, parity)
    n = np.arange(idx[-1] + 1)
    diag = (2 * n + 1) / 2.0
    off = np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2.0
    X2 = np.diag(diag) + np.diag(off, 2) + np.diag(off, -2)
    P2 = np.diag(diag) - np.diag(off, 2) - np.diag(off, -2)
    sel = np.ix_(idx, idx)
    return omega * P2[sel], X2[sel] / omega


def _weighted_hermite(n_top: int, x: np.ndarray, sqrt_w: np.ndarray) -> np.ndarray:
    """Rows n = 0..n_top of h_n(x) sqrt(w), h_n the normalized Hermite polynomials / pi^{1/4}."""
    u = np.empty((n_top + 1, x.size))
    u[0] = np.pi ** -0.25 * sqrt_w
    if n_top >= 1:
        u[1] = math.sqrt(2.0) * x * u[0]
    for n in range(2, n_top + 1):
        u[n] = math.sqrt(2.0 / n) * x * u[n - 1] - math.sqrt((n - 1) / n) * u[n - 2]
    return u


def _gaussian_quadrature(idx: np.ndarray, alpha: complex, Q: int) -> tuple[np.ndarray, np.ndarray]:
    # nodes rescaled by b = sqrt(1 + Re alpha) so the real part of the extra
    # Gaussian is absorbed into the Hermite weight; only exp(-i Im(alpha) x^2)
    # is left for the quadrature to resolve
    t, w = roots_hermite(Q)
    b = math.sqrt(1.0 + alpha.real)
    x = t / b
    sqrt_w = np.sqrt(w / b)
    u = _weighted_hermite(int(idx[-1]), x, sqrt_w)[idx]
    phase = np.exp(-1j * alpha.imag * x * x)
    G0 = (u * phase) @ u.T
    G2 = (u * (phase * x * x)) @ u.T
    odd = (idx[:, None] + idx[None, :]) % 2 == 1
    G0[odd] = 0
    G2[odd] = 0
    return G0, G2


def ho_gaussian_elements(N: int, omega: float, alpha: complex, parity: int | None = None,
                         check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """<m|exp(-alpha x^2)|n> and <m|x^2 exp(-alpha x^2)|n> by Gauss-Hermite quadrature.

    Order Q = 2 n_top + 32 with n_top the highest quantum number; with
    ``check`` the result is compared against order Q + 16 and a relative
    disagreement above 1e-12 raises :class:`QuadratureError`.
    """
    alpha = complex(alpha) / omega
    if alpha.real <= -1:
        raise ValueError("need Re(alpha/omega) > -1 for convergent matrix elements")
    idx = basis_indices(N, parity)
    Q = 2 * int(idx[-1] + 1) + 32
    G0, G2 = _gaussian_quadrature(idx, alpha, Q)
    if check:
        H0, H2 = _gaussian_quadrature(idx, alpha, Q + 16)
        for a, b_ in ((G0, H0), (G2, H2)):
            err = np.abs(a - b_).max() / np.abs(b_).max()
            if err > 1e-12:
                raise QuadratureError(f"quadrature self-check failed: relative change {err:.2e} from Q={Q} to Q+16")
    return G0, G2 / omega


def build_rotated_hamiltonian(setup: RotationSetup) -> np.ndarray:
    """Matrix of e^{-2i theta} p^2 + V(e^{i theta} x); complex symmetric."""
    return _rotated(setup.params, setup.theta, setup.N, setup.omega, setup.parity)


def _rotated(params: PotentialParams, theta: float, N: int, omega: float, parity) -> np.ndarray:
    J = float(params.J)
    lam = float(params.lam)
    rot = complex(math.cos(2 * theta), math.sin(2 * theta))
    P2, _ = ho_kinetic_and_x2(N, omega, parity)
    G0, G2 = ho_gaussian_elements(N, omega, lam * rot, parity)
    M = P2 / rot + rot * G2 - 2 * J * G0 + 2 * J * np.eye(N)
    return (M + M.T) / 2  # exact symmetry; quadrature already symmetric to rounding


def build_companion_hamiltonian(params: PotentialParams, N: int, omega: float = 1.0,
                                parity: int | None = None) -> np.ndarray:
    """Matrix of p^2 + (x^2 + 2J) exp(lam x^2) - 2J, the operator -U H U^{-1} at theta = pi/2."""
    J = float(params.J)
    lam = float(params.lam)
    P2, _ = ho_kinetic_and_x2(N, omega, parity)
    G0, G2 = ho_gaussian_elements(N, omega, -lam, parity)
    M = P2 + G2 + 2 * J * G0 - 2 * J * np.eye(N)
    return ((M + M.T) / 2).real


def eigensolve_dense(matrix) -> np.ndarray:
    """All eigenvalues of a dense complex matrix (LAPACK Hessenberg + shifted QR)."""
    A = np.asarray(matrix, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigensolver needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"QR iteration failed to converge: {exc}") from exc


@dataclass
class Plateau:
    path: int
    theta_star: float
    E: complex
    stability: float
    window: tuple[float, float]

    @property
    def half_width(self) -> float:
        return (self.window[1] - self.window[0]) / 2


@dataclass
class ThetaTrajectory:
    thetas: np.ndarray
    eigenvalues: np.ndarray  # (n_theta, n_eig), raw solver order
    paths: np.ndarray  # (n_paths, n_theta), matched
    stability: np.ndarray  # (n_paths, n_theta), |dE/dtheta|, nan at the ends
    plateaus: list[Plateau] = field(default_factory=list)
    N: int = 0
    omega: float = 1.0
    parity: int | None = None

    def nearest_plateau(self, target: complex, below_critical: bool | None = None) -> Plateau | None:
        cands = [p for p in self.plateaus
                 if below_critical is None or (p.theta_star < THETA_CRIT) == below_critical]
        if not cands:
            return None
        return min(cands, key=lambda p: abs(p.E - target))


def _match(prev: np.ndarray, cur: np.ndarray, radius: np.ndarray) -> tuple[np.ndarray, int]:
    """Greedy assignment in order of increasing displacement.

    Returns ``order`` such that cur[order[k]] continues prev[k], and the
    number of assignments longer than the per-path radius.
    """
    dist = np.abs(prev[:, None] - cur[None, :])
    n = prev.size
    order = np.full(n, -1)
    taken = np.zeros(cur.size, dtype=bool)
    unmatched = 0
    for flat in np.argsort(dist, axis=None):
        i, j = divmod(int(flat), cur.size)
        if order[i] >= 0 or taken[j]:
            continue
        order[i] = j
        taken[j] = True
        if dist[i, j] > radius[i]:
            unmatched += 1
        if (order >= 0).all():
            break
    return order, unmatched


def _follow(prev, cur, th0, th1, solve, threshold, max_unmatched, depth):
    gaps = np.abs(prev[:, None] - prev[None, :])
    np.fill_diagonal(gaps, np.inf)
    # a move is trustworthy if it is within the rotation-driven speed
    # (~2|E - 2J| per radian) or shorter than the gap to the nearest other
    # eigenvalue
    radius = np.maximum(3 * (th1 - th0) * (np.abs(prev - threshold) + 1.0), gaps.min(axis=1))
    order, unmatched = _match(prev, cur, radius)
    if unmatched <= max_unmatched * prev.size:
        return cur[order]
    if depth <= 0:
        raise MatchingError(
            f"{unmatched} of {prev.size} eigenvalues unmatched at theta={th1:.4f}; step too coarse", float(th1))
    mid = 0.5 * (th0 + th1)
    half = _follow(prev, solve(mid), th0, mid, solve, threshold, max_unmatched, depth - 1)
    return _follow(half, cur, mid, th1, solve, threshold, max_unmatched, depth - 1)


def theta_scan(params: PotentialParams, N: int, theta_min: float, theta_max: float, step: float = 0.005,
               omega: float = 1.0, parity: int | None = None, max_unmatched: float = 0.2,
               refine: int = 4) -> ThetaTrajectory:
    """Eigenvalues over a theta grid, matched into paths, with stationary points.

    When more than ``max_unmatched`` of the eigenvalues cannot be followed
    across a grid step, the step is bisected (at most ``refine`` times) with
    extra eigensolves that are used for matching only; if that still fails,
    :class:`MatchingError` is raised.
    """
    if not 0 <= theta_min <= theta_max < math.pi / 2:
        raise ValueError("need 0 <= theta_min <= theta_max < pi/2")
    if step <= 0:
        raise ValueError("theta step must be positive")
    count = int(round((theta_max - theta_min) / step)) + 1
    thetas = theta_min + step * np.arange(count)
    thetas[-1] = min(thetas[-1], theta_max) if count > 1 else theta_min
    eig = np.array([eigensolve_dense(_rotated(params, th, N, omega, parity)) for th in thetas])

    paths = np.empty((eig.shape[1], count), dtype=complex)
    paths[:, 0] = eig[0]
    solve = lambda th: eigensolve_dense(_rotated(params, th, N, omega, parity))  # noqa: E731
    for i in range(1, count):
        paths[:, i] = _follow(paths[:, i - 1], eig[i], thetas[i - 1], thetas[i], solve,
                              params.threshold, max_unmatched, refine)
    stability = np.full(paths.shape, np.nan)
    if count >= 3:
        stability[:, 1:-1] = np.abs(paths[:, 2:] - paths[:, :-2]) / (thetas[2:] - thetas[:-2])
    traj = ThetaTrajectory(thetas, eig, paths, stability, N=N, omega=omega, parity=parity)
    traj.plateaus = find_plateaus(traj)
    return traj


def find_plateaus(traj: ThetaTrajectory) -> list[Plateau]:
    """Interior local minima of |dE/dtheta| on every path."""
    out = []
    th = traj.thetas
    for k, row in enumerate(traj.stability):
        for i in range(1, th.size - 1):
            s = row[i]
            if np.isnan(s):
                continue
            left = row[i - 1] if not np.isnan(row[i - 1]) else np.inf
            right = row[i + 1] if not np.isnan(row[i + 1]) else np.inf
            if s <= left and s < right:
                lo = hi = i
                while lo - 1 >= 1 and not np.isnan(row[lo - 1]) and row[lo - 1] <= 10 * s:
                    lo -= 1
                while hi + 1 < th.size - 1 and not np.isnan(row[hi + 1]) and row[hi + 1] <= 10 * s:
                    hi += 1
                out.append(Plateau(k, float(th[i]), complex(traj.paths[k, i]), float(s),
                                   (float(th[lo]), float(th[hi]))))
    return out


@dataclass
class ResonanceRecord:
    label: str  # bound | type_a | type_b
    E: object  # complex or gmpy2 mpc
    method: str  # rpm | rr
    uncertainty: float
    theta_star: float | None = None
    n: int | None = None
    flag: str | None = None

    def __post_init__(self) -> None:
        if self.label not in ("bound", "type_a", "type_b"):
            raise ValueError(f"unknown label {self.label!r}")
        if self.method not in ("rpm", "rr"):
            raise ValueError(f"unknown method {self.method!r}")


def classify_poles(trajectory: ThetaTrajectory, params: PotentialParams,
                   bound_tol: float = 1e-6) -> list[ResonanceRecord]:
    """Label plateaus: bound below threshold with vanishing width, else type a/b by theta*.

    A bound state is a plateau under the threshold whose imaginary part and
    theta-drift are both below ``bound_tol``.
    """
    records = []
    for p in trajectory.plateaus:
        unc = p.stability * max(p.half_width, float(np.diff(trajectory.thetas[:2])[0]) / 2
                                if trajectory.thetas.size > 1 else 0.0)
        flag = None
        if abs(p.E.imag) <= bound_tol and p.stability <= bound_tol and p.E.real < params.threshold:
            label = "bound"
            unc = max(unc, abs(p.E.imag))
        elif p.theta_star < THETA_CRIT:
            label = "type_a"
            if p.window[1] > THETA_CRIT:
                flag = "window straddles pi/4"
        elif p.theta_star > THETA_CRIT:
            label = "type_b"
            if p.window[0] < THETA_CRIT:
                flag = "window straddles pi/4"
        else:
            label, flag = "type_a", "theta* at pi/4"
        records.append(ResonanceRecord(label, p.E, "rr", unc, theta_star=p.theta_star, flag=flag))
    return records
