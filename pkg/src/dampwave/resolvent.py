"""Resolvent norms of the stationary damped operator on the circle.

The operator is P(h, E) = -D2 + (i/h) W - E on the 2 pi periodic grid, with
D2 the exact Fourier second derivative.  Its inverse norm 1/sigma_min is
computed either by a dense SVD or by block inverse subspace iteration on
(P^* P)^-1 using one LU factorization.  For y-invariant damping on the torus
the 2-D stationary operator -Laplacian + i lam W - lam^2 splits over
y-frequencies n into 1-D problems at h = 1/lam, E = lam^2 - n^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .damping_models import DampingProfile
from .rate_calculus import GrowthExpr, Z, envelope_inverse

DENSE_MAX_N = 1024
MAX_N = 4096


class SolverFailure(RuntimeError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def grid(N: int) -> np.ndarray:
    return -math.pi + 2 * math.pi * np.arange(N) / N


def frequencies(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, 1.0 / N)


@lru_cache(maxsize=8)
def _d2(N: int) -> np.ndarray:
    k = frequencies(N)
    D = np.fft.ifft(-(k ** 2)[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0).real
    D.setflags(write=False)
    return D


def damping_values(profile, x: np.ndarray) -> np.ndarray:
    """Samples of a DampingProfile (trace at y = 0), a callable, or a constant."""
    if isinstance(profile, DampingProfile):
        return np.asarray(profile.eval(x, 0.0), dtype=float)
    if callable(profile):
        return np.asarray(profile(x), dtype=float) * np.ones_like(x)
    return float(profile) * np.ones_like(x)


def operator_matrix(N: int, h: float, E: float, W: np.ndarray) -> np.ndarray:
    A = (-_d2(N)).astype(complex)
    A[np.diag_indices(N)] += 1j * W / h - E
    return A


@dataclass(frozen=True)
class StationaryProblem:
    h: float
    E: float
    profile: object
    N: int = 512

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ValueError("h must lie in (0, 1)")
        if self.N < 256 or not _is_pow2(self.N):
            raise ValueError("N must be a power of two, at least 256")
        if self.N > MAX_N:
            raise ValueError(f"N above {MAX_N} is not supported by the dense factorization")

    @property
    def x(self) -> np.ndarray:
        return grid(self.N)

    def W(self) -> np.ndarray:
        return damping_values(self.profile, self.x)

    def matrix(self) -> np.ndarray:
        return operator_matrix(self.N, self.h, self.E, self.W())

    def apply(self, u: np.ndarray) -> np.ndarray:
        """P u computed with FFTs, independent of the assembled matrix."""
        k = frequencies(self.N)
        d2u = np.fft.ifft(-(k ** 2) * np.fft.fft(u))
        return -d2u + (1j * self.W() / self.h - self.E) * u


@dataclass(frozen=True)
class ResolventSample:
    h: float
    E: float
    norm: float
    method: str
    certified_residual: float
    iterations: int = 0
    u: np.ndarray | None = field(default=None, repr=False, compare=False)
    f: np.ndarray | None = field(default=None, repr=False, compare=False)


def _start_block(N: int, b: int) -> np.ndarray:
    x = grid(N)
    cols = [np.ones(N)]
    j = 1
    while len(cols) < b:
        cols.append(np.cos(j * x))
        if len(cols) < b:
            cols.append(np.sin(j * x + 0.5))
        j += 1
    return np.array(cols).T.astype(complex)


def _norm_lower(A) -> float:
    return float(np.max(np.linalg.norm(A, axis=0)))     # lower bound for ||A||_2


def _pair_residual(A, sigma, v, u, scale=None) -> float:
    """Backward error of (sigma, v, u): A v = sigma u and A^* u = sigma v."""
    r1 = A @ v - sigma * u
    r2 = A.conj().T @ u - sigma * v
    if scale is None:
        scale = _norm_lower(A)
    return float(math.hypot(np.linalg.norm(r1), np.linalg.norm(r2)) / scale)


def _dense(A, want_vectors: bool):
    if not want_vectors:
        s = sla.svdvals(A)
        return s[-1], 0.0, None, None
    U, s, Vh = sla.svd(A)
    v, u = Vh[-1].conj(), U[:, -1]
    return s[-1], _pair_residual(A, s[-1], v, u), v, u


def _iterative(A, tol: float, max_iter: int, block: int, res_tol: float = 1e-10):
    N = A.shape[0]
    scale = _norm_lower(A)
    lu = sla.lu_factor(A, check_finite=False)
    Q, _ = np.linalg.qr(_start_block(N, block))
    prev = None
    best = None
    for it in range(1, max_iter + 1):
        Y = sla.lu_solve(lu, Q, trans=2, check_finite=False)
        Zm = sla.lu_solve(lu, Y, check_finite=False)
        Q, _ = np.linalg.qr(Zm)
        # Q approximates right singular vectors of A, the top ones of A^-*
        M = sla.lu_solve(lu, Q, trans=2, check_finite=False)
        U, s, Wh = np.linalg.svd(M, full_matrices=False)
        best = s[0]
        if prev is not None and abs(s[0] - prev) <= tol * s[0]:
            # the value settles long before the vectors do
            u = U[:, 0]
            v = Q @ Wh[0].conj()
            sigma = 1.0 / s[0]
            res = _pair_residual(A, sigma, v, u, scale)
            if res <= res_tol:
                return sigma, res, v, u, it
        prev = s[0]
    raise SolverFailure(f"inverse iteration stalled after {max_iter} steps",
                        best=None if best is None else 1.0 / best)


def resolvent_norm(problem: StationaryProblem, method: str = "auto", tol: float = 1e-10,
                   max_iter: int = 500, block: int = 4, vectors: bool = False) -> ResolventSample:
    """||P(h, E)^-1|| = 1 / sigma_min of the assembled operator.

    ``method``: "dense_svd", "iterative", or "auto" (dense up to N = 1024).
    The iterative path always returns the singular pair; ``vectors`` asks the
    dense path for it too.
    """
    A = problem.matrix()
    if method == "auto":
        method = "dense_svd" if problem.N <= DENSE_MAX_N else "iterative"
    if method == "dense_svd":
        sigma, res, v, u = _dense(A, vectors)
        its = 0
    elif method == "iterative":
        sigma, res, v, u, its = _iterative(A, tol, max_iter, block)
        if res > 1e-8:
            raise SolverFailure(f"certified residual {res:.3g} above 1e-8", best=1.0 / sigma)
    else:
        raise ValueError(f"unknown method {method!r}")
    f = None if v is None else sigma * u
    return ResolventSample(problem.h, problem.E, 1.0 / sigma, method, res, its, v, f)


# ---------------------------------------------------------------------------
# sizing


def resolution_scale(profile, h: float) -> float:
    """rho(h) = R^-1(h) for R(z) = z^2 V(z), the width of the damping transition."""
    if isinstance(profile, DampingProfile):
        inv = envelope_inverse(Z(2) * profile.growth)
        return float(inv.eval(h))
    return 1.0


def auto_N(profile, h: float, points: float = 8.0) -> int:
    """Smallest power of two >= points / rho(h), at least 256, at most 4096."""
    rho = resolution_scale(profile, h)
    need = points / rho if rho > 0 else math.inf
    N = 256
    while N < need and N < MAX_N:
        N *= 2
    return N


# ---------------------------------------------------------------------------
# sup over the spectral parameter


@dataclass(frozen=True)
class SupResult:
    h: float
    E_star: float
    norm: float
    N: int
    method: str
    window: tuple
    evaluations: int
    lower_bound: bool = True   # a sampled sup, never a certified one

    def __iter__(self):
        return iter((self.E_star, self.norm))


def coarse_grid(E_min: float, E_max: float, n: int) -> np.ndarray:
    """Half linear, half logarithmic over (1, E_max]."""
    lin = np.linspace(E_min, E_max, n - n // 2)
    logs = np.geomspace(1.0, E_max, n // 2) if E_max > 1 else np.array([])
    return np.unique(np.concatenate([lin, logs]))


def eigen_seeds(N: int, h: float, W: np.ndarray, E_min: float, E_max: float, count: int = 8):
    """Real parts (and imaginary parts) of the least damped eigenvalues in the window."""
    ev = sla.eigvals(operator_matrix(N, h, 0.0, W), check_finite=False)
    ev = ev[(ev.real >= E_min) & (ev.real <= E_max)]
    order = np.argsort(ev.imag)
    return [(float(e.real), float(abs(e.imag))) for e in ev[order[:count]]]


def _golden_max(f, a: float, b: float, iters: int):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def sup_over_E(h: float, profile, E_min: float = -1.0, E_max: float | None = None,
               coarse_n: int = 64, refine_iters: int = 40, N: int | None = None,
               method: str = "iterative", seeds: bool = True, workers: int = 1) -> SupResult:
    """Sampled sup over E in [E_min, E_max] of ||P(h, E)^-1||.

    Coarse scan plus eigenvalue seeds (the peaks sit at real parts of weakly
    damped eigenvalues and are much narrower than any affordable grid), then
    golden-section refinement around the three best points.
    """
    if coarse_n < 64:
        raise ValueError("coarse_n must be at least 64")
    if E_max is None:
        E_max = 1.0 / h
    if N is None:
        N = auto_N(profile, h)
    # energies above the resolved band (|k| <= N/3) are discretisation artefacts
    E_max = min(E_max, (N / 3.0) ** 2)
    W = damping_values(profile, grid(N))
    count = [0]

    def norm(E):
        count[0] += 1
        prob = StationaryProblem(h, float(E), profile, N)
        try:
            return resolvent_norm(prob, method).norm
        except SolverFailure as err:
            if N <= DENSE_MAX_N:
                return resolvent_norm(prob, "dense_svd").norm
            return err.best

    cand = {float(E): None for E in coarse_grid(E_min, E_max, coarse_n)}
    width = {}
    if seeds:
        for re, im in eigen_seeds(N, h, W, E_min, E_max):
            cand[re] = None
            width[re] = im
    keys = sorted(cand)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        vals = list(pool.map(norm, keys))
    table = dict(zip(keys, vals))
    top = sorted(keys, key=lambda e: -table[e])[:3]
    best_E, best = max(table.items(), key=lambda kv: kv[1])
    for E in top:
        i = keys.index(E)
        lo = keys[i - 1] if i > 0 else E
        hi = keys[i + 1] if i + 1 < len(keys) else E
        if E in width:
            r = 3 * width[E] + 1e-6 * (1 + abs(E))
            lo, hi = max(lo, E - r), min(hi, E + r)
        if hi <= lo:
            continue
        Er, vr = _golden_max(norm, lo, hi, refine_iters)
        if vr > best:
            best_E, best = Er, vr
    return SupResult(h, float(best_E), float(best), N, method, (E_min, E_max), count[0])


# ---------------------------------------------------------------------------
# two dimensions


def admissible_modes(lam: float, E_max: float | None = None) -> list:
    """Nonnegative y-frequencies n with lam^2 - n^2 in [-1, E_max] (default E_max = lam)."""
    if E_max is None:
        E_max = lam
    lo = max(0.0, lam * lam - E_max)
    hi = lam * lam + 1
    return [n for n in range(int(math.isqrt(int(hi))) + 2) if lo <= n * n <= hi]


def two_d_norm(lam: float, profile, E_max: float | None = None, N: int | None = None,
               method: str = "iterative") -> float:
    """||(-Laplacian + i lam W - lam^2)^-1|| for y-invariant W over the admissible modes."""
    if lam < 1:
        raise ValueError("lam must be at least 1")
    if isinstance(profile, DampingProfile) and not profile.geometry.y_invariant:
        raise ValueError("the Fourier reduction needs y-invariant damping")
    h = 1.0 / lam
    if N is None:
        N = auto_N(profile, min(h, 0.5))
    modes = admissible_modes(lam, E_max)
    if not modes:
        raise ValueError("no admissible y-frequency")
    return max(resolvent_norm(StationaryProblem(min(h, 1 - 1e-12), lam * lam - n * n, profile, N),
                              method).norm for n in modes)


def two_d_dense_norm(lam: float, W2: Callable, Nx: int = 64, Ny: int = 16) -> float:
    """Oracle: sigma_min of the full 2-D spectral operator on an Nx x Ny grid."""
    x, y = grid(Nx), grid(Ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    L = np.kron(_d2_any(Nx), np.eye(Ny)) + np.kron(np.eye(Nx), _d2_any(Ny))
    A = (-L).astype(complex)
    A[np.diag_indices_from(A)] += 1j * lam * W2(X, Y).ravel() - lam * lam
    return 1.0 / sla.svdvals(A)[-1]


def one_d_mode_norms(lam: float, W1: Callable, Nx: int, modes) -> list:
    """1-D norms at h = 1/lam, E = lam^2 - n^2 on an Nx grid (no size restriction)."""
    x = grid(Nx)
    A0 = (-_d2_any(Nx)).astype(complex)
    A0[np.diag_indices(Nx)] += 1j * lam * W1(x)
    return [1.0 / sla.svdvals(A0 - (lam * lam - n * n) * np.eye(Nx))[-1] for n in modes]


def _d2_any(N: int) -> np.ndarray:
    return np.asarray(_d2(N))


@dataclass(frozen=True)
class CrossCheck:
    lam: float
    lam_matched: float
    n: int
    E_star: float
    one_d: float
    two_d: float

    @property
    def ratio(self) -> float:
        return self.two_d / self.one_d


def fourier_cross_check(lam: float, profile, **sup_kw) -> CrossCheck:
    """Compare the 1-D sup over E at h = 1/lam with the 2-D norm at the matched frequency.

    The 2-D operator only sees E = lam^2 - n^2 for integer n, so the peak E*
    found in 1-D is realised by moving to lam' = sqrt(E* + n^2) with n the
    integer closest to sqrt(lam^2 - E*).
    """
    res = sup_over_E(1.0 / lam, profile, **sup_kw)
    n = int(round(math.sqrt(max(lam * lam - res.E_star, 0.0))))
    lam2 = math.sqrt(res.E_star + n * n)
    two = two_d_norm(lam2, profile, N=res.N)
    return CrossCheck(lam, lam2, n, res.E_star, res.norm, two)


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class ScalingReport:
    pow_hat: float
    log_pow_hat: float
    predicted_pow: float
    predicted_log_pow: float
    residual_rms: float
    passed: bool
    pow_tol: float = 0.05
    log_tol: float = 0.5


def scaling_report(samples, predicted: GrowthExpr, pow_tol: float = 0.05,
                   log_tol: float = 0.5) -> ScalingReport:
    """Fit ln norm = k + a ln h + b ln ln(1/h) and compare with predicted h^a ln(1/h)^b."""
    h = np.array([s[0] for s in samples], dtype=float)
    y = np.log(np.array([s[1] for s in samples], dtype=float))
    if len(h) < 6:
        raise ValueError("need at least 6 values of h")
    X = np.column_stack([np.ones_like(h), np.log(h), np.log(np.log(1 / h))])
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    rms = float(np.sqrt(np.mean((y - X @ beta) ** 2)))
    pp, pl = float(predicted.pow), float(predicted.log_pow)
    ok = abs(beta[1] - pp) <= pow_tol and abs(beta[2] - pl) <= log_tol
    return ScalingReport(float(beta[1]), float(beta[2]), pp, pl, rms, bool(ok), pow_tol, log_tol)
