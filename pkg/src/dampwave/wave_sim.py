"""Damped wave evolution on the torus for y-invariant damping.

A solution u(x, y, t) = sum_n u_n(x, t) e^{iny} splits into independent
one-dimensional systems

    u_n' = v_n,   v_n' = (d_xx - n^2) u_n - W v_n,

each advanced by the implicit midpoint rule on a Fourier grid in x.
Writing s = v_k + v_{k+1}, one step reduces to the real SPD solve

    (I - dt^2/4 L + dt/2 W) s = 2 v_k + dt L u_k,   L = d_xx - n^2,

and the discrete energy obeys E_{k+1} - E_k = -dt int W |s/2|^2 exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .damping_models import thin_profile
from .quasimodes import build_quasimode, residual as quasimode_residual
from .rate_calculus import GrowthExpr
from .resolvent import _d2, damping_values, frequencies, grid

TWO_PI = 2.0 * math.pi


class SolveFailure(RuntimeError):
    pass


@dataclass
class WaveState:
    """Displacement and velocity per y-mode, sampled on the x grid."""
    modes: dict
    time: float = 0.0

    @property
    def N_x(self) -> int:
        return len(next(iter(self.modes.values()))[0])

    def copy(self) -> "WaveState":
        return WaveState({n: (u.copy(), v.copy()) for n, (u, v) in self.modes.items()}, self.time)


class WaveSystem:
    """Damping sampled on an N_x grid plus cached per-mode factorisations."""

    def __init__(self, profile, N_x: int):
        if N_x < 8 or N_x & (N_x - 1):
            raise ValueError("N_x must be a power of two >= 8")
        self.N_x = N_x
        self.x = grid(N_x)
        self.W = damping_values(profile, self.x)
        if np.any(self.W < 0) or not np.all(np.isfinite(self.W)):
            raise ValueError("damping must be finite and nonnegative")
        self.k2 = frequencies(N_x) ** 2
        self.dx = TWO_PI / N_x
        self._factors: dict = {}

    def max_dt(self, modes) -> float:
        """Accuracy bound 0.5 / (k_max^2 + n_max^2)^{1/2}."""
        n_max = max(abs(n) for n in modes)
        return 0.5 / math.hypot(self.N_x / 2, n_max)

    def _factor(self, n: int, dt: float):
        key = (abs(n), dt)
        if key not in self._factors:
            L = _d2(self.N_x) - n * n * np.eye(self.N_x)
            M = np.eye(self.N_x) - 0.25 * dt * dt * L + np.diag(0.5 * dt * self.W)
            try:
                self._factors[key] = linalg.cho_factor(M)
            except linalg.LinAlgError as e:
                raise SolveFailure(f"factorisation failed for mode {n}, dt={dt}") from e
        return self._factors[key]

    def apply_L(self, n: int, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft(-self.k2 * np.fft.fft(u)) - n * n * u

    def step_mode(self, n: int, u: np.ndarray, v: np.ndarray, dt: float):
        """One midpoint step; returns (u_new, v_new, s) with s = v + v_new."""
        rhs = 2.0 * v + dt * self.apply_L(n, u)
        cf = self._factor(n, dt)
        both = linalg.cho_solve(cf, np.column_stack([rhs.real, rhs.imag]))
        s = both[:, 0] + 1j * both[:, 1]
        return u + 0.5 * dt * s, s - v, s

    def mode_energy(self, n: int, u: np.ndarray, v: np.ndarray) -> float:
        grad2 = float(np.sum(self.k2 * np.abs(np.fft.fft(u)) ** 2)) / self.N_x
        rest = n * n * float(np.sum(np.abs(u) ** 2)) + float(np.sum(np.abs(v) ** 2))
        return math.pi * self.dx * (grad2 + rest)

    def weighted_l2(self, v: np.ndarray) -> float:
        """int_{T^2} W |v|^2 for a single y-mode."""
        return TWO_PI * self.dx * float(np.sum(self.W * np.abs(v) ** 2))

    def energy(self, state: WaveState) -> float:
        return math.fsum(self.mode_energy(n, *state.modes[n]) for n in sorted(state.modes))


def step(system: WaveSystem, state: WaveState, dt: float, check: bool = True) -> WaveState:
    if check and dt > system.max_dt(state.modes) * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds the accuracy bound {system.max_dt(state.modes):.3g}")
    out = {}
    for n in sorted(state.modes):
        u, v, _ = system.step_mode(n, *state.modes[n], dt)
        out[n] = (u, v)
    return WaveState(out, state.time + dt)


def energy(system: WaveSystem, state: WaveState) -> float:
    return system.energy(state)


def energy_identity_residual(system: WaveSystem, a: WaveState, b: WaveState, dt: float,
                             rule: str = "midpoint") -> float:
    """|E_b - E_a + dt int W |u_t|^2| / E_a with u_t at the midpoint or trapezoidal."""
    ea, eb = system.energy(a), system.energy(b)
    if rule == "midpoint":
        d = math.fsum(system.weighted_l2(0.5 * (a.modes[n][1] + b.modes[n][1])) for n in sorted(a.modes))
    elif rule == "trapezoid":
        d = math.fsum(0.5 * (system.weighted_l2(a.modes[n][1]) + system.weighted_l2(b.modes[n][1]))
                      for n in sorted(a.modes))
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return abs(eb - ea + dt * d) / ea


# -- trajectories ----------------------------------------------------------------

@dataclass
class Trajectory:
    state: WaveState
    dt: float
    t: np.ndarray = field(repr=False)
    E: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    trapezoid_residual: np.ndarray = field(repr=False)

    @property
    def monotone(self) -> bool:
        """Energy never increases beyond roundoff."""
        return bool(np.all(np.diff(self.E) <= 1e-13 * self.E[:-1]))

    def rows(self, every: int = 1) -> list:
        res = np.concatenate([[0.0], self.residual])
        return [{"t": float(self.t[i]), "E": float(self.E[i]), "E_identity_residual": float(res[i])}
                for i in range(0, len(self.t), every)]


def _evolve_mode(system, n, u, v, dt, steps):
    e = np.empty(steps + 1)
    d_mid = np.empty(steps)
    d_trap = np.empty(steps)
    e[0] = system.mode_energy(n, u, v)
    wv = system.weighted_l2(v)
    for k in range(steps):
        u, v_new, s = system.step_mode(n, u, v, dt)
        d_mid[k] = system.weighted_l2(0.5 * s)
        wv_new = system.weighted_l2(v_new)
        d_trap[k] = 0.5 * (wv + wv_new)
        v, wv = v_new, wv_new
        e[k + 1] = system.mode_energy(n, u, v)
    return u, v, e, d_mid, d_trap


def evolve(system: WaveSystem, state: WaveState, dt: float, steps: int, workers: int = 1,
           check: bool = True) -> Trajectory:
    """Advance ``steps`` midpoint steps; modes run independently, sums are ordered by n."""
    if steps < 1:
        raise ValueError("steps must be positive")
    if check and dt > system.max_dt(state.modes) * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds the accuracy bound {system.max_dt(state.modes):.3g}")
    ns = sorted(state.modes)
    jobs = [(system, n, *state.modes[n], dt, steps) for n in ns]
    if workers > 1:
        for n in ns:
            system._factor(n, dt)
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda a: _evolve_mode(*a), jobs))
    else:
        results = [_evolve_mode(*a) for a in jobs]
    E = np.sum([r[2] for r in results], axis=0)
    mid = np.sum([r[3] for r in results], axis=0)
    trap = np.sum([r[4] for r in results], axis=0)
    dE = np.diff(E)
    final = WaveState({n: (r[0], r[1]) for n, r in zip(ns, results)}, state.time + steps * dt)
    t = state.time + dt * np.arange(steps + 1)
    return Trajectory(final, dt, t, E, np.abs(dE + dt * mid) / E[:-1], np.abs(dE + dt * trap) / E[:-1])


# -- oracles ---------------------------------------------------------------------

def expm_oracle(system: WaveSystem, n: int, u0: np.ndarray, v0: np.ndarray, T: float):
    """Exact flow of the semi-discrete system for one mode via a dense matrix exponential."""
    N = system.N_x
    G = np.zeros((2 * N, 2 * N))
    G[:N, N:] = np.eye(N)
    G[N:, :N] = _d2(N) - n * n * np.eye(N)
    G[N:, N:] = -np.diag(system.W)
    y = linalg.expm(T * G) @ np.concatenate([u0, v0])
    return y[:N], y[N:]


def damped_oscillator(omega2: float, c: float, t, a0: float = 1.0, b0: float = 0.0):
    """Solution of a'' + c a' + omega2 a = 0 with a(0) = a0, a'(0) = b0."""
    t = np.asarray(t, dtype=float)
    disc = omega2 - 0.25 * c * c
    g = np.exp(-0.5 * c * t)
    if disc > 0:
        w = math.sqrt(disc)
        return g * (a0 * np.cos(w * t) + (b0 + 0.5 * c * a0) / w * np.sin(w * t))
    if disc < 0:
        w = math.sqrt(-disc)
        return g * (a0 * np.cosh(w * t) + (b0 + 0.5 * c * a0) / w * np.sinh(w * t))
    return g * (a0 + (b0 + 0.5 * c * a0) * t)


# -- initial data ----------------------------------------------------------------

def single_frequency(N_x: int, k: int = 1, n: int = 0) -> WaveState:
    x = grid(N_x)
    return WaveState({n: (np.cos(k * x).astype(complex), np.zeros(N_x, dtype=complex))})


def random_smooth(N_x: int, modes, seed: int = 0, width: float = 4.0) -> WaveState:
    """Gaussian-weighted random Fourier coefficients, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    weight = np.exp(-frequencies(N_x) ** 2 / (2 * width * width))
    out = {}
    for n in sorted(modes):
        g = rng.standard_normal((2, 2, N_x))
        u, v = (np.fft.ifft(weight * (g[i, 0] + 1j * g[i, 1])) * math.sqrt(N_x) for i in (0, 1))
        out[n] = (u, v)
    return WaveState(out)


def quasimode_data(V: GrowthExpr, n: int, N_x: int | None = None) -> WaveState:
    """(v_h, i n v_h): the quasimode and its undamped time derivative."""
    spec = build_quasimode(V, n, N_x=N_x)
    u = spec.field.astype(complex)
    return WaveState({n: (u, 1j * n * u)})


def data_norm(state: WaveState) -> float:
    """||u||_{H^2} + ||u_t||_{H^1} on the torus, computed spectrally."""
    N = state.N_x
    k2 = frequencies(N) ** 2
    hu = hv = 0.0
    for n in sorted(state.modes):
        u, v = state.modes[n]
        w = 1.0 + k2 + n * n
        hu += float(np.sum(w ** 2 * np.abs(np.fft.fft(u)) ** 2))
        hv += float(np.sum(w * np.abs(np.fft.fft(v)) ** 2))
    scale = TWO_PI * (TWO_PI / N) / N
    return math.sqrt(scale * hu) + math.sqrt(scale * hv)


# -- reports ---------------------------------------------------------------------

def fit_decay_rate(t, E) -> float:
    """c in E ~ C e^{-ct} by least squares on ln E."""
    return float(-np.polyfit(np.asarray(t), np.log(np.asarray(E)), 1)[0])


def fit_power_decay(t, E, start_fraction: float = 0.5) -> float:
    """p in E ~ C t^{-p} over the tail; qualitative only."""
    t, E = np.asarray(t), np.asarray(E)
    keep = t >= start_fraction * t[-1]
    keep &= t > 0
    return float(-np.polyfit(np.log(t[keep]), np.log(E[keep]), 1)[0])


@dataclass(frozen=True)
class PersistenceReport:
    n: int
    residual: float
    horizon_factor: float
    T: float
    dt: float
    steps: int
    energy_ratio: float
    duhamel_bound: float
    monotone: bool
    threshold: float = 0.5

    @property
    def passed(self) -> bool:
        return self.energy_ratio >= self.threshold and self.monotone

    def row(self) -> dict:
        return {"n": self.n, "residual": self.residual, "T": self.T, "dt": self.dt,
                "steps": self.steps, "energy_ratio": self.energy_ratio,
                "duhamel_bound": self.duhamel_bound, "passed": self.passed}


def quasimode_persistence(V: GrowthExpr, n: int, horizon_factor: float = 0.2, W=None,
                          workers: int = 1) -> PersistenceReport:
    """Evolve quasimode data to the Duhamel horizon T = horizon_factor * n / r.

    The defect w = u - e^{int} v_h solves the damped equation with forcing of
    L^2 size r and zero data, so sqrt E_w(T) <= T r / sqrt 2 while E(0) >= n^2.
    Hence E(T)/E(0) >= (1 - horizon_factor / sqrt 2)^2.
    """
    if W is None:
        W = thin_profile(V)
    state = quasimode_data(V, n)
    system = WaveSystem(W, state.N_x)
    spec = build_quasimode(V, n, N_x=state.N_x)
    r = quasimode_residual(spec, W)
    T = horizon_factor * n / r
    steps = max(1, math.ceil(T / system.max_dt(state.modes)))
    dt = T / steps
    traj = evolve(system, state, dt, steps, workers=workers)
    E0 = traj.E[0]
    bound = max(0.0, 1 - T * r / math.sqrt(2 * E0)) ** 2
    return PersistenceReport(n, r, horizon_factor, T, dt, steps, float(traj.E[-1] / E0), bound,
                             traj.monotone)
