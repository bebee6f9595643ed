"""Quasimodes for damping that vanishes on a single closed geodesic.

On the torus with W = V(|x|) the function

    v_h(x, y) = c1 rho^{-1/2} chi(x / rho) e^{i n y},   h = 1/n,

with rho = R^-1(h), R(z) = z^2 V(z), concentrates on the undamped line
x = 0.  Its residual ||(-Laplacian + (i/h) W - 1/h^2) v_h|| is of order
V(rho)/h, which bounds the stationary resolvent norm from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .damping_models import DampingProfile, _transition
from .rate_calculus import GrowthExpr, Z, envelope_inverse

TWO_PI = 2.0 * math.pi


class ResolutionError(ValueError):
    pass


def plateau_bump(s):
    """Smooth cutoff: 1 on |s| <= 1/2, 0 on |s| >= 1."""
    return _transition(2.0 * (1.0 - np.abs(np.asarray(s, dtype=float))))


def standard_bump(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - s * s, 1.0)), 0.0)


CUTOFFS = {"plateau": plateau_bump, "standard": standard_bump}


def _chi_l2(name: str) -> float:
    chi = CUTOFFS[name]
    val, _ = integrate.quad(lambda s: float(chi(s)) ** 2, -1, 1, epsabs=0, epsrel=1e-13, limit=200,
                            points=[-0.5, 0.5])
    return val


@dataclass(frozen=True)
class QuasimodeSpec:
    n: int
    rho: float
    c1: float
    cutoff: str
    N_x: int
    V: GrowthExpr = field(repr=False)
    x: np.ndarray = field(repr=False, compare=False)
    field: np.ndarray = field(repr=False, compare=False)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    def norm(self) -> float:
        """L2(T^2) norm of the sampled field (the y-factor contributes 2 pi)."""
        dx = TWO_PI / self.N_x
        return math.sqrt(TWO_PI * dx * float(np.sum(np.abs(self.field) ** 2)))

    def predicted(self) -> float:
        """V(rho)/h, the residual order."""
        return float(self.V.eval(self.rho)) / self.h


def quasimode_scale(V: GrowthExpr, h: float) -> float:
    return float(envelope_inverse(Z(2) * V).eval(h))


def auto_N_x(rho: float, points: int = 128) -> int:
    """Power of two with at least ``points`` grid points across the bump support.

    64 points already resolve the residual; 128 are needed to bring the
    trapezoidal normalisation of the plateau bump below 1e-10.
    """
    need = points * TWO_PI / (2 * rho)
    N = 64
    while N < need:
        N *= 2
    return N


def build_quasimode(V: GrowthExpr, n: int, N_x: int | None = None,
                    cutoff: str = "plateau") -> QuasimodeSpec:
    if n < 8:
        raise ValueError("n must be at least 8")
    if cutoff not in CUTOFFS:
        raise ValueError(f"unknown cutoff {cutoff!r}")
    h = 1.0 / n
    rho = quasimode_scale(V, h)
    if not 0 < rho < math.pi:
        raise ValueError(f"rho = {rho} does not fit on the circle")
    if N_x is None:
        N_x = auto_N_x(rho)
    if N_x < 16 / rho:
        raise ResolutionError(f"N_x = {N_x} below 16/rho = {16 / rho:.1f}")
    c1 = 1.0 / math.sqrt(TWO_PI * _chi_l2(cutoff))
    x = -math.pi + TWO_PI * np.arange(N_x) / N_x
    f = c1 / math.sqrt(rho) * CUTOFFS[cutoff](x / rho)
    return QuasimodeSpec(n, rho, c1, cutoff, N_x, V, x, f)


def _damping_on(W, x):
    if isinstance(W, DampingProfile):
        return np.asarray(W.eval(x, 0.0), dtype=float)
    if callable(W):
        return np.asarray(W(x), dtype=float) * np.ones_like(x)
    return float(W) * np.ones_like(x)


def residual(spec: QuasimodeSpec, W) -> float:
    """||(-Laplacian + i n W - n^2) v|| in L2(T^2), spectrally in x."""
    if spec.N_x < 16 / spec.rho:
        raise ResolutionError(f"N_x = {spec.N_x} below 16/rho")
    k = np.fft.fftfreq(spec.N_x, 1.0 / spec.N_x)
    vxx = np.fft.ifft(-(k ** 2) * np.fft.fft(spec.field))
    r = -vxx + 1j * spec.n * _damping_on(W, spec.x) * spec.field
    dx = TWO_PI / spec.N_x
    return math.sqrt(TWO_PI * dx * float(np.sum(np.abs(r) ** 2)))


@dataclass(frozen=True)
class QuasimodeRow:
    n: int
    h: float
    rho: float
    residual: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.residual / self.predicted

    def row(self) -> dict:
        return {"n": self.n, "h": self.h, "rho": self.rho, "residual": self.residual,
                "predicted": self.predicted, "ratio": self.ratio}


def residual_sweep(V: GrowthExpr, ns, W=None, cutoff: str = "plateau") -> list:
    """Residuals over a list of frequencies; W defaults to V(|x|) on the circle."""
    if W is None:
        from .damping_models import thin_profile
        W = thin_profile(V)
    out = []
    for n in ns:
        spec = build_quasimode(V, n, cutoff=cutoff)
        out.append(QuasimodeRow(n, spec.h, spec.rho, residual(spec, W), spec.predicted()))
    return out


def residual_exponent(rows) -> float:
    """Least-squares slope of ln residual against ln h."""
    h = np.log([r.h for r in rows])
    y = np.log([r.residual for r in rows])
    return float(np.polyfit(h, y, 1)[0])
