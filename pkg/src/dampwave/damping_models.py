"""Damping functions on the circle and the torus [-pi, pi)^2.

A profile pairs a support geometry with a growth envelope V (a small-argument
:class:`~dampwave.rate_calculus.GrowthExpr`) evaluated at the distance d from
the point to the boundary of the support, W = V(d).  Strips and thin lines are
y-invariant; rectangles, disks and super-ellipses are genuinely 2-D.

Where W > 0:

* strip(sigma):        |x| > sigma,  d = |x| - sigma
* thin line:           x != 0,       d = |x|
* rectangle(s1, s2):   |x| < s1 and |y| < s2,  W = V(s1 - |x|) V_y(s2 - |y|)
* disk(c, r):          |z - c| < r,  d = r - |z - c|
* super-ellipse:       |x/a|^n + |y/b|^m < 1,  d = Euclidean distance to the curve
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .rate_calculus import GrowthExpr

TWO_PI = 2.0 * math.pi


class GeometryKind(str, Enum):
    STRIP = "strip"
    THIN_LINE = "thin_line"
    RECTANGLE = "rectangle"
    DISK = "disk"
    SUPER_ELLIPSE = "super_ellipse"


def wrap(x):
    """Map coordinates into [-pi, pi)."""
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


@dataclass(frozen=True)
class SupportGeometry:
    kind: GeometryKind
    sigma: float = 0.0
    sigma1: float = 0.0
    sigma2: float = 0.0
    center: tuple = (0.0, 0.0)
    radius: float = 0.0
    a: float = 0.0
    b: float = 0.0
    n: float = 2.0
    m: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", GeometryKind(self.kind))
        k = self.kind

        def in_range(name):
            v = getattr(self, name)
            if not 0 < v < math.pi:
                raise ValueError(f"{name} must lie in (0, pi), got {v}")
        if k is GeometryKind.STRIP:
            in_range("sigma")
        elif k is GeometryKind.RECTANGLE:
            in_range("sigma1")
            in_range("sigma2")
        elif k is GeometryKind.DISK:
            in_range("radius")
        elif k is GeometryKind.SUPER_ELLIPSE:
            in_range("a")
            in_range("b")
            if not self.n >= self.m >= 2:
                raise ValueError("super-ellipse needs n >= m >= 2")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    # -- constructors -----------------------------------------------------
    @classmethod
    def strip(cls, sigma: float) -> "SupportGeometry":
        return cls(GeometryKind.STRIP, sigma=sigma)

    @classmethod
    def thin_line(cls) -> "SupportGeometry":
        return cls(GeometryKind.THIN_LINE)

    @classmethod
    def rectangle(cls, sigma1: float, sigma2: float) -> "SupportGeometry":
        return cls(GeometryKind.RECTANGLE, sigma1=sigma1, sigma2=sigma2)

    @classmethod
    def disk(cls, radius: float, center=(0.0, 0.0)) -> "SupportGeometry":
        return cls(GeometryKind.DISK, radius=radius, center=center)

    @classmethod
    def super_ellipse(cls, a: float, b: float, n: float, m: float) -> "SupportGeometry":
        return cls(GeometryKind.SUPER_ELLIPSE, a=a, b=b, n=n, m=m)

    @property
    def y_invariant(self) -> bool:
        return self.kind in (GeometryKind.STRIP, GeometryKind.THIN_LINE)

    def max_depth(self) -> float:
        """Largest boundary distance reached inside the support."""
        k = self.kind
        if k is GeometryKind.STRIP:
            return math.pi - self.sigma
        if k is GeometryKind.THIN_LINE:
            return math.pi
        if k is GeometryKind.RECTANGLE:
            return max(self.sigma1, self.sigma2)
        if k is GeometryKind.DISK:
            return self.radius
        return min(self.a, self.b)

    def area(self) -> float:
        """Lebesgue measure of the support inside the torus cell."""
        k = self.kind
        if k is GeometryKind.STRIP:
            return TWO_PI * 2 * (math.pi - self.sigma)
        if k is GeometryKind.THIN_LINE:
            return TWO_PI ** 2
        if k is GeometryKind.RECTANGLE:
            return 4 * self.sigma1 * self.sigma2
        if k is GeometryKind.DISK:
            return math.pi * self.radius ** 2
        n, m = self.n, self.m
        return (4 * self.a * self.b * math.gamma(1 + 1 / n) * math.gamma(1 + 1 / m)
                / math.gamma(1 + 1 / n + 1 / m))


# ---------------------------------------------------------------------------
# distance to the support boundary


def _super_ellipse_boundary(g: SupportGeometry, theta):
    c, s = np.cos(theta), np.sin(theta)
    x = g.a * np.sign(c) * np.abs(c) ** (2.0 / g.n)
    y = g.b * np.sign(s) * np.abs(s) ** (2.0 / g.m)
    return x, y


def _super_ellipse_level(g: SupportGeometry, x, y):
    return np.abs(x / g.a) ** g.n + np.abs(y / g.b) ** g.m


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _super_ellipse_distance(g: SupportGeometry, x, y, seeds: int = 32, iters: int = 90):
    """Multistart golden-section minimisation of |p - boundary(theta)|^2.

    All points and all seeds are handled at once; each seed owns a bracket
    of width 2 pi / seeds around its angle.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
    y = np.atleast_1d(np.asarray(y, dtype=float))[:, None]
    centers = np.arange(seeds) * (TWO_PI / seeds)
    half = math.pi / seeds
    lo = np.broadcast_to(centers - half, (x.shape[0], seeds)).copy()
    hi = lo + 2 * half

    def f(t):
        bx, by = _super_ellipse_boundary(g, t)
        return (bx - x) ** 2 + (by - y) ** 2

    for _ in range(iters):
        c = hi - _GOLDEN * (hi - lo)
        d = lo + _GOLDEN * (hi - lo)
        left = f(c) < f(d)
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    mid = 0.5 * (lo + hi)
    best = np.minimum(f(mid), np.minimum(f(lo), f(hi)))
    return np.sqrt(best.min(axis=1))


def dist_to_support_boundary(geometry: SupportGeometry, x, y=0.0):
    """Euclidean distance from (x, y) to the boundary of the support.

    Points outside the support give 0.  Vectorised over x, y.
    """
    g = geometry
    x, y = np.broadcast_arrays(wrap(x), wrap(y))
    k = g.kind
    if k is GeometryKind.STRIP:
        out = np.maximum(np.abs(x) - g.sigma, 0.0)
    elif k is GeometryKind.THIN_LINE:
        out = np.abs(x)
    elif k is GeometryKind.RECTANGLE:
        out = np.maximum(np.minimum(g.sigma1 - np.abs(x), g.sigma2 - np.abs(y)), 0.0)
    elif k is GeometryKind.DISK:
        cx, cy = g.center
        r = np.hypot(wrap(x - cx), wrap(y - cy))
        out = np.maximum(g.radius - r, 0.0)
    else:
        shape = x.shape
        xf, yf = x.ravel(), y.ravel()
        out = np.zeros(xf.shape)
        inside = _super_ellipse_level(g, xf, yf) < 1.0
        if np.any(inside):
            # the nearest boundary point of a first-quadrant point is in the first quadrant
            out[inside] = _super_ellipse_distance(g, np.abs(xf[inside]), np.abs(yf[inside]))
        out = out.reshape(shape)
    return out if out.ndim else float(out)


def super_ellipse_distance_oracle(g: SupportGeometry, x: float, y: float,
                                  samples: int = 20_000) -> float:
    """Brute-force distance by dense sampling of the boundary as two graphs.

    Each quadrant arc is sampled both as y(x) and as x(y), so the spacing is
    uniform in at least one coordinate even where the angle parametrisation
    degenerates; the best sample of each graph is then polished by golden
    section on the graph parameter between its neighbours.
    """
    x, y = abs(float(x)), abs(float(y))
    graphs = (
        lambda u: (g.a * u, g.b * np.clip(1 - u ** g.n, 0, None) ** (1 / g.m)),
        lambda u: (g.a * np.clip(1 - u ** g.m, 0, None) ** (1 / g.n), g.b * u),
    )
    best = math.inf
    u = np.linspace(0.0, 1.0, samples)
    for curve in graphs:
        bx, by = curve(u)
        d2 = (bx - x) ** 2 + (by - y) ** 2
        i = int(np.argmin(d2))
        lo, hi = u[max(i - 1, 0)], u[min(i + 1, samples - 1)]

        def f(t):
            cx, cy = curve(np.array([t]))
            return float((cx[0] - x) ** 2 + (cy[0] - y) ** 2)
        for _ in range(100):
            c = hi - _GOLDEN * (hi - lo)
            d = lo + _GOLDEN * (hi - lo)
            if f(c) < f(d):
                hi = d
            else:
                lo = c
        best = min(best, float(d2[i]), f(0.5 * (lo + hi)))
    return math.sqrt(best)


# ---------------------------------------------------------------------------
# profiles


def _transition(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class DampingProfile:
    """W = V(d) on a support geometry.

    ``smoothing`` (radius s) flattens W away from the boundary: for d >= s the
    profile blends smoothly into the constant V(2s), reached at d = 2s, so the
    far side of the support is smooth across the torus cell.  Growth for
    d <= s is untouched.  Log-type envelopes are only meaningful for d < 1, so
    they get s = 0.3 when no smoothing is given (recorded in ``notes``).
    """

    geometry: SupportGeometry
    growth: GrowthExpr
    smoothing: float | None = None
    dbc_threshold: float | None = None
    growth_y: GrowthExpr | None = None
    notes: tuple = field(default=())

    def __post_init__(self):
        notes = list(self.notes)
        if not self.growth.is_small:
            raise ValueError("growth must be a small-argument expression")
        needs_cap = any(e is not None and e.log_pow != 0 for e in (self.growth, self.growth_y))
        if self.smoothing is None and needs_cap:
            object.__setattr__(self, "smoothing", 0.3)
            notes.append("log envelope: smoothing radius 0.3 applied")
        s = self.smoothing
        if s is not None:
            if not s > 0:
                raise ValueError("smoothing radius must be positive")
            if needs_cap and 2 * s >= 1:
                raise ValueError("log envelope needs 2 * smoothing < 1")
        if self.dbc_threshold is None:
            object.__setattr__(self, "dbc_threshold", float(self.envelope(0.1)))
        object.__setattr__(self, "notes", tuple(notes))

    @property
    def y_invariant(self) -> bool:
        return self.geometry.y_invariant

    def _log_envelope(self, V: GrowthExpr, d):
        """ln W as a function of boundary distance (-inf where d <= 0)."""
        d = np.asarray(d, dtype=float)
        out = np.full(d.shape, -np.inf)
        pos = d > 0
        s = self.smoothing
        if s is None:
            out[pos] = V.log_eval(d[pos])
            return out
        dp = d[pos]
        tau = _transition((dp - s) / s)
        core = np.minimum(dp, 2 * s)
        with np.errstate(divide="ignore"):
            out[pos] = np.logaddexp(np.log1p(-tau) + V.log_eval(core),
                                    np.log(tau) + V.log_eval(2 * s))
        return out

    def log_envelope(self, d):
        out = self._log_envelope(self.growth, d)
        return out if out.ndim else float(out)

    def envelope(self, d):
        """V along the inward normal, smoothing included."""
        out = np.exp(self._log_envelope(self.growth, d))
        return out if out.ndim else float(out)

    def max_value(self) -> float:
        if self.geometry.kind is GeometryKind.RECTANGLE:
            vy = self.growth_y or self.growth
            g = self.geometry
            return float(self._peak(self.growth, g.sigma1) * self._peak(vy, g.sigma2))
        return float(self._peak(self.growth, self.geometry.max_depth()))

    def _peak(self, V, depth):
        ds = np.linspace(0, depth, 4001)[1:]
        return np.exp(self._log_envelope(V, ds)).max()

    def log_eval(self, x, y=0.0):
        g = self.geometry
        x, y = np.broadcast_arrays(wrap(x), wrap(y))
        if g.kind is GeometryKind.RECTANGLE:
            vy = self.growth_y or self.growth
            return (self._log_envelope(self.growth, g.sigma1 - np.abs(x))
                    + self._log_envelope(vy, g.sigma2 - np.abs(y)))
        return self._log_envelope(self.growth, dist_to_support_boundary(g, x, y))

    def eval(self, x, y=0.0):
        out = np.exp(self.log_eval(x, y))
        return out if out.ndim else float(out)

    __call__ = eval

    def trace_1d(self) -> Callable:
        """x -> W(x, 0); the whole profile for y-invariant kinds."""
        return lambda x: self.eval(x, 0.0)


def eval_damping(profile: DampingProfile, x, y=0.0):
    """W at torus coordinates (x, y); vectorised."""
    return profile.eval(x, y)


def strip_profile(sigma: float, growth: GrowthExpr, **kw) -> DampingProfile:
    return DampingProfile(SupportGeometry.strip(sigma), growth, **kw)


def thin_profile(growth: GrowthExpr, **kw) -> DampingProfile:
    return DampingProfile(SupportGeometry.thin_line(), growth, **kw)


def disk_profile(radius: float, growth: GrowthExpr, center=(0.0, 0.0), **kw) -> DampingProfile:
    return DampingProfile(SupportGeometry.disk(radius, center), growth, **kw)


def rectangle_profile(sigma1, sigma2, growth, growth_y=None, **kw) -> DampingProfile:
    return DampingProfile(SupportGeometry.rectangle(sigma1, sigma2), growth,
                          growth_y=growth_y, **kw)


def super_ellipse_profile(a, b, n, m, growth, **kw) -> DampingProfile:
    return DampingProfile(SupportGeometry.super_ellipse(a, b, n, m), growth, **kw)


# ---------------------------------------------------------------------------
# derivative bounds


@dataclass(frozen=True)
class DbcReport:
    C_q: float
    C_p: float | None
    max_violation_point: tuple
    grid_n: int
    samples: int
    method: str

    @property
    def finite(self) -> bool:
        return math.isfinite(self.C_q) and (self.C_p is None or math.isfinite(self.C_p))


def _log_q_of_W(q: GrowthExpr, logW):
    # q(W) evaluated from ln W so W may sit below the float range
    return q.log_eval_at_log(logW)


def verify_dbc(profile: DampingProfile, q: GrowthExpr, p: GrowthExpr | None = None,
               grid_n: int = 1024) -> DbcReport:
    """Smallest C_q, C_p with |grad W| q(W) <= C_q W and |Hess W| p(W) <= C_p W.

    Sampled on the uniform grid of step 2 pi / grid_n over 0 < W <= eps_1.
    Strips, thin lines and unsmoothed disks use the closed-form derivatives of
    the envelope (in log space, so exponentially flat W is still resolved);
    other geometries use centred finite differences at the grid step,
    skipping stencils that touch W = 0.
    """
    if grid_n < 256:
        raise ValueError("grid_n must be at least 256")
    g = profile.geometry
    eps1 = profile.dbc_threshold
    log_eps1 = math.log(eps1)
    V = profile.growth
    hx = TWO_PI / grid_n
    xs = -math.pi + hx * np.arange(grid_n)
    analytic = (g.kind in (GeometryKind.STRIP, GeometryKind.THIN_LINE, GeometryKind.DISK))

    if analytic:
        if g.kind is GeometryKind.DISK:
            X, Y = np.meshgrid(xs, xs, indexing="ij")
            X, Y = X.ravel(), Y.ravel()
        else:
            X, Y = xs, np.zeros_like(xs)
        d = dist_to_support_boundary(g, X, Y)
        logW = profile.log_envelope(d)
        sel = (d > 0) & (logW <= log_eps1)
        if profile.smoothing is not None:
            sel &= d <= profile.smoothing
        d, logW, X, Y = d[sel], logW[sel], X[sel], Y[sel]
        g1 = np.abs(V._dlog(d))                      # |V'|/V
        g2 = np.abs(V._dlog(d) ** 2 + V._d2log(d))  # |V''|/V
        if g.kind is GeometryKind.DISK:
            # Hessian of V(r - |z|): radial V'', tangential -V'/|z|
            r = np.hypot(wrap(X - g.center[0]), wrap(Y - g.center[1]))
            g2 = np.maximum(g2, g1 / np.maximum(r, 1e-300))
        method = "analytic"
    else:
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        logW = profile.log_eval(X, Y)
        W = np.exp(logW)
        Wp = [np.roll(W, -1, 0), np.roll(W, 1, 0), np.roll(W, -1, 1), np.roll(W, 1, 1)]
        Wx = (Wp[0] - Wp[1]) / (2 * hx)
        Wy = (Wp[2] - Wp[3]) / (2 * hx)
        Wxx = (Wp[0] - 2 * W + Wp[1]) / hx ** 2
        Wyy = (Wp[2] - 2 * W + Wp[3]) / hx ** 2
        Wxy = (np.roll(Wp[0], -1, 1) - np.roll(Wp[0], 1, 1)
               - np.roll(Wp[1], -1, 1) + np.roll(Wp[1], 1, 1)) / (4 * hx ** 2)
        stencil_pos = W > 0
        for A in Wp:
            stencil_pos &= A > 0
        for sx, sy in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            stencil_pos &= np.roll(np.roll(W, sx, 0), sy, 1) > 0
        sel = stencil_pos & (logW <= log_eps1)
        Wv = W[sel]
        g1 = np.hypot(Wx[sel], Wy[sel]) / Wv
        tr, det = Wxx[sel] + Wyy[sel], Wxx[sel] * Wyy[sel] - Wxy[sel] ** 2
        disc = np.sqrt(np.maximum(tr ** 2 / 4 - det, 0.0))
        g2 = np.maximum(np.abs(tr / 2 + disc), np.abs(tr / 2 - disc)) / Wv
        logW, X, Y = logW[sel], X[sel], Y[sel]
        method = "finite_difference"

    if logW.size == 0:
        return DbcReport(math.nan, math.nan if p is not None else None, (), grid_n, 0, method)
    cq = g1 * np.exp(_log_q_of_W(q, logW))
    i = int(np.argmax(cq))
    C_q = float(cq[i])
    C_p = None
    if p is not None:
        C_p = float(np.max(g2 * np.exp(_log_q_of_W(p, logW))))
    return DbcReport(C_q, C_p, (float(X[i]), float(Y[i])), grid_n, int(logW.size), method)


@dataclass(frozen=True)
class RefinementStudy:
    grids: tuple
    C_q: tuple
    C_p: tuple
    stable: bool

    @property
    def growth(self) -> float:
        return self.C_q[-1] / self.C_q[0]


def dbc_refinement(profile: DampingProfile, q: GrowthExpr, p: GrowthExpr | None = None,
                   grids=(2 ** 8, 2 ** 10, 2 ** 12)) -> RefinementStudy:
    """verify_dbc across refining grids.

    Stable means every consecutive ratio lies in [0.5, 2] and the constant
    does not grow by more than 2 across the whole study; a sup that keeps
    climbing as the grid reaches closer to W = 0 is the signature of a q that
    is too large.
    """
    reps = [verify_dbc(profile, q, p, n) for n in grids]
    cq = tuple(r.C_q for r in reps)
    cp = tuple(r.C_p for r in reps)
    ratios = [b / a for a, b in zip(cq, cq[1:])]
    stable = (all(math.isfinite(c) for c in cq)
              and all(0.5 <= r <= 2 for r in ratios)
              and cq[-1] / cq[0] <= 2)
    if p is not None:
        pr = [b / a for a, b in zip(cp, cp[1:])]
        stable = stable and all(0.5 <= r <= 2 for r in pr) and cp[-1] / cp[0] <= 2
    return RefinementStudy(tuple(grids), cq, cp, bool(stable))


# ---------------------------------------------------------------------------
# the measure function


def digamma(profile: DampingProfile, zeta: float) -> float:
    """Lebesgue measure of {x on the circle : 0 < V(x) <= zeta}.

    Strips and thin lines are symmetric, so this is twice the depth at which
    the (monotone) envelope reaches zeta, found by bisection in log space.
    """
    if not profile.y_invariant:
        raise ValueError("digamma needs a y-invariant profile")
    g = profile.geometry
    depth = g.max_depth()
    full = 2 * depth
    if zeta <= 0:
        return 0.0
    lz = math.log(zeta)
    if profile.log_envelope(depth) <= lz:
        return full
    lo, hi = 0.0, depth
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if profile.log_envelope(mid) <= lz:
            lo = mid
        else:
            hi = mid
    return 2 * lo


def digamma_levelset(W: Callable, zeta: float, n: int = 4096) -> float:
    """Generic level-set measure of {0 < W <= zeta} for any callable on the circle.

    Locates every crossing of W = zeta and of W = 0 on a uniform grid and
    refines each by bisection.
    """
    xs = np.linspace(-math.pi, math.pi, n + 1)
    vals = np.asarray(W(xs), dtype=float)
    inside = (vals > 0) & (vals <= zeta)

    def member(x):
        v = float(W(np.array([x]))[0])
        return 0 < v <= zeta

    total = 0.0
    for i in range(n):
        a, b = xs[i], xs[i + 1]
        ia, ib = inside[i], inside[i + 1]
        if ia and ib:
            total += b - a
        elif ia != ib:
            lo, hi = a, b
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if member(mid) == ia:
                    lo = mid
                else:
                    hi = mid
            cut = 0.5 * (lo + hi)
            total += (cut - a) if ia else (b - cut)
    return total
