"""Asymptotic growth expressions and the resolvent-to-decay-rate pipeline.

A :class:`GrowthExpr` is a single asymptotic term

    SmallArg (z -> 0+):  C * z^b * ln(1/z)^g * exp(-c * z^-a)
    LargeArg (t -> oo):  C * t^b * ln(t)^g   * exp(+c * t^a)

``log_pow`` is always the exponent of ``ln(1/z)`` (small) or ``ln(t)`` (large)
as written; there is no hidden sign flip.  In the small orientation a positive
``exp_coeff`` is a decaying factor, in the large orientation a growing one.

Exponents are kept as :class:`fractions.Fraction` whenever the inputs are
rational, so closed-form rates can be compared exactly.  Coefficients are
propagated but only matter for tie-breaking; every relation here is "up to
multiplicative constants".
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

Number = Union[Fraction, float]


class Orientation(str, Enum):
    SMALL = "small"
    LARGE = "large"


class IncompatibleExponential(ValueError):
    """Product of two exponential factors with different exponents."""


class NotInvertibleFamily(ValueError):
    """Expression lies outside the closed-form envelope-inverse shapes."""


class NotInFamily(ValueError):
    """A composition would leave the power/log/exp family (e.g. iterated logs)."""


class BracketError(ValueError):
    pass


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact-if-possible arithmetic


def exact(x) -> Number:
    """Fraction for ints/Fractions/rational strings, float otherwise."""
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return float(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    raise TypeError(f"unsupported number {x!r}")


def _iroot(n: int, k: int) -> int | None:
    """Exact integer k-th root of n >= 0, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = int(round(n ** (1.0 / k))) if n < 2**1000 else int(round(math.exp(math.log(n) / k)))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def rpow(base: Number, e: Number) -> Number:
    """base**e, exact when the result is rational."""
    base, e = exact(base), exact(e)
    if isinstance(base, Fraction) and isinstance(e, Fraction):
        if e.denominator == 1:
            if base == 0 and e < 0:
                raise ZeroDivisionError("0 to a negative power")
            return base ** int(e)
        if base > 0:
            num = _iroot(base.numerator, e.denominator)
            den = _iroot(base.denominator, e.denominator)
            if num is not None and den is not None:
                return Fraction(num, den) ** e.numerator
    return float(base) ** float(e)


def _mulnum(a: Number, b: Number) -> Number:
    a, b = exact(a), exact(b)
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    return float(a) * float(b)


def _addnum(a: Number, b: Number) -> Number:
    a, b = exact(a), exact(b)
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return float(a) + float(b)


def _inv(x: Number) -> Number:
    x = exact(x)
    return 1 / x if isinstance(x, Fraction) else 1.0 / float(x)


def _sign(x: Number) -> int:
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthExpr:
    coeff: Number = Fraction(1)
    pow: Number = Fraction(0)
    log_pow: Number = Fraction(0)
    exp_coeff: Number = Fraction(0)
    exp_pow: Number = Fraction(0)
    orientation: Orientation = Orientation.SMALL

    def __post_init__(self):
        for name in ("coeff", "pow", "log_pow", "exp_coeff", "exp_pow"):
            object.__setattr__(self, name, exact(getattr(self, name)))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if not self.coeff > 0:
            raise ValueError(f"coeff must be positive, got {self.coeff}")
        if self.exp_coeff == 0:
            # absent exponential: normalise so field equality is meaningful
            object.__setattr__(self, "exp_coeff", Fraction(0))
            object.__setattr__(self, "exp_pow", Fraction(0))
        elif not self.exp_pow > 0:
            raise ValueError("exp_pow must be positive when exp_coeff != 0")

    # -- constructors -----------------------------------------------------
    @classmethod
    def small(cls, pow=0, log_pow=0, exp_coeff=0, exp_pow=0, coeff=1) -> "GrowthExpr":
        return cls(coeff, pow, log_pow, exp_coeff, exp_pow, Orientation.SMALL)

    @classmethod
    def large(cls, pow=0, log_pow=0, exp_coeff=0, exp_pow=0, coeff=1) -> "GrowthExpr":
        return cls(coeff, pow, log_pow, exp_coeff, exp_pow, Orientation.LARGE)

    @property
    def is_small(self) -> bool:
        return self.orientation is Orientation.SMALL

    @property
    def has_exp(self) -> bool:
        return self.exp_coeff != 0

    def exponents(self) -> tuple:
        return (self.pow, self.log_pow, self.exp_coeff, self.exp_pow)

    def replace(self, **kw) -> "GrowthExpr":
        d = dict(coeff=self.coeff, pow=self.pow, log_pow=self.log_pow,
                 exp_coeff=self.exp_coeff, exp_pow=self.exp_pow,
                 orientation=self.orientation)
        d.update(kw)
        return GrowthExpr(**d)

    # -- evaluation -------------------------------------------------------
    def log_eval(self, x):
        """Natural log of the value; vectorised over numpy input."""
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("argument must be positive")
        return self.log_eval_at_log(np.log(x))

    def log_eval_at_log(self, lx):
        """Natural log of the value given ln(x); lets x sit below the float range."""
        lx = np.asarray(lx, dtype=float)
        if self.is_small:
            if self.log_pow != 0 and np.any(lx >= 0):
                raise DomainError("ln(1/z) must be positive: need z < 1")
            out = math.log(float(self.coeff)) + float(self.pow) * lx
            if self.log_pow != 0:
                out = out + float(self.log_pow) * np.log(-lx)
            if self.exp_coeff != 0:
                out = out - float(self.exp_coeff) * np.exp(-float(self.exp_pow) * lx)
        else:
            if self.log_pow != 0 and np.any(lx <= 0):
                raise DomainError("ln(t) must be positive: need t > 1")
            out = math.log(float(self.coeff)) + float(self.pow) * lx
            if self.log_pow != 0:
                out = out + float(self.log_pow) * np.log(lx)
            if self.exp_coeff != 0:
                out = out + float(self.exp_coeff) * np.exp(float(self.exp_pow) * lx)
        return out if out.ndim else float(out)

    def eval(self, x):
        v = np.exp(self.log_eval(x))
        return v if np.ndim(v) else float(v)

    __call__ = eval

    def derivative(self, x):
        """d/dx of the expression (small orientation only)."""
        if not self.is_small:
            raise NotImplementedError
        x = np.asarray(x, dtype=float)
        return self.eval(x) * self._dlog(x)

    def second_derivative(self, x):
        if not self.is_small:
            raise NotImplementedError
        x = np.asarray(x, dtype=float)
        d1 = self._dlog(x)
        return self.eval(x) * (d1 * d1 + self._d2log(x))

    def _dlog(self, x):
        b, g, c, a = (float(v) for v in (self.pow, self.log_pow, self.exp_coeff, self.exp_pow))
        out = b / x
        if g:
            out = out - g / (x * np.log(1.0 / x))
        if c:
            out = out + c * a * x ** (-a - 1.0)
        return out

    def _d2log(self, x):
        b, g, c, a = (float(v) for v in (self.pow, self.log_pow, self.exp_coeff, self.exp_pow))
        out = -b / x**2
        if g:
            L = np.log(1.0 / x)
            out = out + g * (L - 1.0) / (x * L) ** 2
        if c:
            out = out - c * a * (a + 1.0) * x ** (-a - 2.0)
        return out

    # -- algebra ----------------------------------------------------------
    def _check_same(self, other: "GrowthExpr"):
        if self.orientation is not other.orientation:
            raise ValueError("orientation mismatch")

    def mul(self, other: "GrowthExpr") -> "GrowthExpr":
        self._check_same(other)
        if self.has_exp and other.has_exp:
            if self.exp_pow != other.exp_pow:
                raise IncompatibleExponential(
                    f"exp exponents differ: {self.exp_pow} vs {other.exp_pow}")
            ec, ep = _addnum(self.exp_coeff, other.exp_coeff), self.exp_pow
        elif self.has_exp:
            ec, ep = self.exp_coeff, self.exp_pow
        else:
            ec, ep = other.exp_coeff, other.exp_pow
        return GrowthExpr(_mulnum(self.coeff, other.coeff),
                          _addnum(self.pow, other.pow),
                          _addnum(self.log_pow, other.log_pow),
                          ec, ep if ec != 0 else 0, self.orientation)

    def power(self, r) -> "GrowthExpr":
        r = exact(r)
        return GrowthExpr(rpow(self.coeff, r), _mulnum(self.pow, r),
                          _mulnum(self.log_pow, r), _mulnum(self.exp_coeff, r),
                          self.exp_pow, self.orientation)

    def recip(self) -> "GrowthExpr":
        return self.power(-1)

    def scale(self, k) -> "GrowthExpr":
        """Multiply by a positive constant."""
        return self.replace(coeff=_mulnum(self.coeff, exact(k)))

    def __mul__(self, other):
        if isinstance(other, GrowthExpr):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GrowthExpr):
            return self.mul(other.recip())
        return self.scale(1 / exact(other))

    def __pow__(self, r):
        return self.power(r)

    def scale_arg(self, k) -> "GrowthExpr":
        """Leading-order form of ``x -> f(k x)`` for a constant ``k > 0``.

        Power and log factors only pick up a constant (ln(1/(kz)) ~ ln(1/z));
        an exponential factor changes its coefficient to ``c * k^(-a)``
        (small) or ``c * k^a`` (large).
        """
        k = exact(k)
        coeff = _mulnum(self.coeff, rpow(k, self.pow))
        ec = self.exp_coeff
        if self.has_exp:
            kk = rpow(k, -self.exp_pow if self.is_small else self.exp_pow)
            ec = _mulnum(ec, kk)
        return self.replace(coeff=coeff, exp_coeff=ec)

    def reciprocal_arg(self) -> "GrowthExpr":
        """Substitute x -> 1/x, flipping the orientation.

        M(h) small in h becomes m(lambda) = M(1/lambda) large in lambda.
        Round trip is exact at field level.
        """
        return GrowthExpr(self.coeff, -self.pow, self.log_pow, -self.exp_coeff,
                          self.exp_pow,
                          Orientation.LARGE if self.is_small else Orientation.SMALL)

    # -- asymptotic order -------------------------------------------------
    def order_key(self) -> tuple:
        """Tuple whose lexicographic order is the asymptotic order of size.

        Small orientation: exponential factor first, then power (reversed,
        since larger powers are smaller near 0), then log power, then coeff.
        """
        growth_c = -self.exp_coeff if self.is_small else self.exp_coeff
        s = _sign(growth_c)
        exp_key = (s, s * self.exp_pow, growth_c)
        p = -self.pow if self.is_small else self.pow
        return exp_key + (p, self.log_pow, self.coeff)

    def exponent_key(self) -> tuple:
        return self.order_key()[:-1]

    def __str__(self) -> str:
        return format_expr(self)


def ONE(orientation=Orientation.SMALL) -> GrowthExpr:
    return GrowthExpr(orientation=orientation)


def Z(pow=1) -> GrowthExpr:
    return GrowthExpr.small(pow=pow)


def T(pow=1) -> GrowthExpr:
    return GrowthExpr.large(pow=pow)


def asym_min(a: GrowthExpr, b: GrowthExpr) -> GrowthExpr:
    """The eventually smaller of two expressions (ties: smaller coefficient)."""
    a._check_same(b)
    return a if a.order_key() <= b.order_key() else b


def asym_max(a: GrowthExpr, b: GrowthExpr) -> GrowthExpr:
    a._check_same(b)
    return b if a.order_key() <= b.order_key() else a


def asym_compare(a: GrowthExpr, b: GrowthExpr) -> int:
    """-1, 0, +1 comparing growth order, coefficients ignored."""
    ka, kb = a.exponent_key(), b.exponent_key()
    return (ka > kb) - (ka < kb)


# ---------------------------------------------------------------------------
# nested-log inverse of power*exp shapes


@dataclass(frozen=True)
class NestedLog:
    """The envelope inverse of ``f(z) = C z^eta exp(-c z^-zeta)``.

    With u = rho^-zeta and L = ln(C/h)/c the equation f(rho) = h reads
    u + kappa ln u = L, kappa = eta/(zeta c).  Its two-term expansion is the
    nested logarithm

        rho(h) = ln( H^(-1/c) * ln(H^(-1/c))^(-kappa) )^(-1/zeta),  H = h/C,

    available as :meth:`expansion`.  :meth:`eval` solves the equation itself,
    since the truncated form turns negative once kappa ln L is comparable to L.
    This sits outside the power/log/exp family; :func:`compose` knows how
    to push family members through it, and :meth:`leading` gives the
    leading-order pure-log term rho ~ (ln(1/h)/c)^(-1/zeta).
    """

    c: Number
    zeta: Number
    eta: Number
    scale: Number = Fraction(1)
    orientation: Orientation = Orientation.SMALL

    def __post_init__(self):
        for name in ("c", "zeta", "eta", "scale"):
            object.__setattr__(self, name, exact(getattr(self, name)))

    @property
    def kappa(self) -> Number:
        return _mulnum(self.eta, _inv(_mulnum(self.zeta, self.c)))

    def _L(self, h):
        h = np.asarray(h, dtype=float)
        if np.any(h <= 0):
            raise DomainError("h must be positive")
        return (math.log(float(self.scale)) - np.log(h)) / float(self.c)

    def log_eval(self, h):
        """ln rho(h), from the exact root of u + kappa ln u = L."""
        L = self._L(h)
        k = float(self.kappa)
        if k == 0:
            if np.any(L <= 0):
                raise DomainError("h must be below the scale constant")
            w = np.log(L)
        else:
            # Newton on w = ln u: g(w) = e^w + k w - L is convex increasing, so
            # starting right of the root the iterates decrease monotonically
            w = L / k
            w = np.where(L > 1, np.minimum(w, np.log(np.maximum(L, 1.0))), w)
            for _ in range(200):
                ew = np.exp(w)
                step = (ew + k * w - L) / (ew + k)
                w = w - step
                if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(w))):
                    break
        out = -w / float(self.zeta)
        return out if np.ndim(out) else float(out)

    def eval(self, h):
        out = np.exp(self.log_eval(h))
        return out if np.ndim(out) else float(out)

    __call__ = eval

    def expansion(self, h):
        """The two-term nested-log closed form; valid once L >> kappa ln L."""
        L = self._L(h)
        if np.any(L <= 1):
            raise DomainError("h too large for the nested-log form")
        inner = L - float(self.kappa) * np.log(L)
        if np.any(inner <= 0):
            raise DomainError("h too large for the nested-log form")
        out = inner ** (-1.0 / float(self.zeta))
        return out if out.ndim else float(out)

    def leading(self) -> GrowthExpr:
        a = _inv(self.zeta)
        return GrowthExpr.small(log_pow=-a, coeff=rpow(self.c, a))

    def __str__(self) -> str:
        return (f"ln((h/{_fmt_num(self.scale)})^(-1/{_fmt_num(self.c)}) * "
                f"ln((h/{_fmt_num(self.scale)})^(-1/{_fmt_num(self.c)}))^(-{_fmt_num(self.kappa)}))"
                f"^(-1/{_fmt_num(self.zeta)}) @small")


Inverse = Union[GrowthExpr, NestedLog]


def envelope_inverse(f: GrowthExpr) -> Inverse:
    """Closed-form envelope inverse of an increasing small-argument expression.

    Shapes handled:

    * ``C z^eta ln(1/z)^g`` with eta > 0  ->  K h^(1/eta) ln(1/h)^(-g/eta)
    * ``C ln(1/z)^g`` with g < 0          ->  exp(-C^(1/|g|) h^(-1/|g|))
    * ``C z^eta exp(-c z^-zeta)``, c > 0  ->  :class:`NestedLog`

    Large-argument expressions (used for decay rates) are handled the same
    way for the first two shapes.
    """
    if not f.is_small:
        return _inverse_large(f)
    eta, g = f.pow, f.log_pow
    if f.has_exp:
        if f.exp_coeff < 0:
            raise NotInvertibleFamily("growing exponential does not vanish at 0")
        if g != 0:
            raise NotInvertibleFamily("log factor next to an exponential")
        return NestedLog(f.exp_coeff, f.exp_pow, eta, f.coeff)
    if eta > 0:
        inv_eta = _inv(eta)
        K = rpow(_mulnum(rpow(eta, g), _inv(f.coeff)), inv_eta)
        return GrowthExpr.small(pow=inv_eta, log_pow=-_mulnum(g, inv_eta), coeff=K)
    if eta == 0 and g < 0:
        a = _inv(-g)  # 1/|g|
        return GrowthExpr.small(exp_coeff=rpow(f.coeff, a), exp_pow=a)
    raise NotInvertibleFamily(f"not increasing to 0: {format_expr(f)}")


def _inverse_large(m: GrowthExpr) -> GrowthExpr:
    eta, g = m.pow, m.log_pow
    if m.has_exp:
        raise NotInvertibleFamily("exponential growth in a large-argument inverse")
    if eta > 0:
        inv_eta = _inv(eta)
        K = rpow(_mulnum(rpow(eta, g), _inv(m.coeff)), inv_eta)
        return GrowthExpr.large(pow=inv_eta, log_pow=-_mulnum(g, inv_eta), coeff=K)
    if eta == 0 and g > 0:
        a = _inv(g)
        return GrowthExpr.large(exp_coeff=rpow(_inv(m.coeff), a), exp_pow=a)
    raise NotInvertibleFamily(f"not increasing to infinity: {format_expr(m)}")


def compose(f: GrowthExpr, g: Inverse) -> GrowthExpr:
    """Leading-order form of ``h -> f(g(h))`` for small-argument f and g.

    The result is asymptotically equivalent (ratio -> const) to the true
    composition.  Raises :class:`NotInFamily` when the answer would need an
    iterated logarithm or a double exponential.
    """
    if not f.is_small:
        raise ValueError("compose expects a small-argument outer function")
    beta, gam, cf, af = f.pow, f.log_pow, f.exp_coeff, f.exp_pow
    out = GrowthExpr.small(coeff=f.coeff)

    if isinstance(g, NestedLog):
        c, zeta = g.c, g.zeta
        if gam != 0:
            raise NotInFamily("log of a nested-log argument")
        inv_zeta = _inv(zeta)
        # rho^beta ~ (ln(1/h)/c)^(-beta/zeta)
        lp = -_mulnum(beta, inv_zeta)
        out = out * GrowthExpr.small(log_pow=lp, coeff=rpow(c, -lp))
        if cf != 0:
            if af != zeta:
                raise NotInFamily("exponential exponent differs from the nested-log one")
            # exp(-cf rho^-zeta) = (h/C)^(cf/c) * (ln(1/h)/c)^(cf*kappa)
            r = _mulnum(cf, _inv(c))
            k = _mulnum(cf, g.kappa)
            out = out * GrowthExpr.small(pow=r, log_pow=k,
                                         coeff=_mulnum(rpow(g.scale, -r), rpow(c, -k)))
        return out

    if not g.is_small:
        raise ValueError("compose expects a small-argument inner function")
    a, b, K = g.pow, g.log_pow, g.coeff
    if g.has_exp:
        if g.exp_coeff < 0:
            raise NotInFamily("inner function blows up")
        if cf != 0:
            raise NotInFamily("double exponential")
        # g^beta then ln(1/g) ~ c_g h^-a_g
        out = out * g.power(beta)
        if gam != 0:
            out = out * GrowthExpr.small(pow=-_mulnum(g.exp_pow, gam),
                                         coeff=rpow(g.exp_coeff, gam))
        return out
    if a < 0 or (a == 0 and b > 0):
        raise NotInFamily("inner function does not tend to 0")
    out = out * g.power(beta)
    if gam != 0:
        if a == 0:
            raise NotInFamily("log of a pure-log argument")
        out = out * GrowthExpr.small(log_pow=gam, coeff=rpow(a, gam))
    if cf != 0:
        if b != 0 or a == 0:
            raise NotInFamily("exponential of a power-log argument")
        out = out * GrowthExpr.small(exp_coeff=_mulnum(cf, rpow(K, -af)),
                                     exp_pow=_mulnum(a, af))
    return out


def numeric_envelope_inverse(f: Callable[[float], float], h: float,
                             bracket: tuple[float, float] = (0.0, 1.0),
                             rtol: float = 1e-12) -> float:
    """Root of f(z) = h by geometric bisection; the brute-force oracle.

    Works in log(f) when ``f`` exposes ``log_eval`` so that values far below
    the float range are still resolved.
    """
    lo, hi = bracket
    lo = max(lo, 1e-300)
    if isinstance(f, GrowthExpr) and f.is_small and f.log_pow > 0 and f.pow > 0:
        # z^b ln(1/z)^g peaks at exp(-g/b); stay on the increasing branch
        hi = min(hi, math.exp(-float(f.log_pow) / float(f.pow)))
    if hasattr(f, "log_eval"):
        target = math.log(h)

        def F(z):
            return f.log_eval(z) - target
    else:
        def F(z):
            return f(z) - h
    flo = F(lo)
    try:
        fhi = F(hi)
    except DomainError:
        # ln(1/z) vanishes at z = 1; step just inside the domain
        hi = min(hi, 1.0) * (1 - 1e-9)
        fhi = F(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change of f - h on [{lo}, {hi}]")
    rising = fhi > 0
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        if hi / lo - 1.0 <= rtol:
            break
        fm = F(mid)
        if fm == 0:
            return mid
        if (fm > 0) == rising:
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi)


def numeric_log_inverse(f: GrowthExpr, h: float,
                        log_bracket: tuple[float, float] = (-1e300, -1e-12),
                        rtol: float = 1e-14) -> float:
    """ln z* with f(z*) = h for small-argument f, bisecting on ln(-ln z).

    The companion of :func:`numeric_envelope_inverse` for roots far below
    the float range (pure-log envelopes put z* near exp(-h^-1/g)).
    """
    lo, hi = log_bracket
    if f.log_pow > 0 and f.pow > 0:
        hi = min(hi, -float(f.log_pow) / float(f.pow))
    target = math.log(h)
    # s = ln(-ln z) runs opposite to z
    s_lo, s_hi = math.log(-hi), math.log(-lo)

    def F(s):
        # exp(-c z^-a) underflows to -inf far out, which still has the right sign
        with np.errstate(over="ignore"):
            return f.log_eval_at_log(-math.exp(s)) - target
    f_lo, f_hi = F(s_lo), F(s_hi)
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"no sign change of f - h on exp([{lo}, {hi}])")
    rising = f_hi > 0
    for _ in range(400):
        if s_hi - s_lo <= rtol:
            break
        mid = 0.5 * (s_lo + s_hi)
        if (F(mid) > 0) == rising:
            s_hi = mid
        else:
            s_lo = mid
    return -math.exp(0.5 * (s_lo + s_hi))


# ---------------------------------------------------------------------------
# positive increase and decay rates


def positive_increase(m: GrowthExpr) -> bool:
    if m.is_small:
        raise ValueError("positive increase is a large-argument notion")
    return m.pow > 0 or m.exp_coeff > 0


def log_of(m: GrowthExpr) -> GrowthExpr:
    """Leading term of ln(m(lambda)) for an increasing large-argument m."""
    if m.exp_coeff > 0:
        return GrowthExpr.large(pow=m.exp_pow, coeff=m.exp_coeff)
    if m.pow > 0:
        return GrowthExpr.large(log_pow=1, coeff=m.pow)
    if m.pow == 0 and m.log_pow > 0:
        # ln m ~ g ln ln(lambda) is beaten by ln(lambda); a constant stands in
        return GrowthExpr.large(coeff=1)
    raise ValueError("m is not increasing")


def k_log(m: GrowthExpr) -> GrowthExpr:
    """m * (dominant of ln(lambda) and ln m): the log-augmented bound."""
    ln_lam = GrowthExpr.large(log_pow=1)
    return m * asym_max(ln_lam, log_of(m))


def decay_rate(m: GrowthExpr, positive_increase: bool) -> GrowthExpr:
    """r(t) = 1 / m~^{-1}(t), through the K_log augmentation if needed."""
    base = m if positive_increase else k_log(m)
    return envelope_inverse(base).recip()


# ---------------------------------------------------------------------------
# R_j / M_j assembly


@dataclass(frozen=True)
class RateReport:
    M: GrowthExpr
    m: GrowthExpr
    positive_increase: bool
    rate: GrowthExpr
    technical_flags: tuple = ()
    R: GrowthExpr | None = None
    R_inv: Inverse | None = None
    variant: str = ""
    lower_rate: GrowthExpr | None = None
    label: str = ""

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "label": self.label,
            "R": str(self.R) if self.R is not None else "",
            "R_inv": str(self.R_inv) if self.R_inv is not None else "",
            "M": str(self.M),
            "m": str(self.m),
            "positive_increase": self.positive_increase,
            "rate": str(self.rate),
            "flags": list(self.technical_flags),
        }


def _finish(M: GrowthExpr, flags: list, *, R=None, R_inv=None, variant="",
            lower=False) -> RateReport:
    m = M.reciprocal_arg()
    pi = positive_increase(m)
    if lower:
        rate = envelope_inverse(m).recip()
    else:
        rate = decay_rate(m, pi)
        if not pi:
            flags.append("no positive increase: rate via K_log")
    return RateReport(M, m, pi, rate, tuple(flags), R, R_inv, variant)


def build_M(q: GrowthExpr, p: GrowthExpr | None, U: GrowthExpr,
            variant: str = "j1") -> RateReport:
    """Resolvent bound M_j(h) and decay rate from derivative-bound data.

    R_1 = z q U,  R_2 = z min(q^2, p),  M_j(h) = rho U(rho) / h^2 with
    rho = R_j^{-1}(h).
    """
    z = Z(1)
    if variant == "j1":
        R = z * q * U
    elif variant == "j2":
        if p is None:
            raise ValueError("variant j2 needs p")
        R = z * asym_min(q * q, p)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    R_inv = envelope_inverse(R)
    M = compose(z * U, R_inv) * Z(-2)
    flags = []
    if variant == "j1":
        # need M >= h^(-1-eps) for some eps > 0
        growing_exp = M.exp_coeff < 0
        if not growing_exp and (M.exp_coeff > 0 or not M.pow < -1):
            flags.append("M1 >= h^(-1-eps) check failed")
    else:
        if asym_compare(M, Z(-1)) < 0:
            flags.append("M2 >= h^(-1) check failed")
    return _finish(M, flags, R=R, R_inv=R_inv, variant=variant)


def build_M_thin(V: GrowthExpr, eps=Fraction(11, 10)) -> RateReport:
    """Upper bound for damping vanishing on a single geodesic.

    R_eps(z) = z^2 sqrt(V(z) V(eps z)),  M_eps = max(1/V(rho), rho^2/h).
    The lower bound is attached as ``lower_rate``.
    """
    eps = exact(eps)
    if not eps > 1:
        raise ValueError("eps must exceed 1")
    R = Z(2) * (V * V.scale_arg(eps)).power(Fraction(1, 2))
    R_inv = envelope_inverse(R)
    A = compose(V, R_inv).recip()
    B = compose(Z(2), R_inv) * Z(-1)
    M = asym_max(A, B)
    rep = _finish(M, [], R=R, R_inv=R_inv, variant="thin")
    low = build_M_thin_lower(V)
    flags = list(rep.technical_flags)
    if not rep.positive_increase:
        flags.append("upper/lower rate gap")
    return RateReport(rep.M, rep.m, rep.positive_increase, rep.rate, tuple(flags),
                      R, R_inv, "thin", low.rate)


def build_M_thin_lower(V: GrowthExpr) -> RateReport:
    """Lower bound M(h) = 1/V(R^{-1}(h)) with R = z^2 V."""
    R = Z(2) * V
    R_inv = envelope_inverse(R)
    M = compose(V, R_inv).recip()
    return _finish(M, [], R=R, R_inv=R_inv, variant="thin_lower", lower=True)


def combine_directional(reports: Sequence[RateReport]) -> RateReport:
    """The worst (asymptotically largest M) report governs."""
    if not reports:
        raise ValueError("no reports")
    best = reports[0]
    for r in reports[1:]:
        if r.M.order_key() > best.M.order_key():
            best = r
    return best


# ---------------------------------------------------------------------------
# derivative-bound data straight from a growth envelope V


def inverse_leading(V: GrowthExpr) -> GrowthExpr:
    inv = envelope_inverse(V)
    return inv.leading() if isinstance(inv, NestedLog) else inv


def dbc_data(V: GrowthExpr) -> tuple[GrowthExpr, GrowthExpr]:
    """Leading-order q and p with |V'| ~ V/q(V) and |V''| ~ V/p(V).

    q(z) = (V/V')(V^{-1}(z)) and p(z) = (V/|V''|)(V^{-1}(z)).  Where V''
    vanishes to leading order (V linear) p is returned as q^2, which is
    what the R_2 construction uses anyway.
    """
    inv = envelope_inverse(V)
    beta, g = V.pow, V.log_pow
    if V.has_exp:
        a, c = V.exp_pow, V.exp_coeff
        f = GrowthExpr.small(pow=_addnum(a, 1), coeff=_inv(_mulnum(c, a)))
        q = compose(f, inv)
        return q, q * q
    if beta > 0:
        q = compose(GrowthExpr.small(pow=1, coeff=_inv(beta)), inv)
        if beta != 1:
            bb = _mulnum(beta, abs(_addnum(beta, -1)))
            p = compose(GrowthExpr.small(pow=2, coeff=_inv(bb)), inv)
        elif g != 0:
            p = compose(GrowthExpr.small(pow=2, log_pow=1, coeff=_inv(abs(g))), inv)
        else:
            p = q * q
        return q, p
    if beta == 0 and g < 0:
        k = _inv(abs(g))
        q = compose(GrowthExpr.small(pow=1, log_pow=1, coeff=k), inv)
        p = compose(GrowthExpr.small(pow=2, log_pow=1, coeff=k), inv)
        return q, p
    raise NotInvertibleFamily("V must increase from 0")


def measure_U(V: GrowthExpr, delta=Fraction(11, 10), sides: int = 2) -> GrowthExpr:
    """U(z) = digamma(delta z) ~ sides * V^{-1}(delta z), leading order."""
    inv = envelope_inverse(V)
    if isinstance(inv, NestedLog):
        inv = inv.leading()
    return inv.scale_arg(delta).scale(sides)


# ---------------------------------------------------------------------------
# concavity


def concavity_check(f: Callable, interval: tuple[float, float], n: int = 200,
                    tol: float = 1e-8, rel_step: float = 1e-3) -> bool:
    """Numerical concavity test on a log grid over (lo, hi].

    Uses the normalised centred second difference z^2 f''(z) / |f(z)| so the
    tolerance is scale free; true iff it is <= tol at every grid point.
    """
    lo, hi = interval
    if lo <= 0:
        lo = hi * 1e-10
    n = max(n, 100)
    zs = np.geomspace(lo, hi / (1 + rel_step), n)
    for z in zs:
        dz = z * rel_step
        fp, f0, fm = float(f(z + dz)), float(f(z)), float(f(z - dz))
        second = (fp - 2 * f0 + fm) / dz**2
        scale = abs(f0) / z**2 if f0 != 0 else 1.0
        if second / scale > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# text form


def _fmt_num(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _fmt_exp(x: Number) -> str:
    s = _fmt_num(x)
    return f"({s})" if "/" in s or "e" in s else s


def format_expr(e: GrowthExpr) -> str:
    """Canonical text: ``C * z^b * log^g * exp(-c * z^-a) @small``.

    Large orientation uses ``t`` and ``exp(c * t^a)``.  Absent factors are
    omitted; the coefficient is always written.
    """
    var = "z" if e.is_small else "t"
    parts = [_fmt_num(e.coeff)]
    if e.pow != 0:
        parts.append(f"{var}^{_fmt_exp(e.pow)}")
    if e.log_pow != 0:
        parts.append(f"log^{_fmt_exp(e.log_pow)}")
    if e.has_exp:
        if e.is_small:
            parts.append(f"exp(-{_fmt_exp(e.exp_coeff)} * z^-{_fmt_exp(e.exp_pow)})")
        else:
            parts.append(f"exp({_fmt_exp(e.exp_coeff)} * t^{_fmt_exp(e.exp_pow)})")
    return " * ".join(parts) + (" @small" if e.is_small else " @large")


_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"
_PNUM = rf"(?:\(\s*{_NUM}\s*\)|{_NUM})"
_EXP_RE = re.compile(
    rf"exp\(\s*(?P<sign>-?)\s*(?P<c>{_PNUM})\s*\*\s*(?P<var>[a-z]+)\s*\^\s*(?P<asign>-?)\s*(?P<a>{_PNUM})\s*\)")


def _parse_num(tok: str) -> Number:
    tok = tok.strip()
    if tok.startswith("(") and tok.endswith(")"):
        tok = tok[1:-1].strip()
    if "/" in tok:
        num, den = tok.split("/")
        n = exact(num.strip())
        return n / int(den) if isinstance(n, Fraction) else float(n) / int(den)
    if re.fullmatch(r"[-+]?\d+", tok):
        return Fraction(int(tok))
    return float(tok)


def parse_expr(text: str) -> GrowthExpr:
    """Inverse of :func:`format_expr` (also accepts missing coefficient)."""
    s = text.strip()
    m = re.search(r"@\s*(small|large)\s*$", s)
    if not m:
        raise ValueError(f"missing @small/@large in {text!r}")
    orient = Orientation(m.group(1))
    s = s[:m.start()].strip()
    exp_coeff, exp_pow = Fraction(0), Fraction(0)
    em = _EXP_RE.search(s)
    if em:
        c = _parse_num(em.group("c"))
        a = _parse_num(em.group("a"))
        neg = em.group("sign") == "-"
        aneg = em.group("asign") == "-"
        if orient is Orientation.SMALL:
            if not aneg:
                raise ValueError("small orientation needs exp(-c * z^-a)")
            exp_coeff = c if neg else -c
        else:
            if aneg:
                raise ValueError("large orientation needs exp(c * t^a)")
            exp_coeff = -c if neg else c
        exp_pow = a
        s = (s[:em.start()] + s[em.end():]).strip()
    coeff, pw, lp = Fraction(1), Fraction(0), Fraction(0)
    for raw in s.split("*"):
        tok = raw.strip()
        if not tok:
            continue
        if tok.startswith("log"):
            lp = _addnum(lp, _parse_num(tok.split("^", 1)[1]) if "^" in tok else Fraction(1))
        elif tok[0].isalpha():
            pw = _addnum(pw, _parse_num(tok.split("^", 1)[1]) if "^" in tok else Fraction(1))
        else:
            coeff = _mulnum(coeff, _parse_num(tok))
    return GrowthExpr(coeff, pw, lp, exp_coeff, exp_pow, orient)
