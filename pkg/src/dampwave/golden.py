"""Golden rate table: pipeline output against closed-form exponent formulas.

Each case builds its resolvent bound through :mod:`dampwave.rate_calculus`
(from the damping envelope V where possible) and compares the resulting
exponents with the closed-form answer written out independently below.
All parameters are rational so the comparison is exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable

from .rate_calculus import (GrowthExpr, RateReport, Z, build_M, build_M_thin,
                            build_M_thin_lower, combine_directional, dbc_data,
                            measure_U, rpow)


def small(pow=0, log_pow=0, exp_coeff=0, exp_pow=0):
    return GrowthExpr.small(pow=pow, log_pow=log_pow, exp_coeff=exp_coeff, exp_pow=exp_pow)


def wide_report(V: GrowthExpr, delta=F(11, 10), variant=None) -> RateReport:
    """Resolvent bound for a y-invariant strip damping with envelope V."""
    q, p = dbc_data(V)
    U = measure_U(V, delta)
    if variant is None:
        variant = "j2" if V.has_exp else "j1"
    return build_M(q, p, U, variant)


@dataclass(frozen=True)
class GoldenCase:
    name: str
    description: str
    build: Callable[[], dict]   # name -> (computed exponents)
    expected: dict              # name -> exponents


def _pl(e: GrowthExpr) -> tuple:
    """(power, log-power) pair, or (power, log-power, exp_coeff, exp_pow)."""
    if e.has_exp:
        return (e.pow, e.log_pow, e.exp_coeff, e.exp_pow)
    return (e.pow, e.log_pow)


def _rt(e: GrowthExpr) -> tuple:
    """Rate exponents; an exponential's constant is unspecified, keep its sign."""
    if e.has_exp:
        return (e.pow, e.log_pow, F((e.exp_coeff > 0) - (e.exp_coeff < 0)), e.exp_pow)
    return (e.pow, e.log_pow)


def _rate_pl(beta, gamma):
    """Rate exponents for a strip with envelope d^beta ln(1/d)^-gamma."""
    return (-(beta + 2) / (beta + 3), -gamma / (beta + 3))


# -- individual cases ------------------------------------------------------

def _strip_exp_intro(alpha=F(1)):
    V = small(exp_coeff=1, exp_pow=alpha)
    r = wide_report(V)
    return {"rate": _rt(r.rate), "positive_increase": r.positive_increase}


def _strip_exp(beta=F(1), c=F(2), alpha=F(1, 2)):
    V = small(pow=beta, exp_coeff=c, exp_pow=alpha)
    return {"rate": _rt(wide_report(V).rate)}


def _strip_polylog(beta=F(2), gamma=F(1, 2)):
    V = small(pow=beta, log_pow=-gamma)
    return {"rate": _rt(wide_report(V).rate)}


def _c1_wide_log(gamma, delta):
    d = rpow(delta, F(1) / gamma)
    return (1 + d) / d


def _strip_log(gamma=F(2), delta=F(4)):
    V = small(log_pow=-gamma)
    r = wide_report(V, delta=delta, variant="j1")
    return {"rate": _rt(r.rate)}


def _thin(V, eps):
    up = build_M_thin(V, eps)
    return {"upper": _rt(up.rate), "lower": _rt(up.lower_rate),
            "positive_increase": up.positive_increase}


def _thin_exp(beta=F(0), alpha=F(1), c=F(1), eps=F(3)):
    return _thin(small(pow=beta, exp_coeff=c, exp_pow=alpha), eps)


def _thin_polylog(beta=F(2), gamma=F(1)):
    return _thin(small(pow=beta, log_pow=-gamma), F(11, 10))


def _thin_log(gamma=F(2)):
    return _thin(small(log_pow=-gamma), F(11, 10))


def _dbc(eps=F(1, 4)):
    r = build_M(Z(eps), None, GrowthExpr.small(), "j1")
    return {"M": _pl(r.M), "rate": _rt(r.rate)}


def _rect_polylog(b1=F(1), b2=F(2), g1=F(1, 2), g2=F(0)):
    reps = [wide_report(small(pow=b1, log_pow=-g1)),            # v = (0, 1)
            wide_report(small(pow=b2, log_pow=-g2)),            # v = (1, 0)
            wide_report(small(pow=b1 + b2 + 1, log_pow=-g1 - g2))]  # oblique
    return {"rate": _rt(combine_directional(reps).rate)}


def _rect_exp(a1=F(1), a2=F(2)):
    # q, p from the rougher (alpha_1) direction; U from the alpha_2 measure
    q = small(log_pow=-(a1 + 1) / a1)
    U = small(log_pow=-1 / a2)
    oblique = build_M(q, q * q, U, "j2")
    axis1 = wide_report(small(exp_coeff=1, exp_pow=a1))
    axis2 = wide_report(small(exp_coeff=1, exp_pow=a2))
    return {"rate": _rt(combine_directional([axis1, axis2, oblique]).rate)}


def _convex_polylog(beta=F(2), gamma=F(1)):
    return {"rate": _rt(wide_report(small(pow=beta + F(1, 2), log_pow=-gamma)).rate)}


def _convex_exp(alpha=F(1), beta=F(1)):
    # averaging raises the power to beta + 1/2 + alpha; q, p are unchanged
    A = small(pow=beta + F(1, 2) + alpha, exp_coeff=1, exp_pow=alpha)
    return {"rate": _rt(wide_report(A).rate)}


def _superellipse_polylog(beta=F(1), gamma=F(1), n=F(4), m=F(2)):
    reps = [wide_report(small(pow=beta + 1 / n, log_pow=-gamma)),
            wide_report(small(pow=beta + 1 / m, log_pow=-gamma)),
            wide_report(small(pow=beta + F(1, 2), log_pow=-gamma))]
    return {"rate": _rt(combine_directional(reps).rate)}


def _superellipse_exp(alpha=F(2), beta=F(1)):
    A = small(pow=beta + F(1, 4) + alpha, exp_coeff=1, exp_pow=alpha)
    return {"rate": _rt(wide_report(A).rate)}


# -- worked examples: intermediate objects ---------------------------------

def _ex_polyexp(alpha=F(1)):
    q = small(log_pow=-(alpha + 1) / alpha)
    U = small(log_pow=-1 / alpha)
    r = build_M(q, q * q, U, "j2")
    return {"R": _pl(r.R), "R_inv": _pl(r.R_inv), "M": _pl(r.M), "m": _pl(r.m),
            "positive_increase": r.positive_increase}


def _ex_polylog(beta=F(2), gamma=F(1)):
    q = small(pow=1 / beta, log_pow=gamma / beta)
    r = build_M(q, None, q, "j1")
    return {"R": _pl(r.R), "R_inv": _pl(r.R_inv), "M": _pl(r.M), "m": _pl(r.m),
            "positive_increase": r.positive_increase}


def _ex_wide_log(gamma=F(2), delta=F(4)):
    V = small(log_pow=-gamma)
    q, _ = dbc_data(V)
    U = measure_U(V, delta)
    r = build_M(q, None, U, "j1")
    return {"q": _pl(q), "R": _pl(r.R), "M": _pl(r.M), "m": _pl(r.m)}


def _ex_thin_exp(beta=F(0), alpha=F(1), c=F(1), eps=F(3)):
    V = small(pow=beta, exp_coeff=c, exp_pow=alpha)
    up = build_M_thin(V, eps)
    lo = build_M_thin_lower(V)
    return {"R_eps": _pl(up.R), "M_eps": _pl(up.M), "M_lower": _pl(lo.M)}


def _ex_thin_polylog(beta=F(2), gamma=F(1)):
    up = build_M_thin(small(pow=beta, log_pow=-gamma), F(11, 10))
    return {"R_inv": _pl(up.R_inv), "M": _pl(up.M), "m": _pl(up.m),
            "positive_increase": up.positive_increase}


def _ex_thin_log(gamma=F(3)):
    up = build_M_thin(small(log_pow=-gamma), F(11, 10))
    return {"R_inv": _pl(up.R_inv), "M": _pl(up.M), "m": _pl(up.m),
            "positive_increase": up.positive_increase}


def _ex_dbc(eps=F(1, 4)):
    r = build_M(Z(eps), None, GrowthExpr.small(), "j1")
    return {"R": _pl(r.R), "M": _pl(r.M), "rate": _rt(r.rate)}


def _ex_product_thin(b1=F(2), b2=F(3)):
    # W = |x|^b1 |y|^b2: averaging along y sees |x|^b1, along x sees |y|^b2;
    # every other rational direction averages to a positive constant
    reps = [build_M_thin(small(pow=b1), F(11, 10)),
            build_M_thin(small(pow=b2), F(11, 10))]
    best = combine_directional(reps)
    return {"M": _pl(best.M), "rate": _rt(best.rate)}


# -- expected values, written out from the closed forms --------------------

def _expected():
    a = F(1)
    e = {}
    e["strip_exp_intro"] = {"rate": (F(-1), (2 * a + 1) / a), "positive_increase": True}
    a = F(1, 2)
    e["strip_exp"] = {"rate": (F(-1), (2 * a + 1) / a)}
    e["strip_polylog"] = {"rate": _rate_pl(F(2), F(1, 2))}
    g, C1 = F(2), _c1_wide_log(F(2), F(4))
    e["strip_log"] = {"rate": (-C1 / (C1 + 1), (1 - g - C1) / (C1 + 1))}
    # thin exp, beta = 0: C1 = (eps^-alpha + 1)/2 = 2/3
    C1t = (F(1, 3) + 1) / 2
    e["thin_exp"] = {"upper": (-C1t, F(-2) / 1), "lower": (F(-1), F(-2)),
                     "positive_increase": True}
    b, g = F(2), F(1)
    e["thin_polylog"] = {"upper": (-(b + 2) / b, 2 * g / b),
                         "lower": (-(b + 2) / b, 2 * g / b),
                         "positive_increase": True}
    g = F(2)
    e["thin_log"] = {"upper": (F(0), F(0), F(-1), 1 / (g + 1)),
                     "lower": (F(0), F(0), F(-1), 1 / g),
                     "positive_increase": False}
    eps = F(1, 4)
    e["dbc"] = {"M": (-(1 + 2 * eps) / (1 + eps), F(0)),
                "rate": (-(1 + eps) / (1 + 2 * eps), F(0))}
    e["rect_polylog"] = {"rate": _rate_pl(F(1), F(1, 2))}
    a1, a2 = F(1), F(2)
    e["rect_exp"] = {"rate": (F(-1), 2 * (a1 + 1) / a1 - 1 / a2)}
    e["convex_polylog"] = {"rate": _rate_pl(F(2) + F(1, 2), F(1))}
    a = F(1)
    e["convex_exp"] = {"rate": (F(-1), (2 * a + 1) / a)}
    e["superellipse_polylog"] = {"rate": _rate_pl(F(1) + F(1, 4), F(1))}
    a = F(2)
    e["superellipse_exp"] = {"rate": (F(-1), (2 * a + 1) / a)}

    a = F(1)
    e["ex_polyexp"] = {"R": (F(1), -2 * (a + 1) / a), "R_inv": (F(1), 2 * (a + 1) / a),
                       "M": (F(-1), (2 * a + 1) / a), "m": (F(1), (2 * a + 1) / a),
                       "positive_increase": True}
    b, g = F(2), F(1)
    e["ex_polylog"] = {"R": ((b + 2) / b, 2 * g / b),
                       "R_inv": (b / (b + 2), -2 * g / (b + 2)),
                       "M": (-(b + 3) / (b + 2), -g / (b + 2)),
                       "m": ((b + 3) / (b + 2), -g / (b + 2)),
                       "positive_increase": True}
    g, C1 = F(2), _c1_wide_log(F(2), F(4))
    e["ex_wide_log"] = {"q": (-1 / g, F(0), F(1), 1 / g),
                        "R": ((g - 1) / g, F(0), C1, 1 / g),
                        "M": (-(C1 + 1) / C1, (1 - g - C1) / C1),
                        "m": ((C1 + 1) / C1, (1 - g - C1) / C1)}
    C1t, al, c, bt = (F(1, 3) + 1) / 2, F(1), F(1), F(0)
    e["ex_thin_exp"] = {"R_eps": (2 + bt, F(0), C1t * c, al),
                        "M_eps": (-1 / C1t, (-2 + bt * (1 - C1t)) / (al * C1t)),
                        "M_lower": (F(-1), -2 / al)}
    b, g = F(2), F(1)
    e["ex_thin_polylog"] = {"R_inv": (1 / (b + 2), g / (b + 2)),
                            "M": (-b / (b + 2), 2 * g / (b + 2)),
                            "m": (b / (b + 2), 2 * g / (b + 2)),
                            "positive_increase": True}
    g = F(3)
    e["ex_thin_log"] = {"R_inv": (F(1, 2), g / 2), "M": (F(0), g), "m": (F(0), g),
                        "positive_increase": False}
    eps = F(1, 4)
    e["ex_dbc"] = {"R": (1 + eps, F(0)), "M": (-(1 + 2 * eps) / (1 + eps), F(0)),
                   "rate": (-(1 + eps) / (1 + 2 * eps), F(0))}
    b = F(3)  # the larger of the two powers governs
    e["ex_product_thin"] = {"M": (-b / (b + 2), F(0)), "rate": (-(b + 2) / b, F(0))}
    return e


_CASES = [
    ("strip_exp_intro", "strip, exp(-(|x|-s)^-a), a=1", _strip_exp_intro),
    ("strip_exp", "strip, x^b exp(-c d^-a), b=1 c=2 a=1/2", _strip_exp),
    ("strip_polylog", "strip, d^b ln(1/d)^-g, b=2 g=1/2", _strip_polylog),
    ("strip_log", "strip, ln(1/d)^-g, g=2 delta=4", _strip_log),
    ("thin_exp", "thin, exp(-|x|^-1), eps=3 (upper, lower)", _thin_exp),
    ("thin_polylog", "thin, |x|^2 ln(1/|x|)^-1 (upper, lower)", _thin_polylog),
    ("thin_log", "thin, ln(1/|x|)^-2 (upper, lower)", _thin_log),
    ("dbc", "|grad W| <= W^(1-e), e=1/4", _dbc),
    ("rect_polylog", "rectangle, b1=1 b2=2 g1=1/2 g2=0", _rect_polylog),
    ("rect_exp", "rectangle, a1=1 a2=2", _rect_exp),
    ("convex_polylog", "convex support, b=2 g=1", _convex_polylog),
    ("convex_exp", "convex support, a=1", _convex_exp),
    ("superellipse_polylog", "super-ellipse n=4 m=2, b=1 g=1", _superellipse_polylog),
    ("superellipse_exp", "super-ellipse, a=2", _superellipse_exp),
    ("ex_polyexp", "strip exp intermediates, a=1", _ex_polyexp),
    ("ex_polylog", "strip poly-log intermediates, b=2 g=1", _ex_polylog),
    ("ex_wide_log", "strip pure-log intermediates, g=2 delta=4", _ex_wide_log),
    ("ex_thin_exp", "thin exp intermediates, b=0 a=1 c=1 eps=3", _ex_thin_exp),
    ("ex_thin_polylog", "thin poly-log intermediates, b=2 g=1", _ex_thin_polylog),
    ("ex_thin_log", "thin pure-log intermediates, g=3", _ex_thin_log),
    ("ex_dbc", "power derivative bound intermediates, e=1/4", _ex_dbc),
    ("ex_product_thin", "|x|^2 |y|^3 directional worst case", _ex_product_thin),
]


def golden_cases() -> list[GoldenCase]:
    exp = _expected()
    return [GoldenCase(n, d, b, exp[n]) for n, d, b in _CASES]


def run_golden() -> list[dict]:
    """Evaluate every case; each row carries expected, computed and match."""
    rows = []
    for case in golden_cases():
        t0 = time.perf_counter()
        got = case.build()
        dt = time.perf_counter() - t0
        for key, want in case.expected.items():
            have = got.get(key)
            rows.append({"case": case.name, "quantity": key,
                         "expected": _show(want), "computed": _show(have),
                         "match": have == want, "seconds": dt})
    return rows


def _show(v) -> str:
    if isinstance(v, tuple):
        return "(" + ", ".join(str(x) for x in v) + ")"
    return str(v)
