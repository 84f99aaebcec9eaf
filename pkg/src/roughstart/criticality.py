"""Scaling calculator: subcriticality, growth exponents, admissibility
windows, and the slowly varying envelope functions.

All exponent arithmetic runs through fractions.Fraction when the inputs are
rational, so threshold comparisons (delta vs 1/m, beta0 - 1, ...) are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from fractions import Fraction

import numpy as np

from .equations import EquationSpec
from .lp import tamed_log


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    f = float(x)
    if f.is_integer():
        return Fraction(int(f))
    return Fraction(f).limit_denominator(10 ** 9)


def _pos(x: Fraction) -> Fraction:
    return x if x > 0 else Fraction(0)


# theta used for the regime call when none is supplied: the value at which
# each equation's narrative is usually told.
_DEFAULT_THETA = {
    "surface_growth": Fraction(0),
    "kpz": Fraction(0),
    "ks": Fraction(1, 2),
    "reaction_diffusion": Fraction(3, 2),
    "burgers": Fraction(1, 2),
}


def chi_exponents(spec: EquationSpec, theta) -> dict:
    """Growth exponents of the first two random objects and the induced
    minimal time weight:

        chi0 = 2 b + 2 theta + d/2
        chi1 = a + b + theta + (b + theta + d/2)_+
        beta0(alpha) = max((alpha + chi1)/tau, max(chi0/tau, 0)).
    """
    a, b, d, th = _frac(spec.a), _frac(spec.b), Fraction(spec.d), _frac(theta)
    tau = _frac(spec.tau)
    chi0 = 2 * b + 2 * th + Fraction(d, 2)
    chi1 = a + b + th + _pos(b + th + Fraction(d, 2))

    def beta0(alpha) -> Fraction:
        return max((_frac(alpha) + chi1) / tau, max(chi0 / tau, Fraction(0)))

    return {"chi0": chi0, "chi1": chi1, "beta0": beta0}


@dataclass(frozen=True)
class CriticalityReport:
    kind: str
    tau: Fraction
    sigma: Fraction
    a: Fraction
    b: Fraction
    alpha_min: Fraction
    delta: Fraction
    critical_exponent: Fraction
    theta: Fraction
    chi0: Fraction
    chi1: Fraction
    regime: str
    r_threshold_fix1: Fraction
    r_threshold_fix2: Fraction

    def beta0_of_alpha(self, alpha) -> Fraction:
        tau = self.tau
        return max((_frac(alpha) + self.chi1) / tau, max(self.chi0 / tau, Fraction(0)))


def classify(spec: EquationSpec, theta=None) -> CriticalityReport:
    """Regime call for one equation.

    alpha_min = b is the least regularity at which the quadratic term makes
    sense mode by mode; delta = 1 - (alpha_min + sigma)/tau measures how far
    the fixed point sits from scaling criticality.  delta > 1/m: plain
    contraction with rough deterministic data already reaches the critical
    space.  delta = 1/m: borderline, nothing gained or lost.  Below that, a
    Gaussian start helps iff the first object grows slower than the
    semigroup smooths (chi0/tau < 1 at the supplied theta).
    """
    tau, sigma, a, b = (_frac(spec.tau), _frac(spec.sigma), _frac(spec.a), _frac(spec.b))
    m = spec.degree_m
    alpha_min = b
    delta = 1 - (alpha_min + sigma) / tau
    if theta is None:
        theta = _DEFAULT_THETA.get(spec.kind, Fraction(0))
    th = _frac(theta)
    ce = chi_exponents(spec, th)
    chi0, chi1 = ce["chi0"], ce["chi1"]
    if delta > Fraction(1, m):
        regime = "deterministic_sufficient"
    elif delta == Fraction(1, m):
        regime = "critical_open"
    elif chi0 / tau < 1:
        regime = "random_ic_helps"
    else:
        regime = "random_ic_insufficient"
    # admissible Hoelder exponents r of the initial condition: the direct
    # formulation reaches r > -sigma when delta > 1/2, otherwise only the
    # weighted window r > alpha_min - tau/2, which is also what the
    # remainder formulation gives (the two thresholds coincide there).
    r2 = alpha_min - tau / 2
    r1 = -sigma if delta > Fraction(1, 2) else r2
    return CriticalityReport(kind=spec.kind, tau=tau, sigma=sigma, a=a, b=b,
                             alpha_min=alpha_min, delta=delta,
                             critical_exponent=-sigma, theta=th,
                             chi0=chi0, chi1=chi1, regime=regime,
                             r_threshold_fix1=r1, r_threshold_fix2=r2)


def fix1_feasible(beta, delta) -> bool:
    """Weight window of the direct contraction: beta < 1/2, beta <= 1 - delta."""
    be, de = _frac(beta), _frac(delta)
    return be < Fraction(1, 2) and be <= 1 - de


def fix2_feasible(beta, gamma, delta) -> bool:
    """Remainder formulation window: beta < 1/2, beta + delta <= 1,
    gamma + beta < 1, delta + gamma <= 1."""
    be, ga, de = _frac(beta), _frac(gamma), _frac(delta)
    return (be < Fraction(1, 2) and be + de <= 1
            and ga + be < 1 and de + ga <= 1)


@dataclass(frozen=True)
class FeasibilityQuery:
    alpha: float
    beta: float
    gamma: float
    inv_p: float

    def __post_init__(self):
        if not (0 < self.gamma < 1 and 0 < self.inv_p <= 1):
            raise ValueError("need (gamma, 1/p) in (0,1) x (0,1]")


def eta2_feasibility(query: FeasibilityQuery, beta0, chi0_over_tau, case: int = 1) -> dict:
    """Exponent window for the L^p-in-time construction of the second object.

    case 1 (Sobolev embedding route, beta in (beta0 - 1, 1)):
        gamma p > 1;  gamma < (1/p)/(1 - beta);  0 < gamma - 1/p;
        gamma - 1/p < beta + 1 - beta0;  gamma < 2 - beta0;
        1/p > (chi0/tau)_+ - beta.
    case 2 (endpoint route, beta in (beta0 - 1, 0)):
        gamma p > 1;  beta0 p < 1;  p (gamma - (beta + 1 - beta0)) < 1.
    """
    b0 = _frac(beta0)
    c0t = _frac(chi0_over_tau)
    be = _frac(query.beta)
    g = _frac(query.gamma)
    ip = _frac(query.inv_p)
    if case == 1:
        if not (b0 - 1 < be < 1):
            raise ValueError("case 1 needs beta in (beta0 - 1, 1)")
        conds = {
            "gamma_p_gt_1": g > ip,
            "sobolev": g < ip / (1 - be),
            "window_lower": g - ip > 0,
            "window_upper": g - ip < be + 1 - b0,
            "gamma_lt_2_minus_beta0": g < 2 - b0,
            "integrability": ip > _pos(c0t) - be,
        }
    elif case == 2:
        if not (b0 - 1 < be < 0):
            raise ValueError("case 2 needs beta in (beta0 - 1, 0)")
        conds = {
            "gamma_p_gt_1": g > ip,
            "beta0_p_lt_1": b0 < ip,
            "endpoint": g - (be + 1 - b0) < ip,
        }
    else:
        raise ValueError("case must be 1 or 2")
    return {"feasible": all(conds.values()), "conditions": conds}


def eta2_region_sample(beta0, chi0_over_tau, beta, case: int = 1,
                       n_grid: int = 200) -> dict:
    """Grid search over (gamma, 1/p) in (0,1) x (0,1]; returns the feasible
    fraction and one feasible point when the region is nonempty."""
    gammas = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
    inv_ps = np.linspace(0.0, 1.0, n_grid + 1)[1:]
    mask = np.zeros((n_grid, n_grid), dtype=bool)
    for i, g in enumerate(gammas):
        for j, ip in enumerate(inv_ps):
            q = FeasibilityQuery(0.0, beta, float(g), float(ip))
            mask[i, j] = eta2_feasibility(q, beta0, chi0_over_tau, case)["feasible"]
    point = None
    if mask.any():
        i, j = np.argwhere(mask)[0]
        point = (float(gammas[i]), float(inv_ps[j]))
    return {"fraction_feasible": float(mask.mean()), "nonempty": bool(mask.any()),
            "point": point, "mask": mask}


def asymptotic_G(nu: float, p: float, tau: float, t: float,
                 tol: float = 1e-16, max_terms: int = 10000) -> float:
    """G(t) = sum_{n>=1} n^nu 2^{p n} exp(-2^{tau n} t); the double
    exponential in n makes adaptive truncation safe."""
    if t <= 0 or tau <= 0 or p < 0:
        raise ValueError("need t > 0, tau > 0, p >= 0")
    total = 0.0
    for n in range(1, max_terms + 1):
        term = n ** nu * 2.0 ** (p * n) * math.exp(-(2.0 ** (tau * n)) * t)
        total += term
        if n > 4 and term < tol * max(total, 1e-300):
            break
    return total


def asymptotic_H(nu: float, p: float, tau: float, t: float,
                 max_terms: int = 10000) -> float:
    """H(t): max over n of the G summand."""
    if t <= 0 or tau <= 0 or p < 0:
        raise ValueError("need t > 0, tau > 0, p >= 0")
    best = 0.0
    for n in range(1, max_terms + 1):
        term = n ** nu * 2.0 ** (p * n) * math.exp(-(2.0 ** (tau * n)) * t)
        if term > best:
            best = term
        elif n > 4 and term < best * 1e-16:
            break
    return best


def envelope_ratio(nu: float, p: float, tau: float, t: float) -> float:
    """G(t) divided by its envelope t^{-p/tau} ell(t)^nu: bounded on (0, 1]."""
    env = t ** (-p / tau) * tamed_log(t) ** nu
    return asymptotic_G(nu, p, tau, t) / env


__all__ = [
    "CriticalityReport", "FeasibilityQuery", "chi_exponents", "classify",
    "fix1_feasible", "fix2_feasible", "eta2_feasibility", "eta2_region_sample",
    "asymptotic_G", "asymptotic_H", "envelope_ratio", "tamed_log",
]
