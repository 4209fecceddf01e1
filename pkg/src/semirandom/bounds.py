"""Closed-form and implicitly-defined constants for the process regimes.

All logarithms are natural.  Three time regimes are distinguished by how
t compares with n log n: the sparse regime (beta = n log n / t large), the
linear-in-log regime (gamma = t / (n log n) constant) whose constants hinge
on the root xi(gamma), and the dense regime (omega = t / (n log n) large).

Everything here is a pure function of its inputs and evaluates every
asymptotic correction at the concrete n supplied.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict
from typing import Optional

# Where the lower-bound coefficient max{xi, 2} switches branch (xi = 2).
GAMMA_LOWER_SWITCH = 1.0 / (2.0 * math.log(2.0) - 1.0)
# Where the two upper-bound coefficients cross (xi = 64e), approximately.
GAMMA_UPPER_SWITCH = 1.0 / (64.0 * math.e * math.log(64.0) - 1.0)

XI_RESIDUAL_TOL = 1e-12


@dataclass
class RegimeBounds:
    """Every bound constant relevant to one (n, t) configuration.

    Fields that do not apply to the regime stay None.
    """

    n: int
    t: Optional[int] = None
    regime: str = ""
    lam: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    omega: Optional[float] = None
    xi: Optional[float] = None
    ell: Optional[float] = None
    eps: Optional[float] = None
    k: Optional[float] = None
    k_prime: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    k1_prime: Optional[float] = None
    k2_prime: Optional[float] = None
    chi_lower: Optional[float] = None
    chi_upper: Optional[float] = None
    alpha_upper: Optional[float] = None
    alpha_lower: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and v != ""}


class RegimeError(ValueError):
    """The requested formula does not apply to this (n, t)."""


def solve_xi(gamma: float) -> float:
    """Unique xi > 1 with xi*(log(xi) - 1) = 1/gamma - 1.

    Bisection on a doubling bracket down to width 1e-10, then two Newton
    steps (the derivative log(xi) is positive on (1, inf), so Newton from a
    tight bracket converges).  Residual of the defining equation is below
    1e-12 at the returned root.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    target = 1.0 / gamma - 1.0

    def g(x: float) -> float:
        return x * (math.log(x) - 1.0) - target

    lo = 1.0
    hi = 2.0
    while g(hi) < 0.0:
        hi *= 2.0
    # absolute width for roots O(1), relative once the root is large; the
    # midpoint guard stops at the floating-point resolution either way
    while hi - lo > 1e-10 * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(2):
        x -= g(x) / math.log(x)
    residual = 1.0 - x * gamma * (math.log(x) - 1.0) - gamma
    if abs(residual) > XI_RESIDUAL_TOL:
        raise ArithmeticError(f"xi root residual {residual} above tolerance")
    return x


def regime_auto(n: int, t: int) -> str:
    """Concrete splitter for finite n; the asymptotic regimes overlap."""
    nlogn = n * math.log(n) if n > 1 else float(n)
    loglog = math.log(math.log(n)) if n > 15 else 1.0
    if t < nlogn / max(loglog, 1.0):
        return "small"
    if t <= 10.0 * nlogn:
        return "log"
    return "vlarge"


def small_t_bounds(n: int, t: int) -> RegimeBounds:
    """Sparse-regime constants (t well below n log n, beta -> infinity)."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    logn = math.log(n)
    beta = n * logn / t
    if beta <= 1.0:
        raise RegimeError(
            f"beta = n log n / t = {beta:.4g} <= 1; use large_t_bounds instead"
        )
    log_beta = math.log(beta)
    denom = log_beta - 2.0 * math.log(log_beta)
    if denom <= 0.0:
        raise RegimeError(
            f"log(beta) - 2 log log(beta) = {denom:.4g} <= 0; "
            "use large_t_bounds instead"
        )
    if t > n * logn / max(math.log(logn), 1.0):
        warnings.warn(
            "t is outside the intended sparse regime (t << n log n)",
            stacklevel=2,
        )
    loglogn = math.log(logn)
    lam = t / n
    ell = logn / denom
    if beta <= logn / loglogn:
        eps = math.e**2 * log_beta / beta
    elif beta <= logn**2:
        eps = 15.0 * math.log(ell) / ell
    else:
        eps = math.e / ell
    k = (logn - 2.0 * loglogn - lam) / log_beta
    k_prime = ell * (1.0 + 4.0 * eps**0.25)
    return RegimeBounds(
        n=n, t=t, regime="small", lam=lam, beta=beta,
        ell=ell, eps=eps, k=k, k_prime=k_prime,
        chi_lower=k, chi_upper=2.0 * ell + 2.0,
    )


def large_t_bounds(n: int, gamma: float) -> RegimeBounds:
    """Constants for t = gamma * n log n; all four k bounds plus chi."""
    xi = solve_xi(gamma)
    logn = math.log(n)
    loglogn = math.log(logn)
    ell = xi * gamma * logn
    log_xi_m1 = math.log(xi) - 1.0
    if log_xi_m1 != 0.0:
        k1 = ((1.0 - gamma) * logn - 2.0 * loglogn) / log_xi_m1
    else:
        k1 = -math.inf
    k2 = 2.0 * gamma * logn - 4.0 * math.sqrt(gamma * logn * loglogn)
    k1_prime = (
        (1.0 + 3.0 / math.sqrt(logn))
        * (1.0 + 2.0 * math.sqrt(2.0) * (math.e / xi) ** 0.25)
        * ell
    )
    k2_prime = 2.0 * ell + 1.0
    t = gamma * n * logn
    return RegimeBounds(
        n=n, t=int(round(t)), regime="log", lam=t / n, gamma=gamma,
        xi=xi, ell=ell,
        k1=k1, k2=k2, k1_prime=k1_prime, k2_prime=k2_prime,
        k=max(k1, k2), k_prime=min(k1_prime, k2_prime),
        chi_lower=max(k1, k2), chi_upper=2.0 * ell + 2.0,
    )


def very_large_t_bounds(n: int, t: int) -> RegimeBounds:
    """Dense-regime constants (t at least n log n, omega large)."""
    logn = math.log(n)
    omega = t / (n * logn)
    if omega < 1.0:
        raise RegimeError(
            f"omega = t/(n log n) = {omega:.4g} < 1; use small/large t bounds"
        )
    if omega < 10.0:
        warnings.warn(
            "omega < 10: dense-regime bounds are intended for omega -> infinity",
            stacklevel=2,
        )
    base = 2.0 * t / n
    corr = omega ** (-1.0 / 3.0)
    k = min(base * (1.0 - corr), float(n))
    k_prime = base * (1.0 + corr)
    return RegimeBounds(
        n=n, t=t, regime="vlarge", lam=t / n, omega=omega,
        k=k, k_prime=k_prime,
        chi_lower=k, chi_upper=k_prime,
    )


def alpha_bounds(n: int, t: int) -> RegimeBounds:
    """Independence-number bounds via the partitioned circulant strategy.

    ell = lambda - sqrt(5 lambda log lambda) must be positive; the part size
    is k = 2*ceil(ell) + 1.  The upper bound u follows the three
    average-degree cases, split concretely at lambda > n^(2/5) and at
    lambda >= 30.
    """
    lam = t / n
    if lam <= 1.0:
        raise ValueError(f"lambda = t/n = {lam:.4g} too small for a positive ell")
    ell = lam - math.sqrt(5.0 * lam * math.log(lam))
    if ell <= 0.0:
        raise ValueError(
            f"ell = lambda - sqrt(5 lambda log lambda) = {ell:.4g} <= 0 "
            f"at lambda = {lam:.4g}"
        )
    ell_c = math.ceil(ell)
    k = 2 * ell_c + 1
    parts = math.ceil(n / k)
    if lam > n ** 0.4:
        u = float(parts)
    elif lam >= 30.0:
        u = parts * (1.0 + k**2 * math.sqrt(math.log(lam)) / lam**2.5)
    else:
        u = n * (1.0 / k + 2.0 * ell_c / lam**2.5) + n**0.75
    return RegimeBounds(
        n=n, t=t, regime="alpha", lam=lam, ell=ell, k=float(k),
        alpha_upper=u, alpha_lower=n / (2.0 * lam + 1.0),
    )


def chernoff_tail(mean: float, deviation: float, side: str = "upper") -> float:
    """Binomial tail bound: exp(-d^2 / (2(mu + d/3))) above, exp(-d^2/(2mu)) below."""
    if mean < 0 or deviation < 0:
        raise ValueError("mean and deviation must be nonnegative")
    if deviation == 0.0:
        return 1.0
    if side == "upper":
        return math.exp(-(deviation**2) / (2.0 * (mean + deviation / 3.0)))
    if side == "lower":
        if mean == 0.0:
            return 0.0
        return math.exp(-(deviation**2) / (2.0 * mean))
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def poisson_pmf(lam: float, k: int) -> float:
    """P(Poisson(lam) = k), evaluated in log space for stability."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if k < 0 or k != int(k):
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


@dataclass
class OfflineProfile:
    """Limiting degree profile h(k) of the batched greedy circle placement."""

    lam: float
    m_level: int
    f: list = field(default_factory=list)
    g_m: float = 0.0
    h: dict = field(default_factory=dict)
    lower_bound_coeff: float = 0.0


def offline_profile(lam: float, tail_tol: float = 1e-12) -> OfflineProfile:
    """Compute M, f, g and the degree-mass map h for intensity lam.

    f(m) = sum_{k<m} (m-k) p_k is the circle mass needed to level everything
    below m up to m; M is the largest m with f(m) <= lam.  Mass at M and M+1
    is rebalanced by the leftover lam - f(M); above M+1 the profile is the
    raw Poisson mass.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")

    def f_of(m: int) -> float:
        return sum((m - k) * poisson_pmf(lam, k) for k in range(m))

    m = 0
    f_vals = [0.0]
    while True:
        nxt = f_of(m + 1)
        if nxt > lam:
            break
        f_vals.append(nxt)
        m += 1
    f_m = f_vals[m]
    g_m = sum(poisson_pmf(lam, k) for k in range(m + 1))
    h = {m: g_m - lam + f_m, m + 1: poisson_pmf(lam, m + 1) + lam - f_m}
    k = m + 2
    remaining = 1.0 - sum(poisson_pmf(lam, j) for j in range(k))
    while remaining > tail_tol:
        p = poisson_pmf(lam, k)
        h[k] = p
        remaining -= p
        k += 1
    coeff = sum(mass / (deg + 1.0) for deg, mass in h.items())
    return OfflineProfile(
        lam=lam, m_level=m, f=f_vals + [f_of(m + 1)], g_m=g_m, h=h,
        lower_bound_coeff=coeff,
    )


def clique_coefficients(gamma: float) -> dict:
    """Asymptotic clique and chromatic coefficients at one gamma (figure data)."""
    xi = solve_xi(gamma)
    lower = max(xi, 2.0) * gamma
    upper = min(1.0 + 2.0 * math.sqrt(2.0) * (math.e / xi) ** 0.25, 2.0) * xi * gamma
    return {
        "gamma": gamma,
        "xi": xi,
        "k_lower_coeff": lower,
        "k_upper_coeff": upper,
        "ratio": upper / lower,
        "chi_lower_coeff": lower,
        "chi_upper_coeff": 2.0 * xi * gamma,
    }
