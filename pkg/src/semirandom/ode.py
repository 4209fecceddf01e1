"""Fluid limit of the min-degree circle strategy.

With x = rounds / n, the fractions y_i(x) of vertices of degree i evolve,
while the minimum degree equals q, as

    y_i' = -[i == q] + [i == q+1] - y_i + [i >= q+1] * y_{i-1},

for q <= i <= r with r = floor(2*lambda): the circle always lands on a
degree-q vertex and the uniformly random square shifts mass one degree up.
Phase q ends when y_q hits zero; the end values seed phase q+1.  Integration
uses classical fixed-step RK4 with the zero crossing located by bisection on
a single re-step from the bracket start.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import poisson_pmf

DEFAULT_STEP = 1e-4
ROOT_TOL = 1e-10
TAIL_TOL = 1e-12


@dataclass
class PhaseTrack:
    """Stored grid of one phase: y[:, i] is the trajectory of degree q+i."""

    q: int
    xs: np.ndarray
    ys: np.ndarray


@dataclass
class PhaseSolution:
    lam: float
    r: int
    boundaries: list = field(default_factory=list)
    phases: list = field(default_factory=list)
    w: dict = field(default_factory=dict)
    lower_bound_coeff: float = 0.0
    active_phase: int = 0
    ended_before_time: bool = False


def _rhs(y: np.ndarray, has_next: bool) -> np.ndarray:
    """Derivative of (y_q, ..., y_r) inside one phase."""
    dy = -y.copy()
    dy[1:] += y[:-1]
    dy[0] -= 1.0
    if has_next:
        dy[1] += 1.0
    return dy


def _rk4_step(y: np.ndarray, h: float, has_next: bool) -> np.ndarray:
    k1 = _rhs(y, has_next)
    k2 = _rhs(y + 0.5 * h * k1, has_next)
    k3 = _rhs(y + 0.5 * h * k2, has_next)
    k4 = _rhs(y + h * k3, has_next)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_phases(lam: float, step: float = DEFAULT_STEP) -> PhaseSolution:
    """Integrate phase by phase until phase r ends or x reaches lam.

    Returns boundaries x_q found so far, the per-phase trajectory grids, the
    degree profile w(k) at x = lam (ODE values on the tracked range, Poisson
    mass above r), and the independence coefficient sum w(k)/(k+1).
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    r = math.floor(2.0 * lam)
    sol = PhaseSolution(lam=lam, r=r)
    q = 0
    x = 0.0
    y = np.zeros(r + 1 - q)
    y[0] = 1.0
    y_at_lam: Optional[np.ndarray] = None

    while q <= r:
        has_next = q < r
        xs = [x]
        ys = [y.copy()]
        boundary_found = False
        while True:
            h = step
            hit_lam = x + h >= lam and y_at_lam is None
            if hit_lam:
                h = lam - x
            y_new = _rk4_step(y, h, has_next) if h > 0 else y.copy()
            if y_new[0] <= 0.0:
                x_root, y_root = _bisect_root(y, x, h, has_next)
                if hit_lam and x_root >= lam - ROOT_TOL:
                    y_at_lam = y_root.copy()
                    sol.active_phase = q
                x = x_root
                y = y_root
                xs.append(x)
                ys.append(y.copy())
                boundary_found = True
                break
            x += h
            y = y_new
            xs.append(x)
            ys.append(y.copy())
            if hit_lam:
                y_at_lam = y.copy()
                sol.active_phase = q
                break
        sol.phases.append(PhaseTrack(q=q, xs=np.array(xs), ys=np.array(ys)))
        if boundary_found:
            sol.boundaries.append(x)
            if y_at_lam is not None:
                break
            q += 1
            y = y[1:].copy()
            if y.size == 0:
                break
        else:
            break

    if y_at_lam is None:
        # every phase ended before x reached lam; rewind from the end state
        warnings.warn(
            "all phases ended before x = lambda; profile uses the final "
            "phase end values",
            stacklevel=2,
        )
        sol.ended_before_time = True
        sol.active_phase = min(q, r)
        last = sol.phases[-1]
        y_at_lam = last.ys[-1]
        if sol.active_phase > last.q:
            y_at_lam = y_at_lam[sol.active_phase - last.q:]

    q_act = sol.active_phase
    w = {}
    for i, val in enumerate(y_at_lam):
        w[q_act + i] = float(max(val, 0.0))
    k = r + 1
    remaining = 1.0 - sum(poisson_pmf(lam, j) for j in range(k))
    while remaining > TAIL_TOL:
        p = poisson_pmf(lam, k)
        w[k] = p
        remaining -= p
        k += 1
    sol.w = w
    sol.lower_bound_coeff = sum(m / (d + 1.0) for d, m in w.items())
    return sol


def _bisect_root(y0: np.ndarray, x0: float, h_max: float, has_next: bool):
    """Locate the zero of the leading component within (x0, x0 + h_max].

    Each probe is a single RK4 step of the trial size from the bracket
    start, so the located point inherits the integrator's accuracy.
    """
    lo = 0.0
    hi = h_max
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        y_mid = _rk4_step(y0, mid, has_next)
        if y_mid[0] <= 0.0:
            hi = mid
        else:
            lo = mid
    y_root = _rk4_step(y0, hi, has_next)
    y_root[0] = 0.0
    return x0 + hi, y_root


def online_alpha_lower(lam: float, step: float = DEFAULT_STEP) -> float:
    """Independence-number coefficient sum_{k >= q} w(k)/(k+1) at x = lam."""
    return integrate_phases(lam, step).lower_bound_coeff
