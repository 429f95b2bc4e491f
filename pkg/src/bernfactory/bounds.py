"""Expected running-time bounds for the linear factory and a tuner for (m, gamma).

All functions here are deterministic and draw no random numbers. Flip counts
are in units of p-coin flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, InfeasibleBoundError
from .linear import EPS_CLAMP, FactoryParams

SUP_GRID = 10_001
SIMPLE_CONSTANT = 9.5
ABSTRACT_LOWER_CONSTANT = 0.004

M_RANGE = (0.5, 6.0)
GAMMA_RANGE = (0.05, 0.95)


def _check(C: float, eps: float, gamma: float | None = None, k: float | None = None):
    if not C > 1.0:
        raise DomainError(f"C must be > 1, got {C}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if gamma is not None and not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if k is not None and not k > 0.0:
        raise DomainError(f"k must be > 0, got {k}")


def ratio_r(eps: float, gamma: float, k: float) -> float:
    return math.exp(-k * eps * gamma) / (1.0 - gamma) ** 2


def theorem4_bound(C: float, eps: float, gamma: float, k: float, p):
    """Upper bound on E[flips] at a fixed p (scalar or array).

        (k(C-1) + C) / (1 - (Cp)^k) - (C-1) / (1 - Cp)
          + r [gamma k (C' - 1) + (1-gamma)^2 C'] / ((1 - r)(1 - (Cp)^k))

    with ``C' = C / (1 - eps)`` and ``r = exp(-k eps gamma) / (1-gamma)^2``.
    """
    _check(C, eps, gamma, k)
    r = ratio_r(eps, gamma, k)
    if not r < 1.0:
        raise InfeasibleBoundError(f"r = {r:.6g} >= 1: bound is infinite")
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0) or np.any(C * p_arr >= 1.0):
        raise DomainError("need 0 <= p < 1/C")
    x = C * p_arr
    escape = 1.0 - x**k
    Ce = C / (1.0 - eps)
    tail = r * (gamma * k * (Ce - 1.0) + (1.0 - gamma) ** 2 * Ce) / (1.0 - r)
    val = (k * (C - 1.0) + C + tail) / escape - (C - 1.0) / (1.0 - x)
    return float(val) if val.ndim == 0 else val


def _sup_over_p(C: float, eps: float, gamma: float, k: float, grid: int) -> tuple[float, float, float]:
    """(sup value, argmax p, grid max) over p in [0, (1 - eps)/C]."""
    ps = np.linspace(0.0, (1.0 - eps) / C, grid)
    vals = theorem4_bound(C, eps, gamma, k, ps)
    at = int(np.argmax(vals))
    grid_max = float(vals[at])
    lo, hi = ps[max(at - 1, 0)], ps[min(at + 1, grid - 1)]
    best, best_p = grid_max, float(ps[at])
    if hi > lo:
        res = minimize_scalar(lambda q: -theorem4_bound(C, eps, gamma, k, q),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(hi, 1e-300)})
        if -res.fun > best:
            best, best_p = float(-res.fun), float(res.x)
    return best, best_p, grid_max


def sup_bound(C: float, eps: float, gamma: float, m: float, grid: int = SUP_GRID) -> float:
    """Worst case over the promise interval of :func:`theorem4_bound`.

    eps is clamped to 0.644 as the sampler does, and ``k = m / (gamma eps)``.
    A dense grid locates the maximiser, then a bounded scalar search polishes
    it between the neighbouring grid points.
    """
    _check(C, eps, gamma)
    if not m > 0.0:
        raise DomainError(f"m must be > 0, got {m}")
    e = min(eps, EPS_CLAMP)
    return _sup_over_p(C, e, gamma, m / (gamma * e), grid)[0]


def sup_bound_detail(C: float, eps: float, gamma: float, m: float,
                     grid: int = SUP_GRID) -> dict:
    e = min(eps, EPS_CLAMP)
    k = m / (gamma * e)
    val, p_at, grid_max = _sup_over_p(C, e, gamma, k, grid)
    return {"value": val, "argmax_p": p_at, "grid_max": grid_max, "k": k,
            "r": ratio_r(e, gamma, k)}


def params_sup_bound(params: FactoryParams) -> float:
    return sup_bound(params.C, params.eps, params.gamma, params.m)


def simple_bound(C: float, eps: float) -> float:
    """The coarse 9.5 C / eps bound (eps clamped to 0.644 first)."""
    _check(C, eps)
    return SIMPLE_CONSTANT * C / min(eps, EPS_CLAMP)


def stage_params(j: int, params: FactoryParams) -> tuple[float, float, float]:
    """``(C_j, eps_j, k_j)`` for stage ``j`` (1-based)."""
    if j < 1:
        raise DomainError(f"stage index must be >= 1, got {j}")
    C, e, k, g = params.C, params.eps, params.k, params.gamma
    for _ in range(j - 1):
        C *= 1.0 + g * e
        e *= 1.0 - g
        k /= 1.0 - g
    return C, e, k


def stage_bound(j: int, params: FactoryParams, p: float) -> float:
    """Expected flips spent in stage j: ``[gamma k_j (C_j - 1) + C_j] / (1 - C_j p)``."""
    Cj, _, kj = stage_params(j, params)
    if not 0.0 <= p or not Cj * p < 1.0:
        raise DomainError(f"need 0 <= p and C_j p < 1 (C_{j} = {Cj:.6g}, p = {p})")
    return (params.gamma * kj * (Cj - 1.0) + Cj) / (1.0 - Cj * p)


def stage_reach_probability_bound(j: int, params: FactoryParams, p: float) -> float:
    """Upper bound on P(stage j is entered); stage 1 is always entered."""
    if j < 1:
        raise DomainError(f"stage index must be >= 1, got {j}")
    x = params.C * p
    if not 0.0 <= x < 1.0:
        raise DomainError("need 0 <= C p < 1")
    if j == 1:
        return 1.0
    val = math.exp(-(j - 1) * params.gamma * params.eps * params.k) * (1.0 - x) / (1.0 - x**params.k)
    return min(1.0, val)


def lower_bound(C: float, eps: float) -> float:
    """Lower bound on the worst-case E[flips] of any Cp factory.

    Comes from running a four-success negative-binomial estimator on top of
    the factory, which is a (sqrt(eps), 1/4)-approximation, and comparing
    with the general sample-complexity bound for such estimators:

        E[T] >= (C/16) (3/4) (1 - sqrt(eps))^2 ln 7 (1 - (1-eps)/C) / (e^2 eps)
    """
    _check(C, eps)
    return (C / 16.0 * 0.75 * (1.0 - math.sqrt(eps)) ** 2 * math.log(7.0)
            * (1.0 - (1.0 - eps) / C) / (math.e**2 * eps))


def lower_bound_abstract(C: float, eps: float) -> float:
    """Informational 0.004 C / eps form; not derived from the estimator chain above."""
    _check(C, eps)
    return ABSTRACT_LOWER_CONSTANT * C / eps


# ---------------------------------------------------------------------------
# choosing (m, gamma)


@dataclass(frozen=True)
class OptimizedParams:
    m_star: float
    gamma_star: float
    k_star: float
    bound_value: float

    def as_dict(self) -> dict:
        return {"m": self.m_star, "gamma": self.gamma_star, "k": self.k_star,
                "bound": self.bound_value}


def _objective(C: float, eps: float, m: float, gamma: float) -> float:
    if math.exp(-m) / (1.0 - gamma) ** 2 >= 1.0:
        return math.inf
    return sup_bound(C, eps, gamma, m)


def _coarse_surface(C: float, eps: float, ms: np.ndarray, gs: np.ndarray, p_grid: int) -> np.ndarray:
    """sup over a coarse p grid, for every (m, gamma) pair; inf where r >= 1."""
    ps = np.linspace(0.0, (1.0 - eps) / C, p_grid)
    x = C * ps
    Ce = C / (1.0 - eps)
    out = np.full((ms.size, gs.size), np.inf)
    for a, g in enumerate(gs):
        k = ms / (g * eps)
        r = np.exp(-ms) / (1.0 - g) ** 2
        ok = r < 1.0
        if not ok.any():
            continue
        k, r, mi = k[ok], r[ok], np.flatnonzero(ok)
        tail = r * (g * k * (Ce - 1.0) + (1.0 - g) ** 2 * Ce) / (1.0 - r)
        escape = 1.0 - x[None, :] ** k[:, None]
        vals = (k[:, None] * (C - 1.0) + C + tail[:, None]) / escape - (C - 1.0) / (1.0 - x[None, :])
        out[mi, a] = vals.max(axis=1)
    return out


def optimize_params(C: float, eps: float, rel_tol: float = 1e-4,
                    coarse_p_grid: int = 257) -> OptimizedParams:
    """Minimise :func:`sup_bound` over m in [0.5, 6] and gamma in [0.05, 0.95].

    A 0.01-step grid over (m, gamma), scored against a coarse p grid, picks a
    start; alternating bounded line searches on m and gamma with the full
    sup then refine it until the objective stops improving by more than
    ``rel_tol`` (relative).
    """
    _check(C, eps)
    if eps > EPS_CLAMP:
        raise DomainError(f"eps must be <= {EPS_CLAMP}, got {eps}")
    ms = np.round(np.arange(M_RANGE[0], M_RANGE[1] + 1e-9, 0.01), 10)
    gs = np.round(np.arange(GAMMA_RANGE[0], GAMMA_RANGE[1] + 1e-9, 0.01), 10)
    surface = _coarse_surface(C, eps, ms, gs, coarse_p_grid)
    if not np.isfinite(surface).any():
        raise InfeasibleBoundError("no feasible (m, gamma) in the search box")

    # re-score the best few coarse cells with the full sup
    order = np.argsort(surface, axis=None)[:5]
    best = (math.inf, 0.0, 0.0)
    for flat in order:
        a, b = np.unravel_index(flat, surface.shape)
        val = _objective(C, eps, float(ms[a]), float(gs[b]))
        if val < best[0]:
            best = (val, float(ms[a]), float(gs[b]))
    val, m, g = best

    for _ in range(200):
        prev = val
        # keep each line search inside r < 1: m > -2 ln(1 - gamma)
        m_lo = max(M_RANGE[0], -2.0 * math.log1p(-g) * (1.0 + 1e-9))
        res = minimize_scalar(lambda t: _objective(C, eps, t, g), bounds=(m_lo, M_RANGE[1]),
                              method="bounded", options={"xatol": 1e-7})
        if res.fun < val:
            val, m = float(res.fun), float(res.x)
        g_hi = min(GAMMA_RANGE[1], -math.expm1(-m / 2.0) * (1.0 - 1e-9))
        res = minimize_scalar(lambda t: _objective(C, eps, m, t), bounds=(GAMMA_RANGE[0], g_hi),
                              method="bounded", options={"xatol": 1e-7})
        if res.fun < val:
            val, g = float(res.fun), float(res.x)
        if prev - val <= rel_tol * val:
            break
    return OptimizedParams(m, g, m / (g * eps), val)
