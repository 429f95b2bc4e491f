"""Estimating p from a Cp-factory: draw Bernoulli(Cp) bits until four ones.

``A`` (the number of factory calls) is negative binomial with parameters 4
and Cp, so ``4 / (C A)`` estimates p. When ``1 - Cp <= eps`` this lands in
``[p(1 - sqrt(eps)), p(1 + sqrt(eps))]`` with probability at least 3/4.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .bounds import theorem4_bound
from .coins import CoinSource
from .errors import DomainError, NonTerminationError
from .linear import FactoryParams, _run_block, block_generators, sample
from .randomness import UniformSource

SUCCESSES = 4
DEFAULT_MAX_DRAWS = 10**7


class EstimateRecord(NamedTuple):
    p_hat: float
    A: int
    total_flips: int


def estimate_p(params: FactoryParams, coin: CoinSource, aux: UniformSource,
               max_draws: int = DEFAULT_MAX_DRAWS) -> EstimateRecord:
    A = S = flips = 0
    while S < SUCCESSES:
        if A >= max_draws:
            raise NonTerminationError(
                f"{A} factory calls without {SUCCESSES} successes; is p = 0?")
        rec = sample(params, coin, aux)
        A += 1
        S += rec.output
        flips += rec.flips
    return EstimateRecord(SUCCESSES / (params.C * A), A, flips)


class EstimateBatch(NamedTuple):
    p_hat: np.ndarray
    A: np.ndarray
    total_flips: np.ndarray


def estimate_many(params: FactoryParams, p: float, n: int, seed: int, stream: int = 0,
                  max_draws: int = DEFAULT_MAX_DRAWS) -> EstimateBatch:
    """``n`` back-to-back estimator runs on a simulated Bernoulli(p) coin.

    Uses one coin stream and one auxiliary stream (block 0 of
    :func:`~bernfactory.linear.block_generators`), so the result equals
    calling :func:`estimate_p` ``n`` times on those streams.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    coin_gen, aux_gen = block_generators(seed, stream, 0)
    Cp = params.C * p
    chunk = int(min(max(1024, 1.1 * SUCCESSES * n / Cp if Cp > 0 else 1024), 1 << 20))
    outs, flips = [], []
    ones = 0
    since_last = 0
    while ones < SUCCESSES * n:
        o, f, _, _, failed = _run_block(params.C, params.eps, params.gamma, params.k, float(p),
                                        chunk, coin_gen, aux_gen, False)
        if failed >= 0:
            raise NonTerminationError("stage slack underflowed")
        outs.append(o)
        flips.append(f)
        ones += int(o.sum())
        pos = np.flatnonzero(o)
        since_last = chunk - 1 - pos[-1] if pos.size else since_last + chunk
        if since_last >= max_draws:
            raise NonTerminationError(
                f"{since_last} factory calls without a success; is p = 0?")
    out = np.concatenate(outs)
    fl = np.concatenate(flips)
    ends = np.flatnonzero(out)[SUCCESSES - 1::SUCCESSES][:n] + 1
    starts = np.concatenate(([0], ends[:-1]))
    A = ends - starts
    csum = np.concatenate(([0], np.cumsum(fl)))
    total = csum[ends] - csum[starts]
    return EstimateBatch(SUCCESSES / (params.C * A), A, total)


def coverage(p_hat: np.ndarray, p: float, eps: float) -> float:
    """Fraction of estimates within relative error sqrt(eps) of p."""
    half = np.sqrt(eps)
    return float(np.mean((p_hat >= p * (1 - half)) & (p_hat <= p * (1 + half))))


def expected_flip_cost(params: FactoryParams, p: float, per_call: float | None = None) -> float:
    """Expected p-flips for one estimate: ``4 / (Cp)`` factory calls times the
    cost per call.

    ``per_call`` defaults to the bound on E[flips] at this p, which turns
    the result into an upper bound.
    """
    Cp = params.C * p
    if not 0.0 < Cp < 1.0:
        raise DomainError(f"need 0 < C p < 1, got C p = {Cp}")
    if per_call is None:
        per_call = theorem4_bound(params.C, params.eps, params.gamma, params.k, p)
    return SUCCESSES / Cp * per_call
