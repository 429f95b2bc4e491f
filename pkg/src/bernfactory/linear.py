"""Exact Bernoulli factory for f(p) = C p under the promise C p <= 1 - eps.

The sampler tracks an exponent ``i`` such that the coin still to be flipped
is a ``(C_j p)^i``-coin. One p-flip plus one geometric draw moves ``i`` by
``-1`` (heads) or ``+G - 1`` (tails); ``i = 0`` means heads. When ``i``
climbs past the stage threshold ``k_j``, a known ``(1 + gamma eps_j)^(-i)``
coin either ends the run with 0 or promotes the target to a
``(C_{j+1} p)^i``-coin with ``C_{j+1} = C_j (1 + gamma eps_j)``, trading a
fraction ``gamma`` of the slack ``eps_j`` for a higher threshold.

Two implementations are provided:

* :func:`sample` runs one replicate against any :class:`CoinSource` and is
  the reference path;
* :func:`simulate` runs many replicates of a simulated p-coin in compiled
  code. Given the same generators it reproduces :func:`sample` draw for
  draw.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numba import njit

from .coins import CoinSource
from .errors import DomainError, InfeasibleBoundWarning, InvariantError
from .randomness import RandomSeed, UniformSource, bernoulli_known, geometric, make_generator
from .stats import FlipStats

EPS_CLAMP = 0.644
DEFAULT_GAMMA = 0.5
DEFAULT_M = 2.3
_EPS_FLOOR = 1e-300
BATCH_BLOCK = 16384


@dataclass(frozen=True)
class FactoryParams:
    C: float
    eps: float
    gamma: float
    m: float
    k: float
    eps_requested: float = field(default=math.nan, compare=False)

    @property
    def r(self) -> float:
        """Geometric ratio of the stage-cost series; the bound is finite iff r < 1."""
        return math.exp(-self.k * self.eps * self.gamma) / (1.0 - self.gamma) ** 2

    @property
    def feasible(self) -> bool:
        return self.r < 1.0

    @property
    def p_max(self) -> float:
        """Largest p allowed by the promise C p <= 1 - eps."""
        return (1.0 - self.eps) / self.C

    def as_dict(self) -> dict:
        return {"C": self.C, "eps": self.eps, "gamma": self.gamma, "m": self.m, "k": self.k}


def make_params(C: float, eps: float, gamma: float | None = None,
                m: float | None = None) -> FactoryParams:
    """Validate inputs, clamp ``eps`` to 0.644 and set ``k = m / (gamma eps)``.

    With the defaults (gamma = 1/2, m = 2.3) this gives k = 4.6 / eps. k is
    always computed from the clamped eps. An infeasible bound (r >= 1) only
    warns: the sampler is exact for any k > 0.
    """
    gamma = DEFAULT_GAMMA if gamma is None else float(gamma)
    m = DEFAULT_M if m is None else float(m)
    C, eps = float(C), float(eps)
    if not C > 1.0 or not math.isfinite(C):
        raise DomainError(f"C must be a finite number > 1, got {C}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if not m > 0.0 or not math.isfinite(m):
        raise DomainError(f"m must be a finite number > 0, got {m}")
    e = min(eps, EPS_CLAMP)
    params = FactoryParams(C, e, gamma, m, m / (gamma * e), eps_requested=eps)
    if not params.feasible:
        warnings.warn(
            f"r = {params.r:.4g} >= 1: running-time bound is infinite for these parameters",
            InfeasibleBoundWarning, stacklevel=2)
    return params


@dataclass
class StageState:
    i: int = 1
    j: int = 1
    C: float = 2.0
    eps: float = 0.5
    k: float = 1.0

    @classmethod
    def initial(cls, params: FactoryParams) -> "StageState":
        return cls(1, 1, params.C, params.eps, params.k)

    def advance(self, gamma: float) -> None:
        self.C *= 1.0 + gamma * self.eps
        self.eps *= 1.0 - gamma
        self.k /= 1.0 - gamma
        self.j += 1
        if self.eps < _EPS_FLOOR:
            raise InvariantError(f"stage slack underflowed at stage {self.j}")


def stage_sequence(params: FactoryParams, stages: int) -> list[StageState]:
    """States (with i = 1) of the first ``stages`` stages, for inspection."""
    st = StageState.initial(params)
    out = [StageState(1, st.j, st.C, st.eps, st.k)]
    for _ in range(stages - 1):
        st.advance(params.gamma)
        out.append(StageState(1, st.j, st.C, st.eps, st.k))
    return out


def gate_probability(i: int, gamma: float, eps_j: float) -> float:
    """``(1 + gamma eps_j)^(-i)``, via log1p so large ``i`` underflows cleanly."""
    return math.exp(-i * math.log1p(gamma * eps_j))


class RunRecord(NamedTuple):
    output: int
    flips: int
    stages_entered: int
    max_i: int


def sample(params: FactoryParams, coin: CoinSource, aux: UniformSource) -> RunRecord:
    """Draw one Bernoulli(C p) bit from ``coin``.

    The caller promises ``C p <= 1 - eps`` for the coin's unknown p; it
    cannot be checked here. The coin is only ever flipped, and ``flips`` in
    the record counts exactly those calls.
    """
    gamma = params.gamma
    st = StageState.initial(params)
    flips = 0
    max_i = 1
    while True:
        # first stage of the loop: random walk on i until 0 or threshold
        a = (st.C - 1.0) / st.C
        while True:
            b = coin.flip()
            g = geometric(aux, a)
            flips += 1
            st.i += -1 + (1 - b) * g
            if st.i > max_i:
                max_i = st.i
            if st.i == 0:
                return RunRecord(1, flips, st.j, max_i)
            if st.i >= st.k:
                break
        if not bernoulli_known(aux, gate_probability(st.i, gamma, st.eps)):
            return RunRecord(0, flips, st.j, max_i)
        st.advance(gamma)


class FirstStageRecord(NamedTuple):
    exit_high: bool
    flips: int
    i_exit: int


def first_stage(params: FactoryParams, coin: CoinSource, aux: UniformSource) -> FirstStageRecord:
    """Run only the initial walk from i = 1 until i = 0 or i >= k."""
    a = (params.C - 1.0) / params.C
    i, flips = 1, 0
    while True:
        b = coin.flip()
        g = geometric(aux, a)
        flips += 1
        i += -1 + (1 - b) * g
        if i == 0:
            return FirstStageRecord(False, flips, 0)
        if i >= params.k:
            return FirstStageRecord(True, flips, i)


@dataclass(frozen=True)
class SampleSummary:
    flips: FlipStats
    ones: int

    @property
    def n(self) -> int:
        return self.flips.count

    @property
    def output_mean(self) -> float:
        return self.ones / self.n

    def merge(self, other: "SampleSummary") -> "SampleSummary":
        return SampleSummary(self.flips.merge(other.flips), self.ones + other.ones)


def sample_many(params: FactoryParams, coin_factory: Callable[[int], CoinSource],
                aux_seed: RandomSeed | int, n: int) -> SampleSummary:
    """Run ``n`` replicates; replicate ``r`` uses aux stream ``(seed, r)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    seed = aux_seed.seed if isinstance(aux_seed, RandomSeed) else int(aux_seed)
    flips, ones = [], 0
    for rep in range(n):
        rec = sample(params, coin_factory(rep), UniformSource(RandomSeed(seed, rep)))
        flips.append(rec.flips)
        ones += rec.output
    return SampleSummary(FlipStats.from_values(flips), ones)


# ---------------------------------------------------------------------------
# compiled engine for simulated coins


class BatchResult(NamedTuple):
    outputs: np.ndarray      # int8; with first_stage_only, 1 means the walk exited high
    flips: np.ndarray        # int64
    stages: np.ndarray       # int64; with first_stage_only, the exit value of i
    max_i: np.ndarray        # int64


@njit(cache=True, nogil=True)
def _run_block(C, eps, gamma, k, p, n, coin_gen, aux_gen, first_stage_only):
    outputs = np.zeros(n, dtype=np.int8)
    flips = np.zeros(n, dtype=np.int64)
    stages = np.ones(n, dtype=np.int64)
    max_is = np.ones(n, dtype=np.int64)
    for rep in range(n):
        Cj, ej, kj = C, eps, k
        i, j, nflip, max_i = 1, 1, 0, 1
        while True:
            a = (Cj - 1.0) / Cj
            log_fail = math.log1p(-a)
            while True:
                b = 1 if coin_gen.random() < p else 0
                u = aux_gen.random()
                while 1.0 - u <= 0.0:
                    u = aux_gen.random()
                g = 1 + int(math.floor(math.log1p(-u) / log_fail))
                nflip += 1
                i += -1 + (1 - b) * g
                if i > max_i:
                    max_i = i
                if i == 0 or i >= kj:
                    break
            if i == 0:
                outputs[rep] = 0 if first_stage_only else 1
                break
            if first_stage_only:
                outputs[rep] = 1
                j = i
                break
            keep = math.exp(-i * math.log1p(gamma * ej))
            if not aux_gen.random() < keep:
                break
            Cj *= 1.0 + gamma * ej
            ej *= 1.0 - gamma
            kj /= 1.0 - gamma
            j += 1
            if ej < 1e-300:
                return outputs, flips, stages, max_is, rep
        flips[rep] = nflip
        stages[rep] = j
        max_is[rep] = max_i
    return outputs, flips, stages, max_is, -1


def block_generators(seed: int, stream: int, block: int):
    """(coin, aux) generators used by block ``block`` of :func:`simulate`."""
    return make_generator(seed, stream, block, 1), make_generator(seed, stream, block, 0)


def simulate(params: FactoryParams, p: float, n: int, seed: int, stream: int = 0,
             threads: int | None = None, first_stage_only: bool = False) -> BatchResult:
    """Run ``n`` replicates against a simulated Bernoulli(p) coin.

    Replicates are split into fixed blocks of :data:`BATCH_BLOCK`. Within a
    block they run back to back on one coin stream and one auxiliary stream
    (see :func:`block_generators`), consuming draws in exactly the order
    :func:`sample` (or :func:`first_stage`) would. Results depend only on
    ``(params, p, n, seed, stream)``, never on ``threads``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    sizes = [min(BATCH_BLOCK, n - s) for s in range(0, n, BATCH_BLOCK)]

    def run(b: int) -> BatchResult:
        coin_gen, aux_gen = block_generators(seed, stream, b)
        *cols, failed = _run_block(params.C, params.eps, params.gamma, params.k, float(p),
                                   sizes[b], coin_gen, aux_gen, first_stage_only)
        if failed >= 0:
            raise InvariantError(f"stage slack underflowed in replicate {failed} of block {b}")
        return BatchResult(*cols)

    if threads is not None and threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    if len(parts) == 1:
        return parts[0]
    return BatchResult(*(np.concatenate(col) for col in zip(*parts)))


def summarize(res: BatchResult) -> SampleSummary:
    return SampleSummary(FlipStats.from_values(res.flips), int(res.outputs.sum()))
