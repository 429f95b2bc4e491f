"""Seeded auxiliary randomness: uniforms, known-probability bits, geometric draws.

Every stream is identified by a ``(seed, stream_id)`` pair. Streams are built
from numpy's ``SeedSequence`` spawn mechanism on top of PCG64, so distinct
stream ids give independent sequences and the same pair always replays the
same variates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_BLOCK = 4096
_U64 = 2**64


@dataclass(frozen=True)
class RandomSeed:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= v < _U64):
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {v}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def make_generator(seed: int, *stream: int) -> np.random.Generator:
    """numpy Generator for the stream addressed by ``(seed, *stream)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(stream))
    return np.random.Generator(np.random.PCG64(ss))


class UniformSource:
    """Single-owner stream of uniform variates on [0, 1).

    Variates are pulled from the generator in fixed-size blocks; the block
    size does not change the sequence, only how often numpy is called.
    """

    def __init__(self, seed: RandomSeed | int = 0, stream_id: int | None = None):
        if not isinstance(seed, RandomSeed):
            seed = RandomSeed(seed, 0 if stream_id is None else stream_id)
        elif stream_id is not None:
            seed = RandomSeed(seed.seed, stream_id)
        self.seed = seed
        self._gen = seed.generator()
        self._buf: list[float] = []
        self._pos = 0
        self.draws_made = 0

    @classmethod
    def from_generator(cls, gen: np.random.Generator) -> "UniformSource":
        src = cls.__new__(cls)
        src.seed = None
        src._gen = gen
        src._buf = []
        src._pos = 0
        src.draws_made = 0
        return src

    def next_uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.draws_made += 1
        return u


def next_uniform(src: UniformSource) -> float:
    return src.next_uniform()


def bernoulli_known(src: UniformSource, q: float) -> int:
    """Return 1 with probability ``q``, consuming exactly one uniform."""
    if not (0.0 <= q <= 1.0):
        raise DomainError(f"q must lie in [0, 1], got {q}")
    return 1 if src.next_uniform() < q else 0


def geometric(src: UniformSource, a: float) -> int:
    """Geometric variate on {1, 2, ...} with success probability ``a``.

    Inversion: ``G = 1 + floor(ln(1 - U) / ln(1 - a))``.
    """
    if not (0.0 < a <= 1.0):
        raise DomainError(f"a must lie in (0, 1], got {a}")
    u = src.next_uniform()
    if a == 1.0:
        return 1
    log_fail = math.log1p(-a)
    while True:
        if 1.0 - u > 0.0:
            return 1 + int(math.floor(math.log1p(-u) / log_fail))
        u = src.next_uniform()

