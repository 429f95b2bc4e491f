"""Baseline factories: von Neumann's fair bit and a known-q pass-through."""

from __future__ import annotations

from typing import NamedTuple

from .coins import CoinSource
from .errors import NonTerminationError
from .randomness import UniformSource, bernoulli_known

DEFAULT_MAX_FLIPS = 2**20


class VonNeumannResult(NamedTuple):
    bit: int
    flips: int


def von_neumann(coin: CoinSource, max_flips: int | None = DEFAULT_MAX_FLIPS) -> VonNeumannResult:
    """Fair bit from a p-coin: flip pairs until they differ, report ``(0, 1)``.

    ``max_flips=None`` disables the guard; with p in {0, 1} the loop then
    never returns.
    """
    flips = 0
    while max_flips is None or flips < max_flips:
        a = coin.flip()
        b = coin.flip()
        flips += 2
        if a != b:
            return VonNeumannResult(int(a == 0), flips)
    raise NonTerminationError(f"no unequal pair within {max_flips} flips; is p in {{0, 1}}?")


def known_q_factory(src: UniformSource, q: float) -> int:
    """Bernoulli(q) for a known q; consumes no coin flips."""
    return bernoulli_known(src, q)
