"""p-coins: opaque suppliers of iid Bernoulli(p) bits with a flip counter.

Factories only ever call ``flip()``; the bias of a :class:`SimulatedCoin`
is kept private so that nothing downstream can peek at it.
"""

from __future__ import annotations

import io
import sys
from typing import BinaryIO, Protocol, runtime_checkable

from .errors import DomainError, InputExhaustedError, StreamFormatError
from .randomness import RandomSeed, UniformSource

_WHITESPACE = frozenset(b" \t\n\r")


@runtime_checkable
class CoinSource(Protocol):
    def flip(self) -> int: ...

    def flips_used(self) -> int: ...


class SimulatedCoin:
    """Bernoulli(p) coin driven by its own uniform stream."""

    __slots__ = ("_p", "_src", "_flips")

    def __init__(self, p: float, src: UniformSource | RandomSeed | int = 0):
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"coin bias must lie in [0, 1], got {p}")
        self._p = float(p)
        self._src = src if isinstance(src, UniformSource) else UniformSource(src)
        self._flips = 0

    def flip(self) -> int:
        self._flips += 1
        return 1 if self._src.next_uniform() < self._p else 0

    def flips_used(self) -> int:
        return self._flips

    def __repr__(self):
        return f"SimulatedCoin(flips_used={self._flips})"


class StreamCoin:
    """Coin reading ASCII '0'/'1' tokens from a byte stream.

    Whitespace is skipped. Any other byte raises :class:`StreamFormatError`;
    running out of tokens raises :class:`InputExhaustedError`.
    """

    def __init__(self, stream: BinaryIO | bytes | str, chunk_size: int = 65536):
        if isinstance(stream, str):
            stream = stream.encode("ascii")
        if isinstance(stream, (bytes, bytearray)):
            stream = io.BytesIO(bytes(stream))
        self._stream = stream
        self._chunk_size = chunk_size
        self._buf = b""
        self._pos = 0
        self._flips = 0

    @classmethod
    def open(cls, path: str) -> "StreamCoin":
        if path == "-":
            return cls(sys.stdin.buffer)
        return cls(open(path, "rb"))

    def flip(self) -> int:
        while True:
            if self._pos == len(self._buf):
                self._buf = self._stream.read(self._chunk_size)
                self._pos = 0
                if not self._buf:
                    raise InputExhaustedError(self._flips)
            b = self._buf[self._pos]
            self._pos += 1
            if b == 0x30 or b == 0x31:
                self._flips += 1
                return b - 0x30
            if b not in _WHITESPACE:
                raise StreamFormatError(
                    f"unexpected byte {bytes([b])!r} after {self._flips} flips"
                )

    def flips_used(self) -> int:
        return self._flips


def flip(coin: CoinSource) -> int:
    return coin.flip()


def parse_coin_spec(spec: str) -> tuple[str, float | str]:
    """Parse ``sim:p=<real>`` or ``stream:<path|->`` into ``(kind, value)``."""
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise DomainError(f"coin selector must be 'sim:p=<real>' or 'stream:<path>', got {spec!r}")
    if kind == "sim":
        key, eq, val = rest.partition("=")
        if key != "p" or not eq:
            raise DomainError(f"expected 'sim:p=<real>', got {spec!r}")
        try:
            p = float(val)
        except ValueError:
            raise DomainError(f"invalid coin bias {val!r}") from None
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"coin bias must lie in [0, 1], got {p}")
        return "sim", p
    if kind == "stream":
        if not rest:
            raise DomainError("stream coin needs a path or '-'")
        return "stream", rest
    raise DomainError(f"unknown coin kind {kind!r}")
