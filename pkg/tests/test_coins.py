import io
import math

import pytest

from bernfactory.coins import CoinSource, SimulatedCoin, StreamCoin, flip, parse_coin_spec
from bernfactory.errors import DomainError, InputExhaustedError, StreamFormatError
from bernfactory.randomness import RandomSeed, UniformSource


@pytest.mark.parametrize("p,expected", [(0.0, 0), (1.0, 1)])
def test_degenerate_simulated_coin(p, expected):
    coin = SimulatedCoin(p, UniformSource(RandomSeed(1, 0)))
    assert all(flip(coin) == expected for _ in range(1000))
    assert coin.flips_used() == 1000


def test_simulated_coin_mean():
    n = 100_000
    coin = SimulatedCoin(0.4, UniformSource(RandomSeed(2, 0)))
    mean = sum(coin.flip() for _ in range(n)) / n
    assert abs(mean - 0.4) <= 4 * math.sqrt(0.4 * 0.6 / n)


def test_simulated_coin_hides_p():
    coin = SimulatedCoin(0.25)
    assert not any(name in ("p", "bias") for name in dir(coin))
    assert "0.25" not in repr(coin)


def test_simulated_coin_domain():
    with pytest.raises(DomainError):
        SimulatedCoin(1.2)


def test_protocol():
    assert isinstance(SimulatedCoin(0.5), CoinSource)
    assert isinstance(StreamCoin(b"01"), CoinSource)


def test_stream_coin_tokens_and_whitespace():
    coin = StreamCoin(b" 0\t1\r\n1 0 ")
    assert [coin.flip() for _ in range(4)] == [0, 1, 1, 0]
    assert coin.flips_used() == 4
    with pytest.raises(InputExhaustedError) as exc:
        coin.flip()
    assert exc.value.flips_used == 4


def test_stream_coin_small_chunks():
    coin = StreamCoin(io.BytesIO(b"0 1 1 0 1"), chunk_size=1)
    assert [coin.flip() for _ in range(5)] == [0, 1, 1, 0, 1]


def test_stream_coin_rejects_bad_byte():
    coin = StreamCoin(b"01x1")
    coin.flip()
    coin.flip()
    with pytest.raises(StreamFormatError):
        coin.flip()


def test_stream_coin_from_file(tmp_path):
    path = tmp_path / "bits.txt"
    path.write_text("0110\n")
    coin = StreamCoin.open(str(path))
    assert [coin.flip() for _ in range(4)] == [0, 1, 1, 0]


@pytest.mark.parametrize("spec,expected", [
    ("sim:p=0.4", ("sim", 0.4)),
    ("sim:p=0", ("sim", 0.0)),
    ("stream:-", ("stream", "-")),
    ("stream:/tmp/x", ("stream", "/tmp/x")),
])
def test_parse_coin_spec(spec, expected):
    assert parse_coin_spec(spec) == expected


@pytest.mark.parametrize("spec", ["sim", "sim:q=0.1", "sim:p=abc", "sim:p=2", "stream:", "foo:1"])
def test_parse_coin_spec_errors(spec):
    with pytest.raises(DomainError):
        parse_coin_spec(spec)
