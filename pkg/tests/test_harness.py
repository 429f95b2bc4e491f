import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernfactory.errors import DomainError
from bernfactory.harness import (
    CSV_COLUMNS,
    REFERENCE_TABLE,
    bench_figure1,
    instrument_stage1,
    reports_to_csv,
    reports_to_json,
    verify_mean,
)
from bernfactory.linear import BatchResult, block_generators, make_params
from bernfactory.randomness import UniformSource, bernoulli_known, geometric
from bernfactory.stats import FlipStats, binomial_halfwidth, z_test_proportion

values = st.lists(st.integers(0, 10**9), max_size=40)


@settings(max_examples=60, deadline=None)
@given(a=values, b=values, c=values)
def test_flipstats_merge_associative(a, b, c):
    A, B, Cs = (FlipStats.from_values(x) for x in (a, b, c))
    assert (A + B) + Cs == A + (B + Cs) == FlipStats.from_values(a + b + c)


@settings(max_examples=40, deadline=None)
@given(xs=st.lists(st.integers(1, 10**6), min_size=2, max_size=200))
def test_flipstats_moments(xs):
    fs = FlipStats.from_values(xs)
    assert fs.mean == pytest.approx(np.mean(xs))
    assert fs.sd == pytest.approx(np.std(xs, ddof=1), rel=1e-9, abs=1e-9)


def test_flipstats_edge_cases():
    assert FlipStats.from_values([7]).sd == 0.0
    assert math.isnan(FlipStats().mean)
    big = FlipStats.from_values(np.array([3 * 10**9] * 4, dtype=np.int64))
    assert big.sum_sq == 4 * 9 * 10**18


def test_z_test_helpers():
    assert binomial_halfwidth(0.5, 10**4) == pytest.approx(3.891 * 0.005)
    assert z_test_proportion(5000, 10**4, 0.5)
    assert not z_test_proportion(5300, 10**4, 0.5)
    assert z_test_proportion(0, 100, 0.0)
    assert not z_test_proportion(1, 100, 0.0)


def mutant_sampler(params, p, n, seed, stream=0, threads=None):
    """Linear factory with the walk's decrement removed: i <- i + (1 - B) G."""
    coin_gen, aux_gen = block_generators(seed, stream, 0)
    coin, aux = UniformSource.from_generator(coin_gen), UniformSource.from_generator(aux_gen)
    out = np.zeros(n, np.int8)
    flips = np.zeros(n, np.int64)
    for r in range(n):
        C, eps, k, i, t = params.C, params.eps, params.k, 1, 0
        while True:
            b = bernoulli_known(coin, p)
            t += 1
            g = geometric(aux, (C - 1) / C)
            i = i + (1 - b) * g
            if i == 0:
                out[r] = 1
                break
            if i >= k:
                if not bernoulli_known(aux, math.exp(-i * math.log1p(params.gamma * eps))):
                    break
                C *= 1 + params.gamma * eps
                eps *= 1 - params.gamma
                k /= 1 - params.gamma
        flips[r] = t
    return BatchResult(out, flips, np.ones(n, np.int64), np.ones(n, np.int64))


def test_verify_passes_correct_engine():
    rep = verify_mean(make_params(2, 0.2), 0.4, 100_000, seed=0)
    assert rep.passed
    assert abs(rep.output_mean - 0.8) <= rep.halfwidth


def test_verify_catches_mutant():
    rep = verify_mean(make_params(2, 0.2), 0.2, 20_000, seed=0, sampler=mutant_sampler)
    assert not rep.passed
    assert rep.output_mean < 0.4


def test_verify_trivial_p_zero():
    rep = verify_mean(make_params(5, 0.05), "sim:p=0", 1000, seed=1)
    assert rep.passed and rep.ones == 0


def test_verify_rejects_stream_coin():
    with pytest.raises(DomainError):
        verify_mean(make_params(2, 0.2), "stream:-", 10, seed=0)


def test_stage1_at_p_zero():
    rep = instrument_stage1(make_params(2, 0.2), 0.0, 2000, seed=0)
    assert rep.exit_high_rate == 1.0
    assert rep.exit_high_bound == 1.0
    assert rep.pass_exit and rep.pass_tau
    assert rep.tau_mean <= rep.tau_bound + 4 * rep.tau_se


def test_stage1_needs_cp_below_one():
    with pytest.raises(DomainError):
        instrument_stage1(make_params(2, 0.2), 0.5, 10, seed=0)


@pytest.fixture(scope="module")
def small_bench():
    return bench_figure1(n=500, seed=3)


def test_bench_rows(small_bench):
    assert [r.C for r in small_bench] == [row[0] for row in REFERENCE_TABLE]
    for r, ref in zip(small_bench, REFERENCE_TABLE):
        assert r.p == pytest.approx(0.8 / r.C)
        assert (r.m, r.gamma) == ref[1:3]
        assert r.empirical.count == 500
        assert r.empirical.min >= 1
        assert r.simple_bound == pytest.approx(9.5 * r.C / 0.2)
        assert r.theory_sup_bound == pytest.approx(ref[3], rel=0.02)
        assert (r.tb_mean, r.tb_sd) == ref[6:8]


def test_bench_serialisation(small_bench):
    csv_text = reports_to_csv(small_bench)
    lines = csv_text.splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 5
    data = json.loads(reports_to_json(small_bench))
    assert len(data) == 4
    assert set(CSV_COLUMNS) <= set(data[0])
    assert data[0]["empirical"]["count"] == 500


def test_bench_deterministic(small_bench):
    again = bench_figure1(n=500, seed=3, threads=2)
    assert reports_to_csv(again) == reports_to_csv(small_bench)
    assert reports_to_json(again) == reports_to_json(small_bench)
    other = bench_figure1(n=500, seed=4)
    assert reports_to_csv(other) != reports_to_csv(small_bench)


def test_bench_p_frac():
    reps = bench_figure1(n=200, seed=0, p_frac=0.0)
    assert all(r.p == 0.0 and r.output_mean == 0.0 for r in reps)
    with pytest.raises(DomainError):
        bench_figure1(n=10, p_frac=1.5)
