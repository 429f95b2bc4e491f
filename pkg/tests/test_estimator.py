import math

import numpy as np
import pytest

from bernfactory.bounds import theorem4_bound
from bernfactory.coins import SimulatedCoin, StreamCoin
from bernfactory.errors import DomainError, NonTerminationError
from bernfactory.estimator import (
    coverage,
    estimate_many,
    estimate_p,
    expected_flip_cost,
)
from bernfactory.harness import instrument_stage1
from bernfactory.linear import block_generators, make_params, simulate
from bernfactory.randomness import RandomSeed, UniformSource


def test_all_heads_gives_minimal_a():
    # a heads-first walk returns 1 after a single flip
    prm = make_params(2, 0.2)
    rec = estimate_p(prm, StreamCoin("1111"), UniformSource(0))
    assert rec.A == 4
    assert rec.total_flips == 4
    assert rec.p_hat == pytest.approx(0.5)


def test_batch_equals_sequential():
    prm = make_params(2, 0.2)
    batch = estimate_many(prm, 0.4, 200, seed=13, stream=2)
    coin_gen, aux_gen = block_generators(13, 2, 0)
    coin = SimulatedCoin(0.4, UniformSource.from_generator(coin_gen))
    aux = UniformSource.from_generator(aux_gen)
    for i in range(200):
        rec = estimate_p(prm, coin, aux)
        assert (batch.p_hat[i], batch.A[i], batch.total_flips[i]) == tuple(rec)


def test_estimator_statistics():
    prm = make_params(2, 0.2)
    n = 10_000
    b = estimate_many(prm, 0.4, n, seed=1)
    assert b.A.min() >= 4
    assert abs(b.A.mean() - 5.0) <= 0.1
    assert coverage(b.p_hat, 0.4, 0.2) >= 0.75
    # negative binomial variance 4 (1 - q) / q^2 with q = 0.8
    assert b.A.var(ddof=1) == pytest.approx(4 * 0.2 / 0.64, rel=0.2)


def test_total_flips_is_sum_of_runs():
    prm = make_params(2, 0.2)
    b = estimate_many(prm, 0.4, 50, seed=3)
    res = simulate(prm, 0.4, int(b.A.sum()), seed=3)
    assert int(b.total_flips.sum()) == int(res.flips.sum())


def test_zero_p_hits_guard():
    prm = make_params(2, 0.2)
    with pytest.raises(NonTerminationError):
        estimate_p(prm, SimulatedCoin(0.0, 1), UniformSource(2), max_draws=50)
    with pytest.raises(NonTerminationError):
        estimate_many(prm, 0.0, 1, seed=0, max_draws=5000)


def test_estimate_many_domain():
    with pytest.raises(DomainError):
        estimate_many(make_params(2, 0.2), 0.4, 0, seed=0)


def test_coverage_helper():
    assert coverage(np.array([0.4, 0.4 * (1 + math.sqrt(0.2)) + 1e-9, 0.2]), 0.4, 0.2) == pytest.approx(1 / 3)


def test_expected_cost_at_worst_p():
    prm = make_params(2, 0.2)
    per = theorem4_bound(prm.C, prm.eps, prm.gamma, prm.k, prm.p_max)
    assert expected_flip_cost(prm, prm.p_max) == pytest.approx(4 / 0.8 * per, rel=1e-12)


def test_expected_cost_against_instrumented():
    prm = make_params(2, 0.2)
    n = 20_000
    b = estimate_many(prm, 0.4, n, seed=7)
    res = simulate(prm, 0.4, 100_000, seed=7, stream=1)
    predicted = expected_flip_cost(prm, 0.4, per_call=float(res.flips.mean()))
    assert b.total_flips.mean() == pytest.approx(predicted, rel=0.1)
    assert b.total_flips.mean() <= expected_flip_cost(prm, 0.4)


def test_expected_cost_domain():
    prm = make_params(2, 0.2)
    with pytest.raises(DomainError):
        expected_flip_cost(prm, 0.0)
    with pytest.raises(DomainError):
        expected_flip_cost(prm, 0.5)


def test_estimator_uses_stage1_scale():
    # sanity: first-stage flips are a large share of the per-call cost at p = 0.4
    prm = make_params(2, 0.2)
    rep = instrument_stage1(prm, 0.4, 20_000, seed=2)
    res = simulate(prm, 0.4, 20_000, seed=2, stream=1)
    assert rep.tau_mean <= res.flips.mean()
