from __future__ import annotations

import math

import numpy as np
import pytest

from invann.all_inversion import RandomKeys
from invann.inversion import EvalCounter, build_inversion, chain_shape, invert_one


def random_function(M, seed):
    values = RandomKeys(M, M, seed=seed).values(np.arange(M)).astype(np.int64)
    return values, (lambda x: values[x])


def image_queries(values, count, seed):
    rng = np.random.default_rng(seed)
    return rng.choice(np.unique(values), count)


def test_chain_shape_follows_the_formulas():
    t, chains, tables = chain_shape(4096, 8)
    assert (t, chains) == (8, 64)
    assert tables == max(12, math.ceil(4096 / (chains * t)))
    assert chain_shape(1024, 1) == (1, 1024, 10)
    assert chain_shape(16, 1000)[0] == 16


def test_sigma_one_inverts_every_image_point():
    values, f = random_function(512, 1)
    table = build_inversion(f, 512, 1, seed=3)
    for y in np.unique(values):
        x = invert_one(table, int(y))
        assert x is not None and values[x] == y


@pytest.mark.parametrize("sigma", [2, 4, 8])
def test_success_rate_and_soundness(sigma):
    M = 4096
    values, f = random_function(M, 17 + sigma)
    table = build_inversion(f, M, sigma, seed=sigma)
    hits, worst = 0, 0
    for y in image_queries(values, 1000, sigma):
        counter = EvalCounter()
        x = invert_one(table, int(y), counter)
        worst = max(worst, counter.count)
        if x is not None:
            assert values[x] == y
            hits += 1
    assert hits / 1000 >= 0.5
    assert worst <= table.work_bound()
    assert table.stored_entries <= table.space_bound()


def test_values_outside_the_image_are_never_inverted():
    M = 1024
    values, f = random_function(M, 2)
    table = build_inversion(f, M, 4, seed=0)
    missing = np.setdiff1d(np.arange(M), values)
    assert missing.size > 100
    assert all(invert_one(table, int(y)) is None for y in missing[:200])
    assert invert_one(table, -1) is None and invert_one(table, M) is None


def test_constant_and_identity_functions():
    M = 256
    const = build_inversion(lambda x: np.zeros_like(x), M, 4, seed=1)
    x = invert_one(const, 0)
    assert x is not None and 0 <= x < M
    assert invert_one(const, 5) is None
    ident = build_inversion(lambda x: x, M, 2, seed=1)
    found = [invert_one(ident, y) for y in range(M)]
    assert sum(v == y for y, v in enumerate(found)) >= M // 2
    assert all(v is None or v == y for y, v in enumerate(found))


def test_build_is_deterministic():
    values, f = random_function(1024, 5)
    a = build_inversion(f, 1024, 4, seed=8)
    b = build_inversion(f, 1024, 4, seed=8)
    assert np.array_equal(a.starts, b.starts) and np.array_equal(a.ends, b.ends)
    c = build_inversion(f, 1024, 4, seed=9)
    assert not np.array_equal(a.ends, c.ends)


def test_build_counts_evaluations():
    values, f = random_function(1024, 5)
    counter = EvalCounter()
    table = build_inversion(f, 1024, 4, seed=0, counter=counter)
    assert counter.count == table.layout.total_chains * table.t


def test_endpoint_storage_uses_small_dtype():
    values, f = random_function(1024, 5)
    assert build_inversion(f, 1024, 4, seed=0).ends.dtype == np.uint16


@pytest.mark.parametrize("M,sigma", [(1, 1), (16, 0.5), (16, 17)])
def test_invalid_parameters(M, sigma):
    with pytest.raises(ValueError):
        build_inversion(lambda x: x, M, sigma, seed=0)
