from __future__ import annotations

import math

import numpy as np
import pytest

from invann.all_inversion import (
    InverterConfig,
    InvertStats,
    RandomKeys,
    TableKeys,
    brute_preimage,
    build_all_inverter,
    invert_all,
    inverter_bytes,
    kappa_levels,
    load_inverter,
    parse_inverter,
    projected_nbytes,
    save_inverter,
)
from invann.core import FormatError


def preimage_by_dict(f, N, target):
    """Independent oracle: bucket the whole table once."""
    buckets = {}
    for j, key in enumerate(f.keys(np.arange(N))):
        buckets.setdefault(key.tobytes(), []).append(j)
    return buckets.get(bytes(target), [])


def skewed_table(N, seed):
    """Keys with preimages of sizes 0, 1, a few, and one huge bucket."""
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, N // 3, size=N)
    codes[: N // 4] = 7
    return TableKeys(codes.astype("<u4").view(np.uint8).reshape(N, 4))


def test_kappa_levels():
    assert kappa_levels(1024) == [2, 4, 8, 16]
    assert kappa_levels(4096) == [2, 4, 8, 16, 32, 64]
    assert kappa_levels(4) == [2]
    assert kappa_levels(1 << 14, InverterConfig(max_kappa=4)) == [2, 4]


@pytest.mark.parametrize("N,R,sigma", [(256, 3, 2), (512, 2, 4), (300, 2, 3)])
def test_matches_brute_force_on_random_functions(N, R, sigma):
    fns = [RandomKeys(N, N // 3, seed=10 * N + i) for i in range(R)]
    inv = build_all_inverter(fns, N, sigma, seed=N)
    rng = np.random.default_rng(N)
    for _ in range(120):
        i = int(rng.integers(R))
        target = fns[i].keys(rng.integers(N, size=1))[0]
        got = invert_all(inv, i, target)
        assert got.tolist() == preimage_by_dict(fns[i], N, target)
    assert inv.stored_entries <= inv.space_bound()
    assert inv.build_evals <= inv.build_bound()


def test_skewed_preimages_and_fallback():
    N = 512
    f = skewed_table(N, 1)
    inv = build_all_inverter([f], N, 2, seed=4)
    for code in [7, 0, 5, 11, N]:
        target = np.array([code], "<u4").view(np.uint8)
        stats = InvertStats()
        got = invert_all(inv, 0, target, stats=stats)
        truth = preimage_by_dict(f, N, target)
        assert got.tolist() == truth
        assert stats.f_evals <= inv.work_bound(len(truth))
        if len(truth) >= inv.brute_force_threshold:
            assert stats.fallback


def test_constant_function_returns_everything():
    N = 64
    const = TableKeys(np.zeros((N, 3), np.uint8))
    inv = build_all_inverter([const], N, 2, seed=0)
    stats = InvertStats()
    assert invert_all(inv, 0, np.zeros(3, np.uint8), stats=stats).tolist() == list(range(N))
    assert stats.fallback
    assert invert_all(inv, 0, np.ones(3, np.uint8)).size == 0


@pytest.mark.parametrize("N", [2, 3, 4, 5, 8])
def test_tiny_domains_are_exact(N):
    fns = [RandomKeys(N, 2, seed=i) for i in range(3)]
    inv = build_all_inverter(fns, N, 1, seed=1)
    for i, f in enumerate(fns):
        for key in np.unique(f.keys(np.arange(N)), axis=0):
            assert invert_all(inv, i, key).tolist() == preimage_by_dict(f, N, key)
    assert inv.stored_entries <= inv.space_bound()


def test_wrong_width_target_has_empty_preimage():
    fns = [RandomKeys(64, 8, seed=0)]
    inv = build_all_inverter(fns, 64, 2, seed=0)
    assert invert_all(inv, 0, b"\x01\x02").size == 0


def test_verify_reports_completeness():
    fns = [RandomKeys(256, 64, seed=2)]
    inv = build_all_inverter(fns, 256, 2, seed=0)
    stats = InvertStats()
    target = fns[0].keys(np.array([3]))[0]
    out = invert_all(inv, 0, target, verify=True, stats=stats)
    assert out.tolist() == brute_preimage(fns[0], 256, target).tolist()
    assert stats.incomplete is False


def test_subsets_respect_the_size_window_and_density():
    N = 2048
    inv = build_all_inverter([RandomKeys(N, N, seed=0)], N, 4, seed=5)
    for lv in inv.levels:
        sizes = lv.set_sizes
        assert sizes.min() >= max(1, math.ceil(N / (2 * lv.kappa)))
        assert sizes.max() <= 2 * N / lv.kappa
        assert lv.n_sets == math.ceil(8 * lv.kappa * math.ceil(math.log(N)))
        # every index lands in about n_sets / kappa subsets
        cover = np.bincount(lv.samples.astype(np.int64), minlength=N)
        expected = lv.n_sets / lv.kappa
        assert abs(cover.mean() - expected) < 0.05 * expected
        for s in range(lv.n_sets):
            sub = lv.subset(s)
            assert np.all(np.diff(sub.astype(np.int64)) > 0)


def test_singleton_recovery_rate():
    # a preimage of size one resolves at the first level, almost always by the chains
    N = 1024
    fns = [RandomKeys(N, 1 << 40, seed=s) for s in range(2)]
    inv = build_all_inverter(fns, N, 4, seed=3)
    missed = 0
    for i in range(2):
        for j in range(0, N, 4):
            stats = InvertStats()
            got = invert_all(inv, i, fns[i].keys(np.array([j]))[0], stats=stats)
            missed += got.tolist() != [j]
            assert stats.levels_queried == 1 and not stats.fallback
    assert missed <= 0.01 * 2 * (N // 4)


def test_serialization_round_trip(tmp_path):
    fns = [RandomKeys(512, 200, seed=i) for i in range(2)]
    inv = build_all_inverter(fns, 512, 2, seed=21)
    raw = inverter_bytes(inv)
    assert raw[:4] == b"AFIV"
    path = tmp_path / "inv.afiv"
    save_inverter(inv, path)
    again = load_inverter(path, fns)
    assert inverter_bytes(again) == raw
    rng = np.random.default_rng(0)
    for _ in range(40):
        i = int(rng.integers(2))
        t = fns[i].keys(rng.integers(512, size=1))[0]
        assert np.array_equal(invert_all(again, i, t), invert_all(inv, i, t))
    with pytest.raises(ValueError):
        invert_all(parse_inverter(raw), 0, b"\0" * 8)


def test_corrupt_inverter_files():
    fns = [RandomKeys(128, 50, seed=0)]
    raw = inverter_bytes(build_all_inverter(fns, 128, 2, seed=0))
    with pytest.raises(FormatError):
        parse_inverter(b"XXXX" + raw[4:])
    with pytest.raises(FormatError):
        parse_inverter(raw[:-1])
    with pytest.raises(FormatError):
        parse_inverter(raw + b"\0")
    with pytest.raises(FormatError, match="version"):
        parse_inverter(raw[:4] + b"\2\0" + raw[6:])
    with pytest.raises(FormatError, match="reserved"):
        parse_inverter(raw[:6] + b"\1\0" + raw[8:])
    with pytest.raises(FormatError, match="unknown section"):
        parse_inverter(raw + b"JUNK" + bytes(8))


def test_build_is_deterministic_and_batch_independent():
    fns = [RandomKeys(512, 300, seed=i) for i in range(3)]
    a = inverter_bytes(build_all_inverter(fns, 512, 2, seed=7))
    b = inverter_bytes(build_all_inverter(fns, 512, 2, seed=7, config=InverterConfig(batch_lanes=1)))
    c = inverter_bytes(build_all_inverter(fns, 512, 2, seed=8))
    assert a == b and a != c


def test_function_prefix_is_independent_of_later_functions():
    fns = [RandomKeys(256, 100, seed=i) for i in range(3)]
    full = build_all_inverter(fns, 256, 2, seed=1)
    head = build_all_inverter(fns[:1], 256, 2, seed=1)
    for lf, lh in zip(full.levels, head.levels):
        assert np.array_equal(lf.samples, lh.samples)
        assert np.array_equal(lf.ends[0], lh.ends[0])


def test_space_shrinks_as_sigma_grows():
    fns = [RandomKeys(1024, 1024, seed=i) for i in range(4)]
    sizes = [build_all_inverter(fns, 1024, s, seed=0).nbytes_by_part()["chains"] for s in (2, 4, 8)]
    assert sizes[0] > sizes[1] > sizes[2]


def test_invalid_arguments():
    fns = [RandomKeys(64, 10)]
    with pytest.raises(ValueError):
        build_all_inverter(fns, 1, 1, seed=0)
    with pytest.raises(ValueError):
        build_all_inverter([], 64, 1, seed=0)
    with pytest.raises(ValueError):
        build_all_inverter(fns, 64, 100, seed=0)
    with pytest.raises(ValueError):
        build_all_inverter([RandomKeys(32, 10)], 64, 2, seed=0)
    inv = build_all_inverter(fns, 64, 2, seed=0)
    with pytest.raises(IndexError):
        invert_all(inv, 1, b"\0" * 8)
    with pytest.raises(ValueError):
        inv.attach(fns * 2)


@pytest.mark.parametrize("sigma", [1, 2, 5])
def test_projected_size_is_exact(sigma):
    fns = [RandomKeys(700, 300, seed=i) for i in range(3)]
    inv = build_all_inverter(fns, 700, sigma, seed=4)
    assert projected_nbytes(700, 3, sigma, 4) == inv.nbytes
