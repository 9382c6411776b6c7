from __future__ import annotations

import numpy as np
from hypothesis import given, strategies as st

from invann.hashing import (
    P31,
    P61,
    UniversalHash,
    as_key_matrix,
    carter_wegman,
    fingerprint,
    mulmod61,
    pairwise31,
)

u64 = st.integers(0, (1 << 64) - 1)


@given(st.integers(0, P61 - 1), st.integers(0, P61 - 1))
def test_mulmod61_against_big_ints(a, x):
    got = mulmod61(np.array([a], np.uint64), np.array([x], np.uint64))
    assert int(got[0]) == a * x % P61


@given(u64, st.integers(1, P61 - 1), st.integers(0, P61 - 1), st.integers(1, 1 << 40))
def test_carter_wegman_against_big_ints(fp, a, b, m):
    got = carter_wegman(np.array([fp], np.uint64), np.array([a], np.uint64), np.array([b], np.uint64), m)
    assert int(got[0]) == ((a * (fp % P61) + b) % P61) % m


@given(st.integers(0, P31 - 1), u64, st.integers(1, P31))
def test_pairwise31_in_range(x, key, m):
    y = int(pairwise31(np.array([x]), np.array([key], np.uint64), m)[0])
    assert 0 <= y < m


def test_pairwise31_is_affine_mod_p31():
    # two points pin down (a, b); a third must fit the same line
    key = np.full(3, 12345, np.uint64)
    xs = np.array([0, 1, 77])
    y = pairwise31(xs, key, P31).tolist()
    b, a = y[0], (y[1] - y[0]) % P31
    assert y[2] == (a * 77 + b) % P31


def test_fingerprint_equal_keys_equal_prints():
    keys = np.array([[1, 2, 3], [1, 2, 3], [1, 2, 4]], np.uint8)
    fp = fingerprint(keys)
    assert fp[0] == fp[1] != fp[2]
    assert fingerprint(keys, salt=1)[0] != fp[0]
    # width participates: a zero byte appended changes the print
    assert fingerprint(np.array([[1, 2, 3, 0]], np.uint8))[0] != fp[0]


def test_fingerprint_spreads_small_keys():
    keys = np.arange(1 << 16, dtype="<u4").view(np.uint8).reshape(-1, 4)
    assert np.unique(fingerprint(keys)).size == 1 << 16


def test_key_matrix_accepts_bytes():
    assert as_key_matrix(b"\x01\x02").tolist() == [[1, 2]]


def test_universal_hash_collision_rate():
    # pairwise collision probability of the family is about 1/m
    m, pairs = 64, 4000
    rng = np.random.default_rng(0)
    keys = rng.integers(0, 256, size=(2, 8), dtype=np.uint8)
    hits = sum(
        int(np.equal(*UniversalHash.sample(seed, m, 1)(keys)))
        for seed in range(pairs)
    )
    assert abs(hits / pairs - 1 / m) < 4 * np.sqrt(1 / m / pairs)
