"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Lines are collected in ``RESULTS`` and echoed in pytest's terminal summary.
Run ``python tests/test_acceptance.py`` to get the lines without pytest.
"""

from __future__ import annotations

import csv
import io
import math
import sys
import time
from contextlib import redirect_stdout

import numpy as np

from invann import analysis
from invann.all_inversion import (
    RandomKeys,
    brute_preimage,
    build_all_inverter,
    invert_all,
    inverter_bytes,
    projected_nbytes,
    InvertStats,
)
from invann.ann import (
    build_classic,
    build_inverted,
    family_for,
    memory_footprint,
    query_classic,
    query_inverted,
)
from invann.cli import TIMING_COLUMNS, main
from invann.core import PlantedSpec, dataset_bytes, generate_planted
from invann.inversion import EvalCounter, build_inversion, invert_one

RESULTS: list[str] = []

PRINTED = {
    1.05: (0.989, 0.991, 1.001),
    1.5: (0.641, 0.691, 1.011),
    1.79: (0.471, 0.527, 1.012),
    2.0: (0.383, 0.438, 1.012),
    3.0: (0.175, 0.210, 1.007),
    10.0: (0.016, 0.020, 1.001),
}


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def run_cli(*argv: str) -> tuple[int, str]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_criterion_1_reference_table():
    t0 = time.perf_counter()
    code, out = run_cli("analyze", "--table2", "--format", "csv")
    elapsed = time.perf_counter() - t0
    rows = list(csv.DictReader(io.StringIO(out)))
    worst = 0.0
    for row in rows:
        want = PRINTED[float(row["c"])]
        got = (float(row["alpha"]), float(row["alrw"]), float(row["preproc_exponent"]))
        worst = max(worst, *(abs(g - w) for g, w in zip(got, want)))
    ok = code == 0 and len(rows) == 6 and worst <= 0.001 and elapsed < 1.0
    report(1, "exponent table", ok, f"6 rows, max deviation {worst:.5f} (tol 0.001), {elapsed:.3f} s")


def test_criterion_2_comparison_claims():
    t0 = time.perf_counter()
    grid = np.round(np.arange(1.01, 100.0 + 1e-9, 0.01), 10)
    a = np.array([analysis.alpha(c) for c in grid])
    al = np.array([analysis.alrw_exponent(c) for c in grid])
    below = bool(np.all(a < al))
    big = grid > 2.6
    ratio_ok = bool(np.all(a[big] < 0.85 * al[big]))
    limit = analysis.alpha(100) / analysis.alrw_exponent(100)
    fine = np.round(np.arange(1.001, 10.0 + 1e-9, 0.001), 10)
    gap = [analysis.alrw_exponent(c) - analysis.alpha(c) for c in fine]
    argmax = float(fine[int(np.argmax(gap))])
    elapsed = time.perf_counter() - t0
    ok = below and ratio_ok and abs(limit - 0.8) <= 0.005 and abs(argmax - 1.79) <= 0.01 and elapsed < 5
    report(2, "comparison claims", ok,
           f"alpha<ALRW={below}, alpha<.85ALRW(c>2.6)={ratio_ok}, ratio@100={limit:.5f}, "
           f"argmax={argmax:.3f}, {elapsed:.2f} s")


def test_criterion_3_closed_form_consistency():
    grid = np.round(np.arange(1.01, 100.0 + 1e-9, 0.01), 10)
    _, numeric = analysis.minimize_total(grid)
    closed = np.array([analysis.alpha(c) for c in grid])
    diff = float(np.abs(numeric - closed).max())
    rho_u = max(analysis.optimal_rho_u(c) for c in grid)
    ok = diff <= 1e-10 and rho_u <= 0.013
    report(3, "closed form vs numeric minimum", ok, f"max |diff| {diff:.2e} (tol 1e-10), max rho_u* {rho_u:.5f}")


def test_criterion_4_all_function_inversion_oracle():
    queries = 500
    lines, ok = [], True
    for N in (1 << 10, 1 << 12):
        for R in (2, 4):
            for sigma in (2, 4):
                fns = [RandomKeys(N, N // 2, seed=N * 100 + R * 10 + sigma + i) for i in range(R)]
                inv = build_all_inverter(fns, N, sigma, seed=N + R + sigma)
                rng = np.random.default_rng(N + 7 * R + sigma)
                subset = equal = 0
                worst_work = 0.0
                for _ in range(queries):
                    i = int(rng.integers(R))
                    target = fns[i].keys(rng.integers(N, size=1))[0]
                    stats = InvertStats()
                    got = invert_all(inv, i, target, stats=stats)
                    truth = brute_preimage(fns[i], N, target)
                    subset += bool(np.isin(got, truth).all())
                    equal += np.array_equal(got, truth)
                    worst_work = max(worst_work, stats.f_evals / inv.work_bound(truth.size))
                space = inv.stored_entries / inv.space_bound()
                cfg_ok = subset == queries and equal >= 0.99 * queries and space <= 1
                ok &= cfg_ok
                lines.append(f"N={N} R={R} s={sigma}: sub {subset}/{queries} eq {equal}/{queries} "
                             f"space {space:.3f} work {worst_work:.3f}")
    report(4, "all-function inversion oracle", ok, "; ".join(lines))


def test_criterion_5_single_function_inversion():
    lines, ok = [], True
    for M in (1 << 10, 1 << 12):
        for sigma in (2, 4, 8):
            values = RandomKeys(M, M, seed=M + sigma).values(np.arange(M)).astype(np.int64)
            table = build_inversion(lambda x, v=values: v[x], M, sigma, seed=sigma)
            ys = np.random.default_rng(M * sigma).choice(np.unique(values), 1000)
            hits = unsound = 0
            worst = 0
            for y in ys:
                counter = EvalCounter()
                x = invert_one(table, int(y), counter)
                worst = max(worst, counter.count)
                if x is not None:
                    hits += 1
                    unsound += values[x] != y
            rate = hits / len(ys)
            ok &= rate >= 0.5 and unsound == 0 and worst <= table.work_bound()
            lines.append(f"M={M} s={sigma}: success {rate:.3f} unsound {unsound} evals {worst}/{table.work_bound():.0f}")
    report(5, "single-function inversion", ok, "; ".join(lines))


def test_criterion_6_ann_recall():
    seeds = 200
    found = {"classic": 0, "inverted": 0}
    for seed in range(seeds):
        ds, q, planted = generate_planted(PlantedSpec(4096, 256, "hamming", 16, 2, seed=10_000 + seed))
        fam = family_for(ds, 16, 2)
        found["classic"] += query_classic(build_classic(ds, fam, seed), q).found is not None
        inverted = build_inverted(ds, fam, fam.profile.rho / 2, seed)
        found["inverted"] += query_inverted(inverted, q).found is not None
    recall = {k: v / seeds for k, v in found.items()}
    band = 0.9 - 3 * math.sqrt(0.9 * 0.1 / seeds)
    ok = all(r >= 0.87 for r in recall.values())
    nominal = ", ".join(f"{k} {'>=' if r >= 0.9 else '<'} 0.9 nominal" for k, r in recall.items())
    report(6, "ANN recall", ok,
           f"{seeds} seeds: classic {recall['classic']:.3f}, inverted {recall['inverted']:.3f} "
           f"(accept >= 0.87; 3-sigma band edge {band:.3f}; {nominal})")


def test_criterion_7_space_reduction():
    ds, _, _ = generate_planted(PlantedSpec(1 << 14, 256, "hamming", 16, 2, seed=77))
    fam = family_for(ds, 16, 2)
    rho = fam.profile.rho
    classic = memory_footprint(build_classic(ds, fam, seed=1))
    totals = []
    for frac in (0.25, 0.5, 0.75):
        index = build_inverted(ds, fam, frac * rho, seed=1)
        totals.append(memory_footprint(index)["total"])
        sigma, R = index.sigma, index.battery.R
        del index
    decreasing = totals[0] > totals[1] > totals[2]
    limit = 0.7 * classic["tables"]
    ok = decreasing and totals[2] <= limit
    # informational: the default (non-ANN) inverter constants at s = 3 rho / 4
    heavy = projected_nbytes(ds.n, R, sigma, 1)
    report(7, "space reduction", ok,
           f"inverted totals {totals} bytes at s = rho/4, rho/2, 3rho/4 (strictly decreasing={decreasing}); "
           f"3rho/4 {totals[2]} <= 0.7 x classic tables {classic['tables']} = {limit:.0f}; "
           f"info: default-constant inverter would need {heavy} bytes")


def test_criterion_8_determinism(tmp_path):
    def artifacts(tag):
        out = tmp_path / tag
        out.mkdir()
        code, _ = run_cli("gen", "--n", "2048", "--d", "128", "--r", "8", "--c", "2", "--seed", "5",
                          "--out", str(out / "d.anni"))
        assert code == 0
        ds, _, _ = generate_planted(PlantedSpec(2048, 128, "hamming", 8, 2, seed=5))
        fam = family_for(ds, 8, 2)
        ann_inv = inverter_bytes(build_inverted(ds, fam, 0.2, seed=3).inverter)
        fns = [RandomKeys(1024, 300, seed=i) for i in range(3)]
        raw_inv = inverter_bytes(build_all_inverter(fns, 1024, 2, seed=9))
        code, text = run_cli("bench", "--in", str(out / "d.anni"), "--r", "8", "--c", "2",
                             "--trials", "20", "--seed", "4", "--s", "0.1,0.2")
        assert code == 0
        rows = [{k: v for k, v in r.items() if k not in TIMING_COLUMNS} for r in csv.DictReader(io.StringIO(text))]
        return {
            "dataset": (out / "d.anni").read_bytes() + (out / "d.annq").read_bytes(),
            "dataset_api": dataset_bytes(ds),
            "ann_inverter": ann_inv,
            "inverter": raw_inv,
            "csv": rows,
        }

    first, second = artifacts("a"), artifacts("b")
    same = {k: first[k] == second[k] for k in first}
    report(8, "determinism", all(same.values()), ", ".join(f"{k} identical={v}" for k, v in same.items()))


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
