"""``invann`` command line: gen, bench, analyze, selftest.

Exit codes: 0 success, 1 runtime or suite failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import analysis
from .all_inversion import RandomKeys, brute_preimage, build_all_inverter, invert_all
from .ann import build_classic, build_inverted, family_for, memory_footprint, query_classic, query_inverted
from .core import Metric, PlantedSpec, generate_planted, load_dataset, perturbed_query, save_dataset, save_query
from .inversion import EvalCounter, build_inversion, invert_one
from .lsh import PlannerError

log = logging.getLogger("invann")

TIMING_COLUMNS = ("build_ms", "mean_query_ms")
QUICK_BUDGET_S = 60.0


class UsageError(Exception):
    """Bad flag values or combinations; exit code 2."""


@dataclass
class BenchRecord:
    mode: str
    n: int
    d: int
    metric: str
    r: float
    c: float
    s: str
    seed: int
    trials: int
    k: int
    R: int
    sigma: str
    build_ms: float
    bytes_total: int
    bytes_dataset: int
    bytes_battery: int
    bytes_tables: int
    bytes_inverter: int
    recall: float
    mean_query_ms: float
    mean_candidates: float
    mean_inverter_f_evals: float


BENCH_COLUMNS = tuple(f.name for f in fields(BenchRecord))


def query_path(out: Path) -> Path:
    """Sidecar path for a dataset file: ``x.anni`` -> ``x.annq``."""
    return out.with_suffix(".annq") if out.suffix == ".anni" else out.with_name(out.name + ".annq")


def _csv_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_instance_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--n", type=int, required=required, help="number of points")
    p.add_argument("--d", type=int, required=required, help="dimension")
    p.add_argument("--metric", choices=[m.label for m in Metric], default="hamming")
    p.add_argument("--r", type=float, required=required, help="near radius")
    p.add_argument("--c", type=float, required=required, help="approximation factor")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="invann", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a planted dataset and its query sidecar")
    _add_instance_flags(gen, required=True)
    gen.add_argument("--out", type=Path, required=True, help="dataset path; the query goes next to it as .annq")

    bench = sub.add_parser("bench", help="build indexes, run planted queries, print CSV")
    _add_instance_flags(bench, required=False)
    bench.add_argument("--in", dest="input", type=Path, help="dataset file instead of --n/--d/--metric")
    bench.add_argument("--mode", choices=["classic", "inverted", "both"], default="both")
    bench.add_argument("--s", type=_csv_list, help="space parameter(s) for the inverted index, comma-separated")
    bench.add_argument("--trials", type=int, default=100)
    bench.add_argument("--w", type=float, default=4.0, help="bucket width of the Euclidean family")
    bench.add_argument("--no-header", action="store_true")

    ana = sub.add_parser("analyze", help="exponent table")
    which = ana.add_mutually_exclusive_group(required=True)
    which.add_argument("--c", type=_csv_list, help="comma-separated approximation factors")
    which.add_argument("--table2", action="store_true", help="the six reference rows")
    ana.add_argument("--format", choices=["text", "csv", "both"], default="both")

    st = sub.add_parser("selftest", help="oracle-equivalence suites at reduced scale")
    st.add_argument("--quick", action="store_true")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def cmd_gen(args) -> int:
    spec = PlantedSpec(args.n, args.d, args.metric, args.r, args.c, args.seed)
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ds, q, planted = generate_planted(spec)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    save_query(query_path(args.out), ds.metric, q, ds.dim, planted, spec.seed)
    print(f"wrote {args.out} and {query_path(args.out)}")
    return 0


def _bench_dataset(args):
    if args.input is not None:
        if args.n is not None or args.d is not None:
            raise UsageError("--in conflicts with --n/--d")
        if args.r is None or args.c is None:
            raise UsageError("--r and --c are required")
        return load_dataset(args.input)
    missing = [f"--{k}" for k in ("n", "d", "r", "c") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"missing {' '.join(missing)} (or give --in)")
    spec = PlantedSpec(args.n, args.d, args.metric, args.r, args.c, args.seed)
    try:
        spec.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return generate_planted(spec)[0]


def _run_trials(index, ds, r, seed, trials, query) -> dict[str, float]:
    found = 0
    wall = cands = evals = 0.0
    for t in range(trials):
        q, _ = perturbed_query(ds, r, seed, t)
        res = query(index, q)
        found += res.found is not None
        wall += res.wall_time
        cands += res.candidates_examined
        evals += res.inverter_f_evals
    return {
        "recall": found / trials,
        "mean_query_ms": 1e3 * wall / trials,
        "mean_candidates": cands / trials,
        "mean_inverter_f_evals": evals / trials,
    }


def _record(mode, ds, args, s, sigma, index, build_s, stats) -> BenchRecord:
    fp = memory_footprint(index)
    return BenchRecord(
        mode=mode, n=ds.n, d=ds.dim, metric=ds.metric.label, r=args.r, c=args.c,
        s="" if s is None else repr(s), seed=args.seed, trials=args.trials,
        k=index.battery.k, R=index.battery.R, sigma="" if sigma is None else repr(sigma),
        build_ms=round(1e3 * build_s, 3), bytes_total=fp["total"], bytes_dataset=fp["dataset"],
        bytes_battery=fp["battery"], bytes_tables=fp.get("tables", 0), bytes_inverter=fp.get("inverter", 0),
        **stats,
    )


def bench_records(args) -> list[BenchRecord]:
    """Everything ``bench`` prints, as records."""
    if args.mode == "classic" and args.s:
        raise UsageError("--s applies to the inverted index only")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    ds = _bench_dataset(args)
    try:
        family = family_for(ds, args.r, args.c, args.w)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rho = family.profile.rho
    s_values = args.s or [rho / 2]
    if args.mode != "classic":
        bad = [s for s in s_values if not 0 < s < rho]
        if bad:
            raise UsageError(f"--s must lie in (0, rho) with rho = {rho:.6f}; got {bad}")
    records = []
    if args.mode in ("classic", "both"):
        t0 = time.perf_counter()
        index = build_classic(ds, family, args.seed)
        build_s = time.perf_counter() - t0
        stats = _run_trials(index, ds, args.r, args.seed, args.trials, query_classic)
        records.append(_record("classic", ds, args, None, None, index, build_s, stats))
    if args.mode in ("inverted", "both"):
        for s in s_values:
            t0 = time.perf_counter()
            index = build_inverted(ds, family, s, args.seed)
            build_s = time.perf_counter() - t0
            stats = _run_trials(index, ds, args.r, args.seed, args.trials, query_inverted)
            records.append(_record("inverted", ds, args, s, index.sigma, index, build_s, stats))
    return records


def write_bench_csv(records: Sequence[BenchRecord], out, header: bool = True) -> None:
    writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    if header:
        writer.writeheader()
    for rec in records:
        writer.writerow(asdict(rec))


def cmd_bench(args) -> int:
    records = bench_records(args)
    write_bench_csv(records, sys.stdout, header=not args.no_header)
    return 0


def cmd_analyze(args) -> int:
    cs = analysis.TABLE2_CS if args.table2 else args.c
    bad = [c for c in cs if not c > 1]
    if bad:
        raise UsageError(f"every c must exceed 1; got {bad}")
    rows, text = analysis.report_table(cs)
    if args.format in ("text", "both"):
        print(text)
    if args.format == "both":
        print()
    if args.format in ("csv", "both"):
        sys.stdout.write(analysis.format_csv(rows))
    return 0


# -- selftest ---------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    ok: bool
    detail: str


def _suite_inversion(quick: bool, seed: int, fault: bool) -> SuiteResult:
    M, queries = 1024, (200 if quick else 1000)
    lines, ok = [], True
    for sigma in (2, 4, 8):
        values = RandomKeys(M, M, seed=seed + sigma).values(np.arange(M))
        f = lambda x, v=values: v[x]  # noqa: E731
        table = build_inversion(f, M, sigma, seed)
        if fault:
            table.ends[:] = 0
        image = np.unique(values)
        rng = np.random.default_rng(seed)
        ys = rng.choice(image, queries)
        hits = unsound = 0
        worst = 0
        for y in ys:
            counter = EvalCounter()
            x = invert_one(table, int(y), counter)
            worst = max(worst, counter.count)
            if x is not None:
                hits += 1
                unsound += values[x] != y
        rate = hits / queries
        within = worst <= table.work_bound()
        ok &= rate >= 0.5 and unsound == 0 and within
        lines.append(f"sigma={sigma} success={rate:.3f} unsound={unsound} max_evals={worst}/{table.work_bound():.0f}")
    return SuiteResult("inversion", ok, "; ".join(lines))


def _suite_all_inversion(quick: bool, seed: int, fault: bool) -> SuiteResult:
    N, R, sigma = 1024, 2, 2
    queries = 100 if quick else 500
    fns = [RandomKeys(N, N // 2, seed=seed * 31 + i) for i in range(R)]
    inv = build_all_inverter(fns, N, sigma, seed)
    if fault:
        for level in inv.levels:
            for ends in level.ends:
                ends[:] = 0
    rng = np.random.default_rng(seed)
    subset = equal = 0
    for _ in range(queries):
        i = int(rng.integers(R))
        target = fns[i].keys(rng.integers(N, size=1))[0]
        got = invert_all(inv, i, target)
        truth = brute_preimage(fns[i], N, target)
        subset += bool(np.isin(got, truth).all())
        equal += np.array_equal(got, truth)
    space_ok = inv.stored_entries <= inv.space_bound()
    ok = subset == queries and equal >= 0.99 * queries and space_ok
    detail = (f"N={N} R={R} sigma={sigma} subset={subset}/{queries} equal={equal}/{queries} "
              f"entries={inv.stored_entries}/{inv.space_bound():.0f}")
    return SuiteResult("all_inversion", ok, detail)


def _suite_ann(quick: bool, seed: int, fault: bool) -> SuiteResult:
    trials = 10 if quick else 40
    found = {"classic": 0, "inverted": 0}
    for t in range(trials):
        ds, q, _ = generate_planted(PlantedSpec(1024, 128, "hamming", 8, 2, seed=seed * 1000 + t))
        fam = family_for(ds, 8, 2)
        found["classic"] += query_classic(build_classic(ds, fam, t), q).found is not None
        found["inverted"] += query_inverted(build_inverted(ds, fam, fam.profile.rho / 2, t), q).found is not None
    rates = {k: v / trials for k, v in found.items()}
    # small trial counts: accept anything a 0.9-recall index plausibly produces
    ok = all(r >= 0.7 for r in rates.values())
    return SuiteResult("ann", ok, " ".join(f"{k}_recall={v:.2f}" for k, v in rates.items()))


def _suite_analysis(quick: bool, seed: int, fault: bool) -> SuiteResult:
    printed = {1.05: (.989, .991, 1.001), 1.5: (.641, .691, 1.011), 1.79: (.471, .527, 1.012),
               2.0: (.383, .438, 1.012), 3.0: (.175, .210, 1.007), 10.0: (.016, .020, 1.001)}
    rows, _ = analysis.report_table(tuple(printed))
    worst = max(abs(got - want) for r in rows
                for got, want in zip((r.alpha, r.alrw, r.preproc_exponent), printed[r.c]))
    return SuiteResult("analysis", worst <= 0.001, f"max table deviation {worst:.5f}")


SUITES: tuple[Callable[[bool, int, bool], SuiteResult], ...] = (
    _suite_analysis, _suite_inversion, _suite_all_inversion, _suite_ann,
)


def run_selftest(quick: bool = False, seed: int = 0, fault: bool = False) -> list[SuiteResult]:
    return [suite(quick, seed, fault) for suite in SUITES]


def cmd_selftest(args) -> int:
    t0 = time.perf_counter()
    results = run_selftest(args.quick, args.seed, args.inject_fault)
    for res in results:
        print(f"[{'PASS' if res.ok else 'FAIL'}] {res.name}: {res.detail}")
    elapsed = time.perf_counter() - t0
    print(f"selftest finished in {elapsed:.1f} s")
    if args.quick and elapsed > QUICK_BUDGET_S:
        print(f"warning: --quick exceeded its {QUICK_BUDGET_S:.0f} s budget", file=sys.stderr)
    failed = [r.name for r in results if not r.ok]
    if failed:
        print(f"failing suites: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"gen": cmd_gen, "bench": cmd_bench, "analyze": cmd_analyze, "selftest": cmd_selftest}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, PlannerError) as exc:
        parser.print_usage(sys.stderr)
        print(f"invann {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"invann {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
