from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from invann.analysis import (
    TABLE2_CS,
    alpha,
    alpha_manhattan,
    alrw_exponent,
    blackbox_exponent,
    exponent_report,
    format_csv,
    minimize_total,
    optimal_rho_u,
    preproc_exponent,
    report_table,
    rho_q_from,
    tight_exponent,
)

# printed to three decimals in the reference table
PRINTED = {
    1.05: (0.989, 0.991, 1.001),
    1.5: (0.641, 0.691, 1.011),
    1.79: (0.471, 0.527, 1.012),
    2.0: (0.383, 0.438, 1.012),
    3.0: (0.175, 0.210, 1.007),
    10.0: (0.016, 0.020, 1.001),
}

cs = st.floats(1.0001, 100.0)


@pytest.mark.parametrize("c", TABLE2_CS)
def test_printed_table_rows(c):
    a, al, pre = PRINTED[c]
    assert alpha(c) == pytest.approx(a, abs=1e-3)
    assert alrw_exponent(c) == pytest.approx(al, abs=1e-3)
    assert preproc_exponent(c) == pytest.approx(pre, abs=1e-3)


def test_exact_values():
    assert alrw_exponent(2) == 0.4375
    assert optimal_rho_u(2) == pytest.approx((math.sqrt(7) * 3 / 73) ** 2, rel=1e-14)
    assert optimal_rho_u(2) == pytest.approx(0.011822, abs=1e-6)
    assert alpha(2) == pytest.approx(0.4375 * 64 / 73, rel=1e-14)
    assert alpha_manhattan(2) == pytest.approx(0.75 * 16 / 17, rel=1e-14)
    assert rho_q_from(0.01, 2) == pytest.approx(0.34, abs=0.005)
    assert rho_q_from(7 / 9, 2) == pytest.approx(0, abs=1e-15)
    assert blackbox_exponent(2) == 1.0


@given(cs)
def test_alpha_is_the_minimised_objective(c):
    u = optimal_rho_u(c)
    assert alpha(c) == pytest.approx(rho_q_from(u, c) + 4 * u, abs=1e-12)
    assert rho_q_from(0, c) == pytest.approx(alrw_exponent(c), rel=1e-12)


@given(cs)
def test_ordering_and_bounds(c):
    assert 0 < alpha(c) < alrw_exponent(c) < 1
    assert 0 <= optimal_rho_u(c) <= 0.013
    assert preproc_exponent(c) <= 1.013
    assert alpha_manhattan(c) < (2 * c - 1) / c**2
    assert tight_exponent(c) <= alpha(c) + 1e-15


def test_limits():
    assert alrw_exponent(1 + 1e-9) == pytest.approx(1, abs=1e-8)
    assert optimal_rho_u(1 + 1e-9) < 1e-15
    assert alpha_manhattan(1 + 1e-9) == pytest.approx(1, abs=1e-8)
    assert alpha(1e4) / alrw_exponent(1e4) == pytest.approx(0.8, abs=1e-6)


@pytest.mark.parametrize("bad", [1.0, 0.5, -2.0, float("nan"), float("inf")])
def test_domain_errors(bad):
    for fn in (alrw_exponent, optimal_rho_u, alpha, alpha_manhattan):
        with pytest.raises(ValueError):
            fn(bad)


def test_rho_u_above_the_curve_is_rejected():
    with pytest.raises(ValueError):
        rho_q_from(0.8, 2)
    with pytest.raises(ValueError):
        rho_q_from(-0.1, 2)


def test_golden_section_agrees_with_closed_form():
    grid = np.round(np.arange(1.01, 100.0 + 1e-9, 0.01), 10)
    u, value = minimize_total(grid)
    closed = np.array([alpha(c) for c in grid])
    assert np.abs(value - closed).max() < 1e-10
    assert np.abs(u - np.array([optimal_rho_u(c) for c in grid])).max() < 1e-8


def test_report_table_text_and_csv():
    rows, text = report_table([2.0, 3.0])
    lines = text.splitlines()
    assert len(lines) == 4 and "ALRW(c)" in lines[0] and "4/c^2" in lines[0]
    assert rows[0] == exponent_report(2.0)
    csv_text = format_csv(rows)
    header, first, _ = csv_text.strip().splitlines()
    assert header.split(",")[:5] == ["c", "rho_u_star", "rho_q", "alpha", "alrw"]
    assert float(first.split(",")[3]) == alpha(2.0)
