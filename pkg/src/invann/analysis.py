"""Closed-form query exponents for near-linear-space Euclidean ANN.

``ALRW(c) = (2c^2 - 1) / c^4`` is the query exponent of the list-of-points
structure at ``rho_u = 0``.  Its space/time tradeoff

    c^2 sqrt(rho_q) + (c^2 - 1) sqrt(rho_u) >= sqrt(2c^2 - 1)

lets a little extra space (``rho_u``) buy a lower ``rho_q``.  Inverting the
lists brings space back to near-linear at a query cost of ``rho_q + 4 rho_u``,
minimised in closed form by :func:`optimal_rho_u`; the minimum is
:func:`alpha`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

__all__ = [
    "TABLE2_CS",
    "ExponentReport",
    "alrw_exponent",
    "rho_q_from",
    "optimal_rho_u",
    "alpha",
    "alpha_manhattan",
    "preproc_exponent",
    "tight_exponent",
    "blackbox_exponent",
    "minimize_total",
    "exponent_report",
    "report_table",
    "format_table",
    "format_csv",
]

TABLE2_CS = (1.05, 1.5, 1.79, 2.0, 3.0, 10.0)


def _check_c(c: float) -> float:
    c = float(c)
    if not c > 1 or not math.isfinite(c):
        raise ValueError(f"approximation factor c must be a finite number above 1, got {c}")
    return c


def alrw_exponent(c: float) -> float:
    c = _check_c(c)
    return (2 * c * c - 1) / c**4


def rho_q_from(rho_u: float, c: float) -> float:
    """Query exponent on the tradeoff curve for a given space exponent ``rho_u``."""
    c = _check_c(c)
    c2 = c * c
    bound = (2 * c2 - 1) / (c2 - 1) ** 2
    if not 0 <= rho_u <= bound * (1 + 1e-12):
        raise ValueError(f"rho_u must lie in [0, {bound:.6g}] for c = {c}, got {rho_u}")
    root = max(0.0, math.sqrt(2 * c2 - 1) - (c2 - 1) * math.sqrt(rho_u))
    return (root / c2) ** 2


def _shrink(c: float) -> float:
    # (c^2-1)^2 / (4c^4 + (c^2-1)^2), the fraction of ALRW(c) that inversion saves
    c2 = c * c
    return (c2 - 1) ** 2 / (4 * c2 * c2 + (c2 - 1) ** 2)


def optimal_rho_u(c: float) -> float:
    """``rho_u`` minimising ``rho_q(rho_u) + 4 rho_u``."""
    c = _check_c(c)
    c2 = c * c
    root = math.sqrt(2 * c2 - 1) * (c2 - 1) / (4 * c2 * c2 + (c2 - 1) ** 2)
    return root * root


def alpha(c: float) -> float:
    c = _check_c(c)
    return alrw_exponent(c) * (1 - _shrink(c))


def alpha_manhattan(c: float) -> float:
    """The Euclidean formula with ``c`` in place of ``c^2``."""
    c = _check_c(c)
    return (2 * c - 1) / c**2 * (1 - (c - 1) ** 2 / (4 * c * c + (c - 1) ** 2))


def preproc_exponent(c: float) -> float:
    u = optimal_rho_u(c)
    return 1 + u / (1 + u)


def tight_exponent(c: float) -> float:
    """``(rho_q + 4 rho_u) / (1 + rho_u)`` at the optimal ``rho_u``.

    Keeps the ``1 + rho_u`` denominator that the headline exponent drops;
    informational only.
    """
    u = optimal_rho_u(c)
    return (rho_q_from(u, c) + 4 * u) / (1 + u)


def blackbox_exponent(c: float) -> float:
    """``rho + 3 rho`` with ``rho = 1 / c^2``: inversion applied to a plain Euclidean LSH."""
    c = _check_c(c)
    return 4 / (c * c)


_INV_PHI = (math.sqrt(5) - 1) / 2


def minimize_total(cs, iters: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section minimisation of ``rho_q(rho_u) + 4 rho_u``, vectorised over ``cs``.

    Works in ``x = sqrt(rho_u)`` on ``[0, sqrt(2c^2 - 1) / (c^2 - 1)]`` where
    the objective is a convex quadratic.  Returns ``(rho_u, value)`` arrays.
    Shares no code with the closed forms above, so it serves as their check.
    """
    c2 = np.asarray(cs, dtype=np.float64) ** 2
    s = np.sqrt(2 * c2 - 1)

    def total(x):
        return ((s - (c2 - 1) * x) / c2) ** 2 + 4 * x * x

    lo = np.zeros_like(c2)
    hi = s / (c2 - 1)
    a = hi - _INV_PHI * (hi - lo)
    b = lo + _INV_PHI * (hi - lo)
    fa, fb = total(a), total(b)
    for _ in range(iters):
        left = fa < fb
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
        a_new = hi - _INV_PHI * (hi - lo)
        b_new = lo + _INV_PHI * (hi - lo)
        a, b = np.where(left, a_new, b), np.where(left, a, b_new)
        fa, fb = np.where(left, total(a_new), fb), np.where(left, fa, total(b_new))
    x = (lo + hi) / 2
    return x * x, total(x)


@dataclass(frozen=True)
class ExponentReport:
    c: float
    rho_u_star: float
    rho_q: float
    alpha: float
    alrw: float
    preproc_exponent: float
    alpha_manhattan: float
    blackbox: float
    tight: float


def exponent_report(c: float) -> ExponentReport:
    u = optimal_rho_u(c)
    return ExponentReport(
        c=float(c),
        rho_u_star=u,
        rho_q=rho_q_from(u, c),
        alpha=alpha(c),
        alrw=alrw_exponent(c),
        preproc_exponent=preproc_exponent(c),
        alpha_manhattan=alpha_manhattan(c),
        blackbox=blackbox_exponent(c),
        tight=tight_exponent(c),
    )


def report_table(cs=TABLE2_CS) -> tuple[list[ExponentReport], str]:
    """Reports for each ``c`` and the aligned text table."""
    rows = [exponent_report(c) for c in cs]
    return rows, format_table(rows)


_COLUMNS = (
    ("c", "c", "{:g}"),
    ("alpha", "alpha(c)", "{:.3f}"),
    ("alrw", "ALRW(c)", "{:.3f}"),
    ("preproc_exponent", "preproc", "{:.3f}"),
    ("blackbox", "4/c^2", "{:.3f}"),
    ("rho_u_star", "rho_u*", "{:.5f}"),
    ("rho_q", "rho_q", "{:.4f}"),
    ("alpha_manhattan", "alpha_M(c)", "{:.3f}"),
    ("tight", "tight (info)", "{:.4f}"),
)


def format_table(rows: list[ExponentReport]) -> str:
    header = [label for _, label, _ in _COLUMNS]
    body = [[fmt.format(getattr(r, name)) for name, _, fmt in _COLUMNS] for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(x.rjust(w) for x, w in zip(row, widths)) for row in body]
    return "\n".join(lines)


def format_csv(rows: list[ExponentReport]) -> str:
    """Full-precision CSV, one column per :class:`ExponentReport` field."""
    out = io.StringIO()
    names = [f.name for f in fields(ExponentReport)]
    writer = csv.DictWriter(out, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: repr(v) for k, v in asdict(r).items()})
    return out.getvalue()
