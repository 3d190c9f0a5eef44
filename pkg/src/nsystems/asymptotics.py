"""Finite-horizon estimates of the constants and the inequality checks.

The true constants are a liminf/limsup as ``q -> oo``; here they are
replaced by the min/max of ``P_j(q)/q`` over a window ``[tail_start,
horizon]``.  On each linear piece ``P(q)/q = s + a/q`` is monotone, so the
extremes sit at breakpoints.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import NSystem, as_scalar


@dataclass(frozen=True)
class PhiEstimate:
    n: int
    under: tuple[Fraction, ...]
    over: tuple[Fraction, ...]
    tail_start: Fraction
    horizon: Fraction

    def error(self, targets) -> Fraction:
        """Largest componentwise distance to ``(under, over)`` targets."""
        t_under, t_over = targets
        return max(max(abs(a - b) for a, b in zip(self.under, t_under)),
                   max(abs(a - b) for a, b in zip(self.over, t_over)))


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: Optional[Fraction]
    rhs: Optional[Fraction]
    relation: str  # "<=", ">=", "=" or "indeterminate"
    satisfied: Optional[bool]
    slack: Optional[Fraction]


@dataclass
class InequalityReport:
    entries: list[Inequality] = field(default_factory=list)
    branch: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.satisfied is not False for e in self.entries)

    def __getitem__(self, name: str) -> Inequality:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def _add(self, name, lhs, rhs, relation, tol) -> None:
        if relation == "<=":
            slack = rhs - lhs
            ok = slack >= -tol
        elif relation == ">=":
            slack = lhs - rhs
            ok = slack >= -tol
        else:
            slack = rhs - lhs
            ok = abs(slack) <= tol
        self.entries.append(Inequality(name, lhs, rhs, relation, ok, slack))


def phi_trace(s: NSystem, j: int) -> list[tuple[Fraction, Fraction]]:
    """``(q, P_j(q) / q)`` at every breakpoint ``q > 0`` of component ``j`` (1-based)."""
    if not 1 <= j <= s.n:
        raise IndexError(f"component {j} out of range 1..{s.n}")
    return [(q, v / q) for q, v in s.components[j - 1].breakpoints if q > 0]


def estimate_phi(s: NSystem, tail_start, horizon=None) -> PhiEstimate:
    tail_start = as_scalar(tail_start)
    horizon = s.horizon if horizon is None else as_scalar(horizon)
    if not tail_start < horizon:
        raise ValueError(f"empty tail: tail_start {tail_start} >= horizon {horizon}")
    under, over = [], []
    for j in range(1, s.n + 1):
        window = [r for q, r in phi_trace(s, j) if tail_start <= q <= horizon]
        if not window:
            raise ValueError(f"no breakpoint of P_{j} in [{tail_start}, {horizon}]")
        under.append(min(window))
        over.append(max(window))
    return PhiEstimate(s.n, tuple(under), tuple(over), tail_start, horizon)


def _four(e) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    if e.n != 3:
        raise NotImplementedError("the inequality systems are stated for n = 3")
    return e.under[0], e.over[0], e.under[2], e.over[2]


def check_laurent(e: PhiEstimate, tol=Fraction(1, 100)) -> InequalityReport:
    """Laurent's relations between the first and last constants (n = 3)."""
    tol = as_scalar(tol)
    u1, o1, u3, o3 = _four(e)
    rep = InequalityReport(branch="laurent")
    rep._add("phi3_nonnegative", Fraction(0), u3, "<=", tol)
    rep._add("phi3_ordered", u3, o3, "<=", tol)
    rep._add("phi3_at_most_one", o3, Fraction(1), "<=", tol)
    rep._add("eq0", u3 + u3 * o1 + o1, Fraction(0), "=", tol)
    rep._add("eq1", 2 * u1 + o3, -u3 * (3 + u1 + 2 * o3), "<=", tol)
    rep._add("eq2", 2 * o3 + u1, -o1 * (3 + o3 + 2 * u1), ">=", tol)
    return rep


def check_schmidt_summerer(e: PhiEstimate, tol=Fraction(1, 100)) -> InequalityReport:
    """Bounds on the middle constants in terms of the outer ones (n = 3).

    For ``under_3 < 1`` the two Omega bounds are checked; otherwise the
    degenerate values ``over_2 = 1``, ``over_1 = under_2 = -1/2`` are.
    ``notes`` records separately whether ``under_3`` and ``over_3`` equal 1.
    """
    tol = as_scalar(tol)
    u1, o1, u3, o3 = _four(e)
    u2, o2 = e.under[1], e.over[1]
    rep = InequalityReport()
    rep.notes.append(f"under_3 = 1 within tol: {abs(u3 - 1) <= tol}")
    rep.notes.append(f"over_3 = 1 within tol: {abs(o3 - 1) <= tol}")
    if u3 >= 1 - tol:
        rep.branch = "degenerate"
        rep._add("over2_is_one", o2, Fraction(1), "=", tol)
        rep._add("over1_is_minus_half", o1, Fraction(-1, 2), "=", tol)
        rep._add("under2_is_minus_half", u2, Fraction(-1, 2), "=", tol)
        return rep
    rep.branch = "omega"
    for name, num, den, value, rel in (
            ("omega_over", o1 - u1, 2 - o1 - o1 * u1, o2, "<="),
            ("omega_under", u3 - o3, 2 - u3 - o3 * u3, u2, ">=")):
        if abs(den) <= tol:
            rep.entries.append(Inequality(name, value, None, "indeterminate", None, None))
            rep.notes.append(f"{name}: denominator {den} within tol of zero")
            continue
        rep._add(name, value, num / den, rel, tol)
    return rep


def convergence_report(s: NSystem, schedule, targets,
                       marks: Optional[Sequence[Fraction]] = None) -> list[tuple[int, Fraction]]:
    """Error of the window ``[m_ceil(e/2), m_e]`` estimate for each epoch ``e``.

    ``marks`` defaults to ``schedule.epoch_marks()`` (the ``l_i`` of a
    maximal build).
    """
    marks = list(schedule.epoch_marks() if marks is None else marks)
    if len(marks) < 3:
        raise ValueError("convergence needs at least 2 epochs")
    rows = []
    for e in range(2, len(marks)):
        est = estimate_phi(s, marks[math.ceil(e / 2)], marks[e])
        rows.append((e, est.error(targets)))
    return rows


def trace_csv(s: NSystem, components: Optional[Sequence[int]] = None, digits: int = 12) -> str:
    """CSV with columns ``q, ratio, component``; decimals carry ``~`` when rounded."""
    from .formats import fmt_decimal

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "ratio", "component"])
    for j in components or range(1, s.n + 1):
        for q, r in phi_trace(s, j):
            w.writerow([fmt_decimal(q, digits), fmt_decimal(r, digits), j])
    return buf.getvalue()
