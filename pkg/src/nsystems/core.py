"""Exact piecewise-linear kernel and the n-system validator.

Every position, value and slope is a :class:`fractions.Fraction`.  Floats
never enter this module.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Optional, Sequence

Scalar = Fraction


class DomainError(ValueError):
    """Raised when a query falls outside the domain of a function."""


def as_scalar(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: they would silently smuggle rounding into the
    exact core.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on ``[0, domain_end]``.

    ``breakpoints`` holds ``(q, value)`` pairs and ``slopes[k]`` is the
    slope on ``[q_k, q_{k+1}]``.  Construction does not enforce the
    invariants so that malformed input can still reach :func:`validate`;
    call :meth:`structural_problems` to inspect it.
    """

    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    slopes: tuple[Fraction, ...]

    @classmethod
    def from_slopes(cls, start_value, knots: Sequence, slopes: Sequence) -> "PiecewiseLinear":
        """Build from knot positions and segment slopes, integrating values."""
        knots = [as_scalar(k) for k in knots]
        slopes = [as_scalar(s) for s in slopes]
        if len(slopes) != len(knots) - 1:
            raise ValueError("need exactly one slope per segment")
        value = as_scalar(start_value)
        points = [(knots[0], value)]
        for k, s in enumerate(slopes):
            value = value + s * (knots[k + 1] - knots[k])
            points.append((knots[k + 1], value))
        return cls(tuple(points), tuple(slopes))

    @property
    def domain_end(self) -> Fraction:
        return self.breakpoints[-1][0]

    @cached_property
    def knots(self) -> list[Fraction]:
        return [q for q, _ in self.breakpoints]

    def structural_problems(self) -> list[tuple[str, Optional[Fraction], str]]:
        """Return ``(axiom, position, detail)`` for every structural defect."""
        problems = []
        bps = self.breakpoints
        if not bps:
            return [("breakpoints", None, "no breakpoints")]
        if len(self.slopes) != len(bps) - 1:
            problems.append(("breakpoints", None,
                             f"{len(self.slopes)} slopes for {len(bps)} breakpoints"))
            return problems
        if bps[0][0] != 0:
            problems.append(("breakpoints", bps[0][0], "first breakpoint not at q = 0"))
        for k in range(len(bps) - 1):
            if not bps[k][0] < bps[k + 1][0]:
                problems.append(("breakpoints", bps[k + 1][0],
                                 f"breakpoints {k} and {k + 1} not strictly increasing"))
        if problems:
            return problems
        for k, s in enumerate(self.slopes):
            (qa, va), (qb, vb) = bps[k], bps[k + 1]
            if va + s * (qb - qa) != vb:
                problems.append(("continuity", qb,
                                 f"value {vb} at breakpoint {k + 1} != {va + s * (qb - qa)}"))
        return problems

    def _segment(self, q: Fraction) -> int:
        # Index k of the segment [q_k, q_{k+1}] containing q (right-closed at the end).
        k = bisect_right(self.knots, q) - 1
        return min(k, len(self.slopes) - 1)


def evaluate(f: PiecewiseLinear, q) -> Fraction:
    """Exact value of ``f`` at ``q`` by interpolation on the containing segment."""
    q = as_scalar(q)
    if q < 0 or q > f.domain_end:
        raise DomainError(f"q = {q} outside [0, {f.domain_end}]")
    if not f.slopes:
        return f.breakpoints[0][1]
    k = f._segment(q)
    qk, vk = f.breakpoints[k]
    return vk + f.slopes[k] * (q - qk)


def slope_at(f: PiecewiseLinear, q, side: str) -> Fraction:
    """Slope of the segment adjacent to ``q`` on ``side`` ('left' or 'right')."""
    q = as_scalar(q)
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if side == "left" and not 0 < q <= f.domain_end:
        raise DomainError(f"no left slope at q = {q}")
    if side == "right" and not 0 <= q < f.domain_end:
        raise DomainError(f"no right slope at q = {q}")
    knots = f.knots
    if side == "right":
        return f.slopes[bisect_right(knots, q) - 1]
    # left: the segment whose right end is >= q and left end < q
    k = bisect_right(knots, q) - 1
    if knots[k] == q:
        k -= 1
    return f.slopes[k]


def intersect_forward(f: PiecewiseLinear, g: PiecewiseLinear, q0) -> Optional[Fraction]:
    """Smallest ``q* > q0`` with ``f(q*) == g(q*)``, or ``None``.

    If the graphs coincide on a whole segment starting at ``a >= q0``, ``a``
    is returned (first-equality convention), which may be ``q0`` itself.
    """
    q0 = as_scalar(q0)
    end = min(f.domain_end, g.domain_end)
    if q0 < 0 or q0 > end:
        raise DomainError(f"q0 = {q0} outside the shared domain [0, {end}]")
    cuts = sorted({q for q in f.knots + g.knots if q0 < q < end} | {q0, end})
    for a, b in zip(cuts, cuts[1:]):
        da = evaluate(f, a) - evaluate(g, a)
        db = evaluate(f, b) - evaluate(g, b)
        if da == 0 and db == 0:
            return a
        if da == 0 and a > q0:
            return a
        if db == 0:
            return b
        if (da < 0) != (db < 0):
            # linear difference: exact root between a and b
            return a + da * (b - a) / (da - db)
    return None


def canonicalize(f: PiecewiseLinear) -> PiecewiseLinear:
    """Merge collinear neighbouring segments (drop slope-preserving breakpoints)."""
    if len(f.slopes) < 2:
        return f
    points = [f.breakpoints[0]]
    slopes = [f.slopes[0]]
    for k in range(1, len(f.slopes)):
        if f.slopes[k] == slopes[-1]:
            continue
        points.append(f.breakpoints[k])
        slopes.append(f.slopes[k])
    points.append(f.breakpoints[-1])
    return PiecewiseLinear(tuple(points), tuple(slopes))


@dataclass(frozen=True)
class NSystem:
    n: int
    horizon: Fraction
    components: tuple[PiecewiseLinear, ...]

    @property
    def falling_slope(self) -> Fraction:
        return Fraction(-(self.n - 1))

    def knots(self) -> list[Fraction]:
        """Sorted union of all component breakpoints."""
        first = self.components[0].knots
        if all(c.knots == first for c in self.components[1:]):
            return list(first)
        out = []
        for q in heapq.merge(*(c.knots for c in self.components)):
            if not out or out[-1] != q:
                out.append(q)
        return out

    def sweep(self):
        """Yield ``(q, values, right_slopes)`` at every knot of the union grid.

        ``right_slopes`` is ``None`` at the horizon.  Linear in the total
        number of breakpoints; assumes well-formed components.
        """
        comps = self.components
        first = comps[0].knots
        if all(c.knots == first for c in comps[1:]):
            # shared grid: stored values are exact, no interpolation needed
            m = len(first)
            for k, q in enumerate(first):
                yield (q, [c.breakpoints[k][1] for c in comps],
                       [c.slopes[k] for c in comps] if k < m - 1 else None)
            return
        ptr = [0] * len(comps)
        for q in self.knots():
            vals, slopes = [], []
            for j, c in enumerate(comps):
                k = ptr[j]
                kn = c.knots
                while k + 1 < len(kn) and kn[k + 1] <= q:
                    k += 1
                ptr[j] = k
                qk, vk = c.breakpoints[k]
                if k < len(c.slopes):
                    vals.append(vk + c.slopes[k] * (q - qk))
                    slopes.append(c.slopes[k])
                else:
                    vals.append(vk)
            yield q, vals, (slopes if len(slopes) == len(comps) else None)

    def values(self, q) -> list[Fraction]:
        return [evaluate(c, q) for c in self.components]

    def canonical(self) -> "NSystem":
        return NSystem(self.n, self.horizon, tuple(canonicalize(c) for c in self.components))


@dataclass(frozen=True)
class Violation:
    axiom: str
    q: Optional[Fraction]
    components: tuple[int, ...]
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    # Non-failing observations, e.g. the properness proxy.
    flags: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def add(self, axiom, q, components, detail) -> None:
        self.violations.append(Violation(axiom, q, tuple(components), detail))


AXIOMS = ("structure", "breakpoints", "continuity", "slope_set", "start",
          "order", "zero_sum", "one_decaying", "switch_rule")


def validate(s: NSystem, schedule=None) -> ValidationReport:
    """Check every n-system axiom and report all violations.

    Component indices in the report are 1-based, matching ``P_1 .. P_n``.
    ``schedule`` (a construct.SwitchSchedule) enables the per-epoch
    properness proxy; without it the proxy only counts equality positions.
    """
    report = ValidationReport()
    n = s.n
    if n < 2 or len(s.components) != n:
        report.add("structure", None, (), f"n = {n} with {len(s.components)} components")
        return report

    broken = False
    for j, comp in enumerate(s.components, start=1):
        for axiom, q, detail in comp.structural_problems():
            report.add(axiom, q, (j,), detail)
            broken = True
        if comp.breakpoints and comp.domain_end != s.horizon:
            report.add("breakpoints", comp.domain_end, (j,),
                       f"component ends at {comp.domain_end}, horizon is {s.horizon}")
            broken = True
    if broken:
        # Evaluation is meaningless on malformed components.
        return report

    fall = s.falling_slope
    allowed = {fall, Fraction(1)}
    for j, comp in enumerate(s.components, start=1):
        for k, slope in enumerate(comp.slopes):
            if slope not in allowed:
                report.add("slope_set", comp.breakpoints[k][0], (j,),
                           f"slope {slope} not in {{{fall}, 1}}")

    for j, comp in enumerate(s.components, start=1):
        if comp.breakpoints[0][1] != 0:
            report.add("start", Fraction(0), (j,), f"P_{j}(0) = {comp.breakpoints[0][1]}")

    knots, vals, seg_slopes = [], [], []
    for q, v, sl in s.sweep():
        knots.append(q)
        vals.append(v)
        if sl is not None:
            seg_slopes.append(sl)
    for q, v in zip(knots, vals):
        for j in range(n - 1):
            if v[j] > v[j + 1]:
                report.add("order", q, (j + 1, j + 2), f"P_{j + 1} = {v[j]} > P_{j + 2} = {v[j + 1]}")
    if sum(vals[0]) != 0:
        report.add("zero_sum", knots[0], (), f"sum at q = {knots[0]} is {sum(vals[0])}")

    for (a, b), sl in zip(zip(knots, knots[1:]), seg_slopes):
        if sum(sl) != 0:
            report.add("zero_sum", a, (), f"slope sum {sum(sl)} on [{a}, {b}]")
        falling = [j + 1 for j, x in enumerate(sl) if x == fall]
        rising = [j + 1 for j, x in enumerate(sl) if x == 1]
        if len(falling) != 1 or len(rising) != n - 1:
            report.add("one_decaying", a, tuple(falling),
                       f"{len(falling)} falling components on [{a}, {b}]")

    for k in range(1, len(knots) - 1):
        q = knots[k]
        left, right = seg_slopes[k - 1], seg_slopes[k]
        up = [i for i in range(n) if left[i] < 0 < right[i]]
        down = [i for i in range(n) if left[i] > 0 > right[i]]
        for i in up:
            for j in down:
                if not i < j and vals[k][i] != vals[k][j]:
                    report.add("switch_rule", q, (i + 1, j + 1),
                               f"P_{i + 1} turns up and P_{j + 1} turns down with "
                               f"P_{i + 1} = {vals[k][i]} != P_{j + 1} = {vals[k][j]}")

    if report.valid:
        report.flags.extend(_properness_flags(s, knots, vals, schedule))
    return report


def _properness_flags(s, knots, vals, schedule) -> list[str]:
    # Stand-in for Roy's undefined "proper" condition: equality positions of
    # the bottom pair and of the top pair must keep recurring.
    n = s.n
    low = [q for q, v in zip(knots, vals) if q > 0 and v[0] == v[1]]
    high = [q for q, v in zip(knots, vals) if q > 0 and v[n - 2] == v[n - 1]]
    flags = []
    if schedule is None:
        if len(low) < 2 or len(high) < 2:
            flags.append(f"properness proxy: only {len(low)} positions with P_1 = P_2 "
                         f"and {len(high)} with P_{n - 1} = P_{n}")
        return flags
    ends = list(schedule.epoch_marks())
    if len(ends) < 3:
        flags.append(f"properness proxy: horizon holds fewer than 2 epochs ({max(len(ends) - 1, 0)})")
    for i, (a, b) in enumerate(zip(ends, ends[1:])):
        lo = bisect_left(low, a)
        hi = bisect_left(high, a)
        if not (lo < len(low) and low[lo] <= b) or not (hi < len(high) and high[hi] <= b):
            flags.append(f"properness proxy: epoch {i} on [{a}, {b}] lacks an equality position")
    return flags

