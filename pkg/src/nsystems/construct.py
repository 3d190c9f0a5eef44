"""Builders for the maximal and the alternating n-system constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import NSystem, PiecewiseLinear, as_scalar


class BuildError(ValueError):
    """A schedule or parameter choice makes the construction impossible."""


GROWTH_RULES = ("factorial", "exp")


def default_lacunary(l0, count: int) -> list[Fraction]:
    """``l_i = l0 * (i + 1)!`` for ``i < count``; ratios ``i + 2`` grow without bound."""
    return lacunary(l0, count, "factorial")


def lacunary(l0, count: int, rule: str = "factorial", base: int = 10) -> list[Fraction]:
    """Lacunary schedules with ``l_{i+1} / l_i`` strictly increasing and unbounded.

    ``factorial``: ``l0 * (i + 1)!``.  ``exp``: ``l0 * base ** (i (i + 1) / 2)``,
    i.e. ratios ``base, base**2, ...`` -- much faster, for short horizons.
    """
    l0 = as_scalar(l0)
    if l0 <= 0 or count < 1:
        raise ValueError("need l0 > 0 and count >= 1")
    if rule == "factorial":
        return [l0 * math.factorial(i + 1) for i in range(count)]
    if rule == "exp":
        if base < 2:
            raise ValueError("exp rule needs base >= 2")
        return [l0 * base ** (i * (i + 1) // 2) for i in range(count)]
    raise ValueError(f"unknown growth rule {rule!r}; choose from {GROWTH_RULES}")


@dataclass(frozen=True)
class ScheduleSpec:
    l0: Fraction
    growth: str = "factorial"
    epochs: int = 14
    base: int = 10

    def sequence(self) -> list[Fraction]:
        # epochs steps need l_0 .. l_epochs
        return lacunary(self.l0, self.epochs + 1, self.growth, self.base)


@dataclass(frozen=True)
class PhaseMark:
    q: Fraction
    kind: str  # "maximal" or "intermediate"
    scale: Fraction = Fraction(1)


@dataclass
class SwitchSchedule:
    """Every switch position produced by a build.

    ``r[0] = 0`` so that ``r[t]`` is ``r_t``; ``w[i]`` lists ``w_i^1 ..
    w_i^{n-2}``.  The alternating build additionally fills ``phases``,
    ``b`` (zigzag nodes per phase), ``qtilde`` and ``zigzag_step``.
    """

    n: int
    l: list[Fraction]
    r: list[Fraction]
    w: list[list[Fraction]]
    phases: list[PhaseMark] = field(default_factory=list)
    b: list[list[Fraction]] = field(default_factory=list)
    qtilde: list[Fraction] = field(default_factory=list)
    zigzag_step: list[Fraction] = field(default_factory=list)
    # max_j |P_j(q~)| / q~ per phase, and the epsilon_k at phase boundaries q_{2k}
    qtilde_ratio: list[Fraction] = field(default_factory=list)
    boundary_eps: list[Fraction] = field(default_factory=list)
    horizon: Optional[Fraction] = None

    @property
    def epochs(self) -> int:
        return len(self.l) - 1

    def I(self, t: int) -> tuple[Fraction, Fraction]:
        """Falling interval ``[r_t, l_t]`` of ``P_1``."""
        return self.r[t], self.l[t]

    def J(self, t: int) -> tuple[Fraction, Fraction]:
        """Rising interval ``[l_{t-1}, r_t]`` of ``P_1``, ``t >= 1``."""
        return self.l[t - 1], self.r[t]

    def K(self, t: int) -> tuple[Fraction, Fraction]:
        """``[w_{t-1}, r_t]``: ``P_1`` rises while ``P_2`` falls."""
        return self.w[t - 1][-1], self.r[t]

    def switch_sequence(self) -> list[Fraction]:
        """``r_0, l_0, w_0^1.., r_1, l_1, w_1^1.., ...`` in construction order."""
        seq = [self.r[0]]
        for i in range(len(self.l)):
            seq.append(self.l[i])
            if i < len(self.w):
                seq.extend(self.w[i])
            if i + 1 < len(self.r):
                seq.append(self.r[i + 1])
        return seq

    def interleaved(self, strict: bool = False) -> bool:
        """Non-decreasing switch sequence; ``strict`` forbids ties except ``w_0 = l_0``."""
        seq = self.switch_sequence()
        if not strict:
            return all(a <= b for a, b in zip(seq, seq[1:]))
        # all components above P_1 are still tied at l_0, so w_0^h = l_0
        head = 2 + (len(self.w[0]) if self.w else 0)
        if any(v != self.l[0] for v in seq[1:head]):
            return False
        return all(a < b for a, b in zip(seq[head - 1:], seq[head:])) and seq[0] < seq[1]

    def ties(self) -> list[Fraction]:
        """Positions where consecutive switch positions coincide."""
        seq = self.switch_sequence()
        return [a for a, b in zip(seq, seq[1:]) if a == b]

    def epoch_marks(self) -> list[Fraction]:
        """Epoch boundaries: the ``l_i``, then the phase ends ``q_2, q_4, ...``."""
        marks = list(self.l)
        ends = [p.q for p in self.phases[1:] if p.kind == "intermediate"]
        marks.extend(q for q in ends if q > marks[-1])
        if self.horizon is not None and self.horizon > marks[-1]:
            marks.append(self.horizon)
        return marks


class _Tracer:
    """Accumulates a shared knot grid and one slope vector per segment."""

    def __init__(self, n: int):
        self.n = n
        self.fall = Fraction(-(n - 1))
        self.q = Fraction(0)
        self.v = [Fraction(0)] * n
        self.knots = [Fraction(0)]
        self.seg = []

    def advance(self, length, falling: int) -> None:
        if length < 0:
            raise BuildError(f"negative segment length {length} at q = {self.q}")
        if length == 0:
            return
        slopes = [Fraction(1)] * self.n
        slopes[falling] = self.fall
        self.q += length
        self.v = [x + s * length for x, s in zip(self.v, slopes)]
        self.knots.append(self.q)
        self.seg.append(slopes)

    def fall_until_meet(self, falling: int, target: int) -> Fraction:
        """Let ``falling`` drop until it meets the rising ``target``; return the position."""
        gap = self.v[falling] - self.v[target]
        if gap < 0:
            raise BuildError(f"P_{falling + 1} below P_{target + 1} at q = {self.q}")
        self.advance(gap / self.n, falling)
        return self.q

    def system(self) -> NSystem:
        comps = []
        for j in range(self.n):
            comps.append(PiecewiseLinear.from_slopes(0, self.knots, [s[j] for s in self.seg]))
        return NSystem(self.n, self.q, tuple(comps))


def _epoch(tr: _Tracer, next_l: Fraction, epoch: int, sched: SwitchSchedule) -> None:
    # From l_i: top component falls, handing the role down to P_2, which then
    # meets P_1 at r_{i+1}; finally P_1 falls until l_{i+1}.
    n = tr.n
    ws = []
    for k in range(n - 1, 1, -1):
        ws.append(tr.fall_until_meet(k, k - 1))
    sched.w.append(ws)
    r = tr.fall_until_meet(1, 0)
    sched.r.append(r)
    if next_l < r:
        raise BuildError(f"epoch {epoch}: l_{epoch + 1} = {next_l} < r_{epoch + 1} = {r}")
    tr.advance(next_l - r, 0)


def build_max_system(n: int, l: Sequence) -> tuple[NSystem, SwitchSchedule]:
    """Maximal construction on ``[0, l[-1]]`` with one step per gap of ``l``.

    Step 0: ``P_1`` falls on ``[0, l_0]``; afterwards every step runs the
    same rule from ``l_i``.  Ties (``l_t = r_t``, or equal top components)
    produce zero-length falls and repeated switch positions, never an error;
    only ``l_{t} < r_{t}`` is rejected.
    """
    if n < 3:
        raise ValueError("the maximal construction needs n >= 3")
    l = [as_scalar(x) for x in l]
    if len(l) < 2:
        raise ValueError("need at least l_0 and l_1")
    if l[0] <= 0 or any(a >= b for a, b in zip(l, l[1:])):
        raise ValueError("l must be positive and strictly increasing")
    tr = _Tracer(n)
    sched = SwitchSchedule(n=n, l=list(l), r=[Fraction(0)], w=[])
    tr.advance(l[0], 0)
    for i in range(len(l) - 1):
        _epoch(tr, l[i + 1], i, sched)
    system = tr.system()
    sched.horizon = system.horizon
    return system, sched


@dataclass(frozen=True)
class AlternatingSpec:
    """Parameters of the alternating (zigzag) construction.

    ``D`` is the zigzag increment of the first intermediate phase; later
    phases use ``D * floor(q_{2k} / q_0)`` so every phase has about the same
    node count.
    Replay ``k`` (1-based) copies the ``[0, l_1]`` template with
    ``l_0' = G_k q_{2k-1}`` and ``l_1' = G_k**2 q_{2k-1}``, ``G_k = growth * k``.
    """

    n: int = 3
    D: Fraction = Fraction(1, 20)
    inner_epochs: int = 4
    phases: int = 3
    l0: Fraction = Fraction(1)
    growth: int = 100

    def check(self) -> None:
        if self.n != 3:
            raise BuildError("the alternating builder covers n = 3 only")
        if self.l0 <= 0 or self.D <= 0:
            raise BuildError("need l0 > 0 and D > 0")
        if self.D > self.l0 / 10:
            raise BuildError(f"D = {self.D} too large: need D <= l0/10 = {self.l0 / 10}")
        if self.inner_epochs < 1 or self.phases < 1:
            raise BuildError("need inner_epochs >= 1 and phases >= 1")
        if self.growth < 3:
            raise BuildError("growth must be >= 3 so replays end after their r")


def _ratio_gap(v: list[Fraction], q: Fraction) -> Fraction:
    # How far (P_1, P_2, P_3)(q)/q is from (-2, 1, 1).
    return max(v[0] / q + 2, 1 - v[1] / q, 1 - v[2] / q)


def build_alternating_system(spec: AlternatingSpec) -> tuple[NSystem, SwitchSchedule, list[PhaseMark]]:
    spec.check()
    D, l0 = as_scalar(spec.D), as_scalar(spec.l0)
    inner = default_lacunary(l0, spec.inner_epochs + 1)
    tr = _Tracer(3)
    sched = SwitchSchedule(n=3, l=list(inner), r=[Fraction(0)], w=[])
    tr.advance(inner[0], 0)
    for i in range(len(inner) - 1):
        _epoch(tr, inner[i + 1], i, sched)

    q0 = tr.q
    marks = [PhaseMark(Fraction(0), "maximal")]
    for k in range(1, spec.phases + 1):
        start = tr.q
        sched.boundary_eps.append(_ratio_gap(tr.v, start))
        scale = Fraction(math.floor(start / q0))
        Dk = D * scale
        marks.append(PhaseMark(start, "intermediate", scale))
        sched.zigzag_step.append(Dk)

        # P_1 rises throughout; P_3 falls onto P_2 at b_0.
        nodes = [tr.fall_until_meet(2, 1)]
        top = tr.v[1]
        # largest h with P(b_{h-1}) - Dk > 0, P(b_m) = top - m Dk / 2
        h = math.ceil(2 * top / Dk) - 2
        if h < 1:
            raise BuildError(f"phase {k}: D = {Dk} too large for P_2(b_0) = {top}")
        for _ in range(h):
            tr.advance(Dk / 2, 1)
            tr.advance(Dk / 2, 2)
            nodes.append(tr.q)
        if min(tr.v[1], tr.v[2]) <= 0:
            raise BuildError(f"phase {k}: zigzag left the positive half-plane")
        sched.b.append(nodes)
        qt = tr.q
        sched.qtilde.append(qt)
        sched.qtilde_ratio.append(max(abs(x) for x in tr.v) / qt)

        # P_2 falls onto P_1 at q_{2k-1}.
        q1 = tr.fall_until_meet(1, 0)
        G = spec.growth * k
        marks.append(PhaseMark(q1, "maximal", G))

        # Replay of step 0 on [q1, q1 + G^2 q1].
        tr.advance(G * q1, 0)
        tr.fall_until_meet(1, 0)
        tr.advance(q1 + G * G * q1 - tr.q, 0)
    sched.boundary_eps.append(_ratio_gap(tr.v, tr.q))
    system = tr.system()
    sched.phases = marks
    sched.horizon = system.horizon
    return system, sched, marks


def nsystem_targets(kind: str, n: int) -> tuple[list[Fraction], list[Fraction]]:
    """Limit constants (under, over) that the two constructions realize."""
    if n < 3:
        raise ValueError("targets are defined for n >= 3")
    half = Fraction(2 - n, 2)
    if kind == "maximal":
        return [Fraction(1 - n), half] + [Fraction(1)] * (n - 2), [half] + [Fraction(1)] * (n - 1)
    if kind == "alternating":
        return [Fraction(1 - n), half] + [Fraction(0)] * (n - 2), [Fraction(0)] + [Fraction(1)] * (n - 1)
    raise ValueError(f"unknown target kind {kind!r}")
