"""JSON persistence for systems and schedules, plus decimal display of rationals.

Rationals are written as ``"p/q"`` strings so a round trip is bit-exact.
"""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from .construct import PhaseMark, SwitchSchedule
from .core import NSystem, PiecewiseLinear, as_scalar


class FormatError(ValueError):
    """Malformed persisted data."""


def rat(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s) -> Fraction:
    if not isinstance(s, str):
        raise FormatError(f"expected a 'p/q' string, got {s!r}")
    try:
        return as_scalar(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad rational {s!r}") from exc


def fmt_decimal(x: Fraction, digits: int = 12) -> str:
    """``digits`` significant digits; a trailing ``~`` marks a rounded value."""
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
    d = d.normalize()
    small = d != 0 and abs(d) < Decimal("1e-6")
    text = format(d, "e" if small or abs(d) >= Decimal(10) ** digits else "f")
    return text if Fraction(d) == x else text + "~"


def schedule_to_dict(sched: SwitchSchedule, kind: str = "maximal") -> dict:
    d = {
        "kind": kind,
        "n": sched.n,
        "l": [rat(v) for v in sched.l],
        "r": [rat(v) for v in sched.r],
        "w": [[rat(v) for v in ws] for ws in sched.w],
    }
    if sched.horizon is not None:
        d["horizon"] = rat(sched.horizon)
    if sched.phases:
        d["phases"] = [{"q": rat(p.q), "kind": p.kind, "scale": rat(Fraction(p.scale))} for p in sched.phases]
        d["b"] = [[rat(v) for v in nodes] for nodes in sched.b]
        d["qtilde"] = [rat(v) for v in sched.qtilde]
        d["zigzag_step"] = [rat(v) for v in sched.zigzag_step]
        d["qtilde_ratio"] = [rat(v) for v in sched.qtilde_ratio]
        d["boundary_eps"] = [rat(v) for v in sched.boundary_eps]
    return d


def schedule_from_dict(d: dict) -> tuple[SwitchSchedule, str]:
    try:
        sched = SwitchSchedule(
            n=int(d["n"]),
            l=[parse_rat(v) for v in d["l"]],
            r=[parse_rat(v) for v in d["r"]],
            w=[[parse_rat(v) for v in ws] for ws in d["w"]],
            phases=[PhaseMark(parse_rat(p["q"]), p["kind"], parse_rat(p["scale"])) for p in d.get("phases", [])],
            b=[[parse_rat(v) for v in nodes] for nodes in d.get("b", [])],
            qtilde=[parse_rat(v) for v in d.get("qtilde", [])],
            zigzag_step=[parse_rat(v) for v in d.get("zigzag_step", [])],
            qtilde_ratio=[parse_rat(v) for v in d.get("qtilde_ratio", [])],
            boundary_eps=[parse_rat(v) for v in d.get("boundary_eps", [])],
            horizon=parse_rat(d["horizon"]) if "horizon" in d else None,
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad schedule: {exc}") from exc
    return sched, d.get("kind", "maximal")


def system_to_dict(s: NSystem) -> dict:
    return {
        "n": s.n,
        "horizon": rat(s.horizon),
        "components": [
            {"breakpoints": [[rat(q), rat(v)] for q, v in c.breakpoints], "slopes": [rat(m) for m in c.slopes]}
            for c in s.components
        ],
    }


def system_from_dict(d: dict) -> NSystem:
    try:
        comps = []
        for c in d["components"]:
            bps = tuple((parse_rat(q), parse_rat(v)) for q, v in c["breakpoints"])
            comps.append(PiecewiseLinear(bps, tuple(parse_rat(m) for m in c["slopes"])))
        return NSystem(int(d["n"]), parse_rat(d["horizon"]), tuple(comps))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad system: {exc}") from exc


def dump_system(s: NSystem, sched: Optional[SwitchSchedule] = None, kind: str = "maximal") -> str:
    d = system_to_dict(s)
    if sched is not None:
        d["schedule"] = schedule_to_dict(sched, kind)
    return json.dumps(d, separators=(",", ":"))


def load_system(text: str) -> tuple[NSystem, Optional[SwitchSchedule], Optional[str]]:
    """Parse system JSON; the schedule and its kind are ``None`` when absent."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise FormatError("top level must be an object")
    s = system_from_dict(d)
    if "schedule" in d:
        sched, kind = schedule_from_dict(d["schedule"])
        return s, sched, kind
    return s, None, None
