"""Deterministic SVG plots of systems, with schedule ticks and sample overlays."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .construct import SwitchSchedule
from .core import NSystem, as_scalar, evaluate

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class RenderSpec:
    """Plot ``P_j(q) * slope_scale`` against ``q`` on ``[0, q_max]``."""

    width: int = 800
    height: int = 500
    slope_scale: Fraction = Fraction(1, 2)
    labels: bool = True
    marks: bool = True
    q_max: Optional[Fraction] = None
    margin: int = 40

    def __post_init__(self):
        if not as_scalar(self.slope_scale) > 0:
            raise ValueError("slope_scale must be positive")
        if self.width <= 2 * self.margin or self.height <= 2 * self.margin:
            raise ValueError("canvas too small for its margins")


def _ticks(sched: SwitchSchedule, kind: Optional[str]) -> list[tuple[Fraction, str]]:
    out = [(v, f"l{i}") for i, v in enumerate(sched.l)]
    out += [(v, f"r{t}") for t, v in enumerate(sched.r) if t > 0]
    for i, ws in enumerate(sched.w):
        out += [(v, f"w{i}" if len(ws) == 1 else f"w{i}^{h + 1}") for h, v in enumerate(ws)]
    for k, nodes in enumerate(sched.b):
        out += [(nodes[0], f"b0[{k + 1}]"), (nodes[-1], f"bh[{k + 1}]")]
    out += [(v, f"q̃{k + 1}") for k, v in enumerate(sched.qtilde)]
    return out


def render_svg(s: NSystem, sched: Optional[SwitchSchedule] = None, spec: RenderSpec = RenderSpec(),
               overlay: Sequence = (), kind: Optional[str] = None) -> tuple[str, list[str]]:
    """Return ``(svg_text, warnings)``.

    ``overlay`` holds objects with ``q`` (float) and ``L`` (floats), such as
    lattice samples; those outside the plotted range are skipped with a
    warning.  Output depends only on the inputs.
    """
    q_hi = s.horizon if spec.q_max is None else min(as_scalar(spec.q_max), s.horizon)
    scale = as_scalar(spec.slope_scale)
    curves = []
    for c in s.components:
        pts = [(q, v * scale) for q, v in c.breakpoints if q <= q_hi]
        if pts[-1][0] < q_hi:
            pts.append((q_hi, evaluate(c, q_hi) * scale))
        curves.append(pts)
    warns: list[str] = []
    dots = []
    for smp in overlay:
        if not 0 <= smp.q <= float(q_hi):
            warns.append(f"overlay sample at q = {smp.q:.6g} outside [0, {float(q_hi):.6g}], skipped")
            continue
        dots.extend((smp.q, j, float(L) * float(scale)) for j, L in enumerate(smp.L))
    ys = [float(v) for pts in curves for _, v in pts] + [d[2] for d in dots]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1
    W, H, m = spec.width, spec.height, spec.margin
    qf = float(q_hi)

    def px(q) -> str:
        return f"{m + (W - 2 * m) * float(q) / qf:.2f}"

    def py(v) -> str:
        return f"{H - m - (H - 2 * m) * (float(v) - y_lo) / (y_hi - y_lo):.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>']
    if y_lo < 0 < y_hi:
        out.append(f'<line x1="{m}" y1="{py(0)}" x2="{W - m}" y2="{py(0)}" stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    if spec.marks and sched is not None:
        for q, label in _ticks(sched, kind):
            if not 0 <= q <= q_hi:
                continue
            out.append(f'<line x1="{px(q)}" y1="{H - m}" x2="{px(q)}" y2="{H - m + 6}" stroke="black"/>')
            if spec.labels:
                out.append(f'<text x="{px(q)}" y="{H - m + 18}" font-size="9" text-anchor="middle">{escape(label)}</text>')
    for j, pts in enumerate(curves):
        path = " ".join(f"{px(q)},{py(v)}" for q, v in pts)
        color = PALETTE[j % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        if spec.labels:
            q, v = pts[-1]
            out.append(f'<text x="{W - m + 4}" y="{py(v)}" font-size="11" fill="{color}">P{j + 1}</text>')
    for q, j, v in dots:
        out.append(f'<circle cx="{px(q)}" cy="{py(v)}" r="2.5" fill="{PALETTE[j % len(PALETTE)]}" fill-opacity="0.6"/>')
    if spec.labels:
        out.append(f'<text x="{W // 2}" y="{H - 4}" font-size="11" text-anchor="middle">q</text>')
        out.append(f'<text x="4" y="{m - 8}" font-size="11">P_j(q) x {escape(str(scale))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n", warns


def figure_shape(s: NSystem, sched: SwitchSchedule) -> dict[str, bool]:
    """Shape facts of a maximal build that its plot should show.

    ``one_falling``: every segment has exactly one falling component.
    ``top_minima_at_w``: on ``[0, l_last]`` the local minima of ``P_n`` are
    exactly the first cascade position ``w_i^1`` (where ``P_n`` meets
    ``P_{n-1}``) of each epoch in which ``P_n`` actually falls.
    """
    fall = s.falling_slope
    one = True
    top = s.components[-1]
    for _, _, right in s.sweep():
        if right is not None and sum(1 for x in right if x == fall) != 1:
            one = False
    end = sched.l[-1]
    minima = {top.breakpoints[k][0] for k in range(1, len(top.slopes))
              if top.slopes[k - 1] == fall and top.slopes[k] == 1 and top.breakpoints[k][0] <= end}
    expected = {ws[0] for i, ws in enumerate(sched.w) if ws and ws[0] > sched.l[i]}
    return {"one_falling": one, "top_minima_at_w": minima == expected and bool(expected)}
