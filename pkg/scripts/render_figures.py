"""Write SVG plots of a maximal and an alternating system into a directory.

    python3 scripts/render_figures.py [outdir]
"""

import sys
from fractions import Fraction
from pathlib import Path

from nsystems.construct import AlternatingSpec, build_alternating_system, build_max_system, default_lacunary
from nsystems.render import RenderSpec, figure_shape, render_svg


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
    out.mkdir(parents=True, exist_ok=True)

    s, sched = build_max_system(3, default_lacunary(1, 6))
    svg, _ = render_svg(s, sched, RenderSpec(q_max=Fraction(200)))
    (out / "maximal.svg").write_text(svg)
    print("maximal.svg", figure_shape(s, sched))

    s, sched, _ = build_alternating_system(AlternatingSpec(inner_epochs=2, phases=1, D=Fraction(1, 10)))
    svg, warns = render_svg(s, sched, RenderSpec(), kind="alternating")
    (out / "alternating.svg").write_text(svg)
    print("alternating.svg", *warns)


if __name__ == "__main__":
    main()
