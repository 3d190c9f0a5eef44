"""Command-line front end: ``python -m nsystems <command> ...``.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure (an
invalid system, or estimates outside tolerance in ``check``), 3 build
failure, 4 uncertified minima while ``--require-certified`` is set.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import asymptotics as asy
from .construct import (AlternatingSpec, BuildError, ScheduleSpec, build_alternating_system,
                        build_max_system, nsystem_targets)
from .core import validate
from .formats import FormatError, dump_system, fmt_decimal, load_system, rat
from .lattice import (BoxParam, L_samples, XiVector, compare_to_system, default_x_max_rule,
                      liouville_xi, samples_from_csv, samples_to_csv)
from .render import RenderSpec, figure_shape, render_svg

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_BUILD, EXIT_UNCERTIFIED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _scalar(text: str) -> Fraction:
    # decimal literals such as 0.05 are read exactly
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _epoch_table(sched) -> str:
    rows = ["epoch  l_i                  r_i                  w_i"]
    for i, l in enumerate(sched.l):
        r = fmt_decimal(sched.r[i]) if i < len(sched.r) and i > 0 else "-"
        w = ", ".join(fmt_decimal(v) for v in sched.w[i]) if i < len(sched.w) else "-"
        rows.append(f"{i:<6} {fmt_decimal(l):<20} {r:<20} {w}")
    for k, p in enumerate(sched.phases):
        rows.append(f"phase {k}: {p.kind} from q = {fmt_decimal(p.q)} (scale {fmt_decimal(p.scale)})")
    return "\n".join(rows) + "\n"


def cmd_build(a) -> int:
    try:
        if a.kind == "maximal":
            l = ScheduleSpec(a.l0, a.growth, a.epochs, a.base).sequence()
            s, sched = build_max_system(a.n, l)
        else:
            spec = AlternatingSpec(n=a.n, D=a.D, inner_epochs=a.inner_epochs, phases=a.phases,
                                   l0=a.l0, growth=a.phase_growth)
            s, sched, _ = build_alternating_system(spec)
    except (BuildError, ValueError) as exc:
        print(f"build failed: {exc}", file=sys.stderr)
        return EXIT_BUILD
    _emit(dump_system(s, sched, a.kind), a.out)
    print(_epoch_table(sched), end="", file=sys.stdout if a.out else sys.stderr)
    return EXIT_OK


def _load(path: str):
    s, sched, kind = load_system(_read(path))
    return s, sched, kind


def _report_invalid(rep) -> None:
    for v in rep.violations[:20]:
        q = fmt_decimal(v.q) if v.q is not None else "-"
        print(f"violation {v.axiom} at q = {q} components {list(v.components)}: {v.detail}", file=sys.stderr)
    if len(rep.violations) > 20:
        print(f"... {len(rep.violations) - 20} more", file=sys.stderr)


def cmd_validate(a) -> int:
    s, sched, _ = _load(a.system)
    rep = validate(s, sched)
    if not rep.valid:
        _report_invalid(rep)
        print(f"invalid: axioms {sorted(rep.axioms())}")
        return EXIT_INVALID
    print(f"valid {s.n}-system on [0, {fmt_decimal(s.horizon)}], {len(s.knots())} knots")
    for f in rep.flags:
        print(f"note: {f}")
    return EXIT_OK


def default_tail(sched, kind: Optional[str]) -> Fraction:
    """``l_{ceil(E/2)}`` for maximal builds, the first replay start otherwise."""
    if kind == "alternating":
        starts = [p.q for p in sched.phases if p.kind == "maximal" and p.q > 0]
        if starts:
            return starts[0]
    return sched.l[math.ceil(sched.epochs / 2)]


def _est_lines(e) -> list[str]:
    return [f"under = ({', '.join(fmt_decimal(v) for v in e.under)})",
            f"over  = ({', '.join(fmt_decimal(v) for v in e.over)})"]


def _ineq_lines(rep) -> list[str]:
    out = [f"[{rep.branch}]"]
    for e in rep.entries:
        if e.satisfied is None:
            out.append(f"  {e.name}: indeterminate")
            continue
        out.append(f"  {e.name}: {fmt_decimal(e.lhs)} {e.relation} {fmt_decimal(e.rhs)}  "
                   f"slack {fmt_decimal(e.slack)}  {'ok' if e.satisfied else 'FAIL'}")
    out += [f"  note: {n}" for n in rep.notes]
    return out


def cmd_check(a) -> int:
    s, sched, kind = _load(a.system)
    rep = validate(s, sched)
    if not rep.valid:
        _report_invalid(rep)
        return EXIT_INVALID
    if sched is None and a.tail is None:
        raise FormatError("no schedule in file; pass --tail")
    targets_kind = a.targets or kind or "maximal"
    targets = nsystem_targets(targets_kind, s.n)
    tail = a.tail if a.tail is not None else default_tail(sched, kind)
    tol = a.tol if a.tol is not None else Fraction(1, 100)
    e = asy.estimate_phi(s, tail)
    err = e.error(targets)
    lines = [f"estimate on [{fmt_decimal(tail)}, {fmt_decimal(s.horizon)}], targets {targets_kind}", *_est_lines(e),
             f"max error {fmt_decimal(err)} (tol {fmt_decimal(tol)})"]
    ok = err <= tol
    result = {"tail_start": rat(tail), "under": [rat(v) for v in e.under], "over": [rat(v) for v in e.over],
              "error": rat(err), "tol": rat(tol)}
    if s.n == 3:
        lau = asy.check_laurent(e, tol)
        ss = asy.check_schmidt_summerer(e, tol)
        lines += ["laurent:", *_ineq_lines(lau), "schmidt-summerer:", *_ineq_lines(ss)]
        ok = ok and lau.ok and ss.ok
        result["laurent_ok"], result["schmidt_summerer_ok"], result["branch"] = lau.ok, ss.ok, ss.branch
    if sched is not None:
        try:
            conv = asy.convergence_report(s, sched, targets)
            lines.append("convergence: epoch  error")
            lines += [f"  {ep:>5}  {fmt_decimal(v)}" for ep, v in conv]
        except ValueError as exc:
            lines.append(f"convergence: {exc}")
    result["ok"] = ok
    lines.append("PASS" if ok else "FAIL")
    print("\n".join(lines))
    if a.out:
        _emit(json.dumps(result, indent=1) + "\n", a.out)
    return EXIT_OK if ok else EXIT_INVALID


def _T_list(a) -> list[Fraction]:
    if a.T:
        return [_scalar(t) for t in a.T.split(",")]
    lo, hi, per = a.T_decades
    # T = round(10^(k/per)) for k in [lo*per, hi*per], deduplicated
    out = []
    for k in range(int(lo * per), int(hi * per) + 1):
        t = Fraction(round(10 ** (k / per)))
        if t > 1 and (not out or t > out[-1]):
            out.append(t)
    return out


def cmd_minima(a) -> int:
    if a.xi:
        xi = XiVector.from_json(_read(a.xi))
    else:
        xi = liouville_xi(3, a.terms)
    rule = a.x_max if a.x_max is not None else default_x_max_rule(a.x_cap)
    samples = L_samples(xi, _T_list(a), rule)
    _emit(samples_to_csv(samples), a.out)
    full = sum(1 for smp in samples if smp.certified)
    first = sum(1 for smp in samples if smp.certified_count >= 1)
    print(f"{len(samples)} samples: {full} fully certified, {first} with lambda_1 certified",
          file=sys.stderr if not a.out else sys.stdout)
    if a.require_certified and full < len(samples):
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_render(a) -> int:
    s, sched, kind = _load(a.system)
    overlay = samples_from_csv(_read(a.overlay)) if a.overlay else ()
    spec = RenderSpec(width=a.width, height=a.height, slope_scale=a.slope_scale, labels=not a.no_labels,
                      marks=not a.no_marks, q_max=a.q_max)
    svg, warns = render_svg(s, sched, spec, overlay, kind)
    for w in warns:
        print(f"warning: {w}", file=sys.stderr)
    _emit(svg, a.out)
    if sched is not None and kind == "maximal":
        shape = figure_shape(s, sched)
        print("shape: " + ", ".join(f"{k}={v}" for k, v in shape.items()), file=sys.stderr)
    return EXIT_OK


def cmd_compare(a) -> int:
    import warnings

    s, _, _ = _load(a.system)
    samples = samples_from_csv(_read(a.samples))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dev, per = compare_to_system(samples, s)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    lines = ["q  max_j |P_j - L_j|"] + [f"{q:.6f}  {d:.6f}" for q, d in per]
    lines.append(f"max deviation {dev:.6f} (diagnostic only)")
    _emit("\n".join(lines) + "\n", a.out)
    if a.require_certified and any(not smp.certified for smp in samples):
        return EXIT_UNCERTIFIED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--tol", type=_scalar, default=None, help="tolerance, exact rational (default 1/100)")
    common.add_argument("--seed", type=int, default=None, help="reserved; every construction is deterministic")
    common.add_argument("--require-certified", action="store_true", help="exit 4 if any minima are uncertified")

    p = _Parser(prog="nsystems", description="Build, check and plot n-systems; compute lattice minima.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", parents=[common], help="build a maximal or alternating system")
    b.add_argument("kind", choices=["maximal", "alternating"])
    b.add_argument("--n", type=int, default=3)
    b.add_argument("--l0", type=_scalar, default=Fraction(1))
    b.add_argument("--epochs", type=int, default=14)
    b.add_argument("--growth", choices=["factorial", "exp"], default="factorial")
    b.add_argument("--base", type=int, default=10)
    b.add_argument("--D", type=_scalar, default=Fraction(1, 20))
    b.add_argument("--inner-epochs", type=int, default=4)
    b.add_argument("--phases", type=int, default=3)
    b.add_argument("--phase-growth", type=int, default=100)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("validate", parents=[common], help="run the axiom validator")
    v.add_argument("system")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check", parents=[common], help="estimate constants and check the inequalities")
    c.add_argument("system")
    c.add_argument("--targets", choices=["maximal", "alternating"])
    c.add_argument("--tail", type=_scalar)
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("minima", parents=[common], help="successive minima samples to CSV")
    m.add_argument("--terms", type=int, default=2)
    m.add_argument("--xi", help="XiVector JSON file instead of the series")
    m.add_argument("--T", help="comma-separated T values")
    m.add_argument("--T-decades", type=float, nargs=3, default=(1, 4, 4), metavar=("LO", "HI", "PER"),
                   help="T = round(10^(k/PER)) for LO <= k/PER <= HI")
    m.add_argument("--x-max", type=int, help="fixed search bound for every T")
    m.add_argument("--x-cap", type=int, default=2_000_000, help="cap for the default bound 10 T^2")
    m.set_defaults(func=cmd_minima)

    r = sub.add_parser("render", parents=[common], help="SVG plot of a system")
    r.add_argument("system")
    r.add_argument("--overlay", help="minima CSV to overlay")
    r.add_argument("--width", type=int, default=800)
    r.add_argument("--height", type=int, default=500)
    r.add_argument("--slope-scale", type=_scalar, default=Fraction(1, 2))
    r.add_argument("--q-max", type=_scalar)
    r.add_argument("--no-labels", action="store_true")
    r.add_argument("--no-marks", action="store_true")
    r.set_defaults(func=cmd_render)

    k = sub.add_parser("compare", parents=[common], help="deviation between a system and minima samples")
    k.add_argument("system")
    k.add_argument("samples")
    k.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        return a.func(a)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
