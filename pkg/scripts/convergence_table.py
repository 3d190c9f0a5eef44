"""Print the per-epoch convergence of the finite-horizon constants.

    python3 scripts/convergence_table.py [--epochs 15] [--n 3]
"""

import argparse
from fractions import Fraction

from nsystems.asymptotics import convergence_report, estimate_phi
from nsystems.construct import AlternatingSpec, build_alternating_system, build_max_system, lacunary, nsystem_targets


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--epochs", type=int, default=15)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--growth", choices=["factorial", "exp"], default="factorial")
    args = ap.parse_args()

    s, sched = build_max_system(args.n, lacunary(Fraction(1), args.epochs, args.growth))
    targets = nsystem_targets("maximal", args.n)
    print(f"maximal n={args.n}, {args.epochs} terms ({args.growth})")
    print(f"{'epoch':>5} {'error':>10} {'epoch*error':>12}")
    for epoch, err in convergence_report(s, sched, targets):
        print(f"{epoch:>5} {float(err):>10.5f} {float(err * epoch):>12.4f}")
    for i in range(1, len(sched.l) - 1):
        e = estimate_phi(s, sched.l[i])
        print(f"tail l_{i:<2} error {float(e.error(targets)):.5f}")

    if args.n == 3:
        s, sched, marks = build_alternating_system(AlternatingSpec())
        tail = next(m.q for m in marks if m.kind == "maximal" and m.q > 0)
        e = estimate_phi(s, tail)
        print(f"alternating default: error {float(e.error(nsystem_targets('alternating', 3))):.5f}")
        print("  under", [f"{float(v):.4f}" for v in e.under])
        print("  over ", [f"{float(v):.4f}" for v in e.over])


if __name__ == "__main__":
    main()
