"""Sweep T over decades and print L_j(q)/q from the lattice oracle.

    python3 scripts/minima_sweep.py [--terms 2] [--hi 8] [--per 2] [--csv out.csv]
"""

import argparse

from nsystems.lattice import L_samples, default_x_max_rule, liouville_xi, samples_to_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--terms", type=int, default=2)
    ap.add_argument("--lo", type=int, default=1)
    ap.add_argument("--hi", type=int, default=8)
    ap.add_argument("--per", type=int, default=2)
    ap.add_argument("--cap", type=int, default=2_000_000)
    ap.add_argument("--csv")
    args = ap.parse_args()

    xi = liouville_xi(3, args.terms)
    Ts = sorted({round(10 ** (k / args.per)) for k in range(args.lo * args.per, args.hi * args.per + 1)})
    samples = L_samples(xi, Ts, default_x_max_rule(args.cap))
    print(f"{'T':>12} {'L1/q':>8} {'L2/q':>8} {'L3/q':>8} certified")
    for smp in samples:
        ratios = " ".join(f"{v / smp.q:8.4f}" for v in smp.L)
        print(f"{str(smp.T):>12} {ratios} {smp.certified_count}/3")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(samples_to_csv(samples))


if __name__ == "__main__":
    main()
