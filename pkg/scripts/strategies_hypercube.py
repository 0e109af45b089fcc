"""Best relative error per two-seed strategy on the B=8 hypercube, start at distance 7.

Usage: python3 scripts/strategies_hypercube.py [--B 8] [--xi 7] [--s-range auto|full]
"""

import argparse

from pdet.graphs import basis_state, named_graph
from pdet.report import ReportOptions, bound_report, strategy_table

REFERENCE = {"reg": 0.95, "alt": 0.77, "opp": 0.00, "opt": 0.66}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--B", type=int, default=8)
    ap.add_argument("--xi", type=int, default=7)
    ap.add_argument("--s-range", default="auto", choices=["auto", "full"])
    args = ap.parse_args()

    h = named_graph("hypercube", args.B)
    d = basis_state(h, "0" * args.B)
    psi = basis_state(h, "0" * (args.B - args.xi) + "1" * args.xi)
    rep = bound_report(h, d, psi, ReportOptions(s_range=args.s_range, methods=()))
    print(f"exact {rep.exact:.6f}  upper {rep.upper:.6f}  nu {rep.nu}")
    print(strategy_table(rep))
    if args.B == 8 and args.xi == 7:
        fixed = bound_report(h, d, psi, ReportOptions(methods=(), strategies=("opt",), opt_pairs=((17, 19),)))
        print(f"\nopt at (s1, s2) = (17, 19): delta {fixed.strategy_best['opt'].delta:.4f}")
        print("reference best delta:", ", ".join(f"{k} {v:.2f}" for k, v in REFERENCE.items()))


if __name__ == "__main__":
    main()
