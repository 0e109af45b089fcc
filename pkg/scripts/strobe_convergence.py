"""Partial sums S_N against the exact P_det for a few periods, plus a trajectory check.

Usage: python3 scripts/strobe_convergence.py [--L 6] [--xi 1] [--trials 20000]
"""

import argparse

from pdet.detection import exact_pdet
from pdet.graphs import basis_state, named_graph
from pdet.spectral import eigendecompose, is_exceptional_tau, propagator
from pdet.stroboscopic import first_detection_amplitudes, sample_trajectories


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=6)
    ap.add_argument("--xi", type=int, default=1)
    ap.add_argument("--taus", type=float, nargs="+", default=[0.7, 1.0, 1.3, 3.14159265358979])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    h = named_graph("ring", args.L)
    dec = eigendecompose(h)
    d, psi = basis_state(h, 0), basis_state(h, args.xi)
    exact = exact_pdet(dec, d, psi)
    print(f"ring L={args.L}, xi={args.xi}: exact P_det = {exact:.6f}")
    print("tau        S_10    S_100   S_1000  S_N      MC       +-      exceptional")
    for tau in args.taus:
        u = propagator(dec, tau)
        s = first_detection_amplitudes(u, d, psi, args.n).partial_sums
        est = sample_trajectories(u, d, psi, args.n, args.trials, args.seed)
        exc = is_exceptional_tau(dec, tau)[0]
        picks = [s[min(k, len(s)) - 1] for k in (10, 100, 1000)]
        print(f"{tau:<9.4f}" + "".join(f"{x:8.4f}" for x in picks) + f"{s[-1]:9.5f}{est.fraction:9.5f}{est.stderr:8.5f}  {exc}")


if __name__ == "__main__":
    main()
