"""Wehrl entropy of qubit B through the protocol.

    python3 scripts/entropy_chain.py --h 1 --k-max 4 --n 9

For each k the three stage entropies are compared with the one-qubit
formula evaluated at the reduced Bloch length, plus the arctan expression
for the ground stage.
"""

import argparse

import numpy as np

from qetphase import husimi as hu
from qetphase import opscore as ops
from qetphase import qet


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=1.0)
    ap.add_argument("--k-max", type=float, default=4.0)
    ap.add_argument("--n", type=int, default=9)
    args = ap.parse_args(argv)

    print(f"bounds: {hu.LOWER_BOUND:.10f} <= S <= {hu.UPPER_BOUND:.10f}")
    print(f"{'k':>8} {'S_ground':>13} {'S_post':>13} {'S_final':>13} {'|S-formula|':>12} {'arctan form':>13}")
    for k in np.linspace(0.0, args.k_max, args.n):
        p = qet.ProtocolParams(args.h, float(k), limit_mode=True)
        rep = hu.entropy_chain(p)
        worst = 0.0
        for s, stage in zip(rep.entropies(), qet.run_stages(p)):
            r = np.linalg.norm(ops.bloch_vector(ops.partial_trace(stage.rho, keep=1)))
            worst = max(worst, abs(s - hu.wehrl_entropy_qubit(r)))
        print(f"{k:8.3f} {rep.S_ground:13.10f} {rep.S_post_measurement:13.10f} "
              f"{rep.S_post_feedback:13.10f} {worst:12.2e} {rep.closed_form_value:13.6f}")


if __name__ == "__main__":
    main()
