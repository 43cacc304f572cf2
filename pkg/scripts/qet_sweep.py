"""Teleported energy and entanglement over an (h, k) grid.

    python3 scripts/qet_sweep.py --n 9 --out sweep.csv

Prints E_B/E_A efficiency and the share of ground-state negativity consumed.
"""

import argparse
import csv
import sys

import numpy as np

from qetphase import qet


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=0.25)
    ap.add_argument("--hi", type=float, default=4.0)
    ap.add_argument("--n", type=int, default=7, help="points per axis (log spaced)")
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args(argv)

    axis = np.geomspace(args.lo, args.hi, args.n)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["h", "k", "E_A", "E_B", "efficiency", "neg_ground", "neg_final", "max_residual"])
    best = None
    for h in axis:
        for k in axis:
            rep = qet.run_protocol(qet.ProtocolParams(h, k))
            eff = rep.E_B.value / rep.E_A.value
            w.writerow([f"{x:.10g}" for x in (h, k, rep.E_A.value, rep.E_B.value, eff,
                                               rep.negativity["ground"].value,
                                               rep.negativity["post_feedback"].value, rep.max_residual)])
            if best is None or rep.E_B.value > best[2]:
                best = (h, k, rep.E_B.value)
    if args.out:
        out.close()
    print(f"largest E_B on the grid: {best[2]:.6g} at h={best[0]:.4g}, k={best[1]:.4g}", file=sys.stderr)


if __name__ == "__main__":
    main()
