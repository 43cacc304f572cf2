"""Compare the convolution-integral star product with the exact one.

    python3 scripts/star_product_check.py --pairs 50

Runs random two-qubit operator pairs on a few quadrature grids and reports
the largest pointwise deviation, plus the Moyal residual of the ground state.
"""

import argparse
import time

import numpy as np

from qetphase import phasespace as ps
from qetphase import qet


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=25)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    pairs = []
    for _ in range(args.pairs):
        A, B = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
        pt = ps.PhasePoint(tuple(rng.uniform(0, np.pi, 2)), tuple(rng.uniform(0, 2 * np.pi, 2)))
        pairs.append((ps.weyl_symbol(A), ps.weyl_symbol(B), pt))

    for nt, nph in [(2, 5), (3, 8), (4, 10)]:
        grid = ps.QuadratureGrid(2, nt, nph)
        t0 = time.perf_counter()
        err = max(abs(ps.star_product_integral(a, b, pt, grid) - ps.star_product_exact(a, b)(pt))
                  for a, b, pt in pairs)
        print(f"grid {nt}x{nph}: max |integral - exact| = {err:.2e}  ({time.perf_counter() - t0:.2f} s)")

    for h, k in [(0.25, 4), (1, 1), (4, 0.25)]:
        p = qet.ProtocolParams(h, k)
        res = ps.moyal_stationarity_residual(qet.ground_wigner(p), ps.weyl_symbol(qet.hamiltonian(p).H))
        print(f"Moyal residual of the ground state at h={h}, k={k}: {res:.2e}")


if __name__ == "__main__":
    main()
