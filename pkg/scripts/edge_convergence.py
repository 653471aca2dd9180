"""Edge flow and wall eigenvalues under zeta-grid and supercell (T) refinement."""

import argparse
import time

import numpy as np

from bloch_topo.edge import EdgeOperatorConfig, bulk_gap_window, edge_branches, node_spectrum
from bloch_topo.fields import canonical_potential, canonical_vector_potential
from bloch_topo.lattice import build_honeycomb_lattice, edge_frame

DELTA_SHARP = 3.526978093767573


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fraction", type=float, default=0.8)
    ap.add_argument("--grids", type=int, nargs="+", default=[48, 96])
    ap.add_argument("--Ts", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--zeta", type=float, default=1.0, help="zeta for the eigenvalue convergence table")
    args = ap.parse_args()
    V, A = canonical_potential(10.0), canonical_vector_potential(1.0)
    frame = edge_frame(build_honeycomb_lattice(), 1, 0)
    delta = args.fraction * DELTA_SHARP
    for N in args.grids:
        for T in args.Ts[:2]:
            t = time.perf_counter()
            spec = edge_branches(V, A, EdgeOperatorConfig(frame, delta, T=T), N)
            print(f"N={N:4d} T={T:3d} flow={spec.flow:+d} ({time.perf_counter() - t:.1f}s)")
    win = bulk_gap_window(V, A, delta, frame, args.zeta)
    prev = None
    for T in args.Ts:
        nd = node_spectrum(V, A, EdgeOperatorConfig(frame, delta, T=T), args.zeta, win)
        wall = np.array([v for v, tag in zip(nd.values, nd.tags) if tag == "wall"])
        diff = "" if prev is None or len(prev) != len(wall) else f" max change {np.max(np.abs(wall - prev)):.2e}"
        print(f"T={T:3d} wall eigenvalues {np.round(wall, 6)}{diff}")
        prev = wall


if __name__ == "__main__":
    main()
