"""Rescaled edge branches near the Dirac point against the effective Dirac family."""

import argparse

import numpy as np

from bloch_topo.dirac1d import DiracFamilyConfig, edge_near_dirac, edge_vs_effective
from bloch_topo.dirac_point import extract
from bloch_topo.edge import DomainWall, EdgeOperatorConfig, default_T
from bloch_topo.fields import canonical_potential, canonical_vector_potential
from bloch_topo.lattice import build_honeycomb_lattice, edge_frame

DELTA_SHARP = 3.526978093767573


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.2, 0.1])
    ap.add_argument("--mus", type=float, nargs="+", default=[-1, -0.5, -0.25, 0.25, 0.5, 1])
    ap.add_argument("--cutoff-box", type=int, default=4)
    ap.add_argument("--T-factor", type=int, default=4)
    args = ap.parse_args()
    V, A = canonical_potential(10.0), canonical_vector_potential(1.0)
    frame = edge_frame(build_honeycomb_lattice(), 1, 0)
    d = extract(V, A)
    fam = DiracFamilyConfig.from_dirac(d, frame)
    for frac in args.fractions:
        delta = frac * DELTA_SHARP
        T = args.T_factor * default_T(DomainWall(), delta)
        cfg = EdgeOperatorConfig(frame, delta, T=T, cutoff_box=args.cutoff_box)
        r = edge_vs_effective(edge_near_dirac(V, A, cfg, d.E_star, args.mus), fam, delta,
                              frame.zeta_star, d.E_star)
        print(f"delta={delta:.4f} T={T} max_dev={r.max_deviation:.4f} counts_match={r.counts_match} "
              f"slopes {r.edge_slope:.3f} / {r.dirac_slope:.3f}")
        for mu, ez, dz, w in zip(r.mus, r.edge_z, r.dirac_z, r.windows):
            print(f"  mu={mu:+.2f} edge={np.round(ez, 3)} dirac={np.round(dz, 3)} window=({w[0]:.2f}, {w[1]:.2f})")


if __name__ == "__main__":
    main()
