"""Estimate the gap-closing strength delta-sharp and print the scanned gap profile."""

import argparse

from bloch_topo.bloch import estimate_delta_sharp
from bloch_topo.fields import canonical_potential, canonical_vector_potential


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=0.1)
    ap.add_argument("--grid", type=int, default=12)
    ap.add_argument("--cutoff-box", type=int, default=6)
    args = ap.parse_args()
    est = estimate_delta_sharp(canonical_potential(10.0), canonical_vector_potential(1.0), 1,
                               step=args.step, grid_n=args.grid, cutoff_box=args.cutoff_box)
    for d, g in est.scan:
        print(f"{d:6.2f}  {g:.6f}")
    print(f"delta_sharp = {est.delta_sharp:.12f} at xi = {est.xi_closing}, gap {est.gap_at_closing:.2e}")


if __name__ == "__main__":
    main()
