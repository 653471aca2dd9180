"""Print the Dirac-point constants of the canonical fixture and their cutoff sensitivity."""

import argparse
import json

from bloch_topo.dirac_point import extract, w_matrix_elements
from bloch_topo.fields import canonical_potential, canonical_vector_potential


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[4, 6, 9])
    args = ap.parse_args()
    V, A = canonical_potential(10.0), canonical_vector_potential(1.0)
    for cb in args.cutoffs:
        d = extract(V, A, cutoff_box=cb)
        W = w_matrix_elements(d, A)
        print(json.dumps({
            "cutoff_box": cb, "waves": len(d.basis), "n": d.n, "E_star": d.E_star,
            "theta_star": d.theta_star, "nu_F": d.nu_F, "nu_star": [d.nu_star.real, d.nu_star.imag],
            "W_offdiag": float(abs(W[0, 1])),
        }))


if __name__ == "__main__":
    main()
