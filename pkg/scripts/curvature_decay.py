"""sup |B_delta| away from the K-points as delta shrinks."""

import argparse

from bloch_topo.fields import canonical_potential, canonical_vector_potential
from bloch_topo.topology import curvature_decay_check


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--grid", type=int, default=16)
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.025])
    args = ap.parse_args()
    table = curvature_decay_check(canonical_potential(10.0), canonical_vector_potential(1.0), 1,
                                  args.eps, args.deltas, grid_n=args.grid)
    prev = None
    for d, b in table:
        ratio = "" if prev is None else f"  ratio {prev / b:.3f}"
        print(f"delta={d:<7g} sup|B|={b:.6e}{ratio}")
        prev = b


if __name__ == "__main__":
    main()
