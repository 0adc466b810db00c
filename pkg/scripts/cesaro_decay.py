"""Window-truncation decay of scalar multipliers across trees and orders.

Prints the error ||M_(p_n phi) f - M_phi f|| for the triangular window of
each order, on an isometric chain and on the two-ray tree, together with the
compressed norm estimates that witness the domination of the window.

Usage: python scripts/cesaro_decay.py [--orders 2 4 8 16 32 64]
"""

from __future__ import annotations

import argparse

import numpy as np

import treeshift as ts
from treeshift._util import stable_rng


def run_case(label: str, S, basis, phi, orders, vecs, seed: int) -> None:
    rep = ts.cesaro_convergence_experiment(S, basis, phi, orders, vecs, seed=seed)
    print(f"-- {label} (working depth {rep.working_depth}, "
          f"full norm estimate {rep.full_norm_estimate:.6f})")
    for vid in range(len(vecs)):
        errs = rep.errors_for(vid)
        cells = "  ".join(f"{n}:{errs[n]:.3e}" for n in orders)
        print(f"   vector {vid}: {cells}")
    doms = "  ".join(f"{n}:{rep.norm_estimates[n]:.6f}" for n in orders)
    print(f"   window norm estimates: {doms}")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--orders", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    chain, wc = ts.generate_example("UNILATERAL", 16, [1.0] * 16)
    Sc = ts.ShiftOperator(chain, wc)
    bc = ts.separated_kernel_basis(Sc)
    geom = ts.ScalarSymbol(0.5 ** np.arange(10))
    run_case("isometric chain, geometric symbol", Sc, bc, geom, args.orders,
             [ts.L2Vector.basis(chain, chain.root)], args.seed)

    tree, w = ts.generate_example("T2", 14, [0.5])
    S = ts.ShiftOperator(tree, w)
    basis = ts.separated_kernel_basis(S)
    phi = ts.ScalarSymbol(0.25 ** np.arange(6))
    rng = stable_rng(args.seed, "cesaro-script")
    f_depth = tree.depth - (phi.length - 1) - basis.max_generation
    vecs = [ts.L2Vector.random(tree, f_depth, rng) for _ in range(2)]
    run_case("two-ray tree, quarter-geometric symbol", S, basis, phi,
             args.orders, vecs, args.seed)


if __name__ == "__main__":
    main()
