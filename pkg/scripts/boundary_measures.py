"""Compare the boundary and interior measures on the moving arcs.

For each r this reports alpha, the two boundary curvature expectations, the
interior mean, and the dominance margins on both arcs.
"""

import argparse
from dataclasses import dataclass

from confpoly.crofton import Measure, kappa_bar, kappa_boundary
from confpoly.measures import SQRT2, mu_B_grid, mu_I_grid, nu_grids, stochastic_dominance


@dataclass
class Config:
    radii: tuple = (1.05, 1.1, 1.2, 1.3, 1.4, 1.5, 1.7, 1.9)
    grid_size: int = 1024


def main(cfg: Config):
    print(f"{'r':>5} {'alpha':>10} {'k_bnd':>10} {'k_int':>10} {'kbar':>10} {'cdf_viol':>10} {'mlr_viol':>10}")
    for r in cfg.radii:
        kbar = kappa_bar(r).value
        if r < SQRT2:
            b_ell, b_th = mu_B_grid(r, cfg.grid_size)
            i_ell, i_th = mu_I_grid(r, cfg.grid_size, b_ell.normalized_mass)
            reps = [stochastic_dominance(i_ell, b_ell), stochastic_dominance(i_th, b_th)]
            a = f"{b_ell.normalized_mass:10.7f}"
            kb, ki = kappa_boundary(r, Measure.MU_B).value, kappa_boundary(r, Measure.MU_I).value
        else:
            nb, ni = nu_grids(r, cfg.grid_size)
            reps = [stochastic_dominance(ni, nb)]
            a = f"{'-':>10}"
            kb, ki = kappa_boundary(r, Measure.NU_B).value, kappa_boundary(r, Measure.NU_I).value
        cdf = max(x.max_cdf_violation for x in reps)
        mlr = max(x.max_mlr_violation for x in reps)
        print(f"{r:5.2f} {a} {kb:10.6f} {ki:10.6f} {kbar:10.6f} {cdf:10.2e} {mlr:10.2e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--radii", type=float, nargs="+", default=list(Config.radii))
    p.add_argument("--grid-size", type=int, default=Config.grid_size)
    args = p.parse_args()
    main(Config(tuple(args.radii), args.grid_size))
