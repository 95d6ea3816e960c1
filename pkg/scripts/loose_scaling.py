"""Near-straight polygons: how fast total curvature approaches 2 pi.

Samples even-n polygons whose diameter is at least n/2 - eps and fits the
log-log slope of max |kappa - 2 pi| against eps.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from confpoly.knotproxy import loose_confinement_check


@dataclass
class Config:
    n: int = 6
    epsilons: tuple = (0.2, 0.1, 0.05, 0.025, 0.0125)
    samples: int = 10_000
    seed: int = 7


def main(cfg: Config):
    rep = loose_confinement_check(cfg.n, cfg.epsilons, cfg.samples, cfg.seed)
    print(f"n={cfg.n}, {cfg.samples} samples per eps")
    print(f"{'eps':>8} {'max|k-2pi|':>12} {'/sqrt(eps)':>12} {'max k':>10} {'accept':>8}")
    for e, d, r in zip(rep.epsilons, rep.max_deviation, rep.reports):
        print(f"{e:8.4f} {d:12.6f} {d / np.sqrt(e):12.6f} {r.max_curvature:10.5f} "
              f"{'<4pi' if r.max_curvature < 4 * np.pi else '>=4pi':>8}")
    print(f"log-log slope: {rep.exponent:.4f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=Config.n)
    p.add_argument("--epsilons", type=float, nargs="+", default=list(Config.epsilons))
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(a.n, tuple(a.epsilons), a.samples, a.seed))
