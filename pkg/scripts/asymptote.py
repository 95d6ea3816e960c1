"""Mean total curvature of unconfined polygons against the linear prediction.

Reports the Monte Carlo mean, its standard error and the offset from
pi n/2 + pi/4; a least-squares fit of mean - pi n/2 is printed at the end.
"""

import argparse
from dataclasses import dataclass

import numpy as np

from confpoly.knotproxy import asymptote_check


@dataclass
class Config:
    n_list: tuple = (8, 16, 32, 64)
    samples: int = 100_000
    seed: int = 7


def main(cfg: Config):
    rows = asymptote_check(cfg.n_list, cfg.samples, cfg.seed)
    print(f"{'n':>4} {'mean':>12} {'se':>8} {'predicted':>12} {'deviation':>10}")
    for row in rows:
        print(f"{row.n:4d} {row.mean.value:12.5f} {row.mean.std_error:8.4f} "
              f"{row.predicted:12.5f} {row.deviation:10.4f}")
    offset = np.array([r.mean.value - np.pi * r.n / 2 for r in rows])
    w = 1 / np.array([r.mean.std_error for r in rows]) ** 2
    print(f"weighted mean offset: {np.dot(w, offset) / w.sum():.4f} "
          f"(pi/4 = {np.pi / 4:.4f}, 3pi/8 = {3 * np.pi / 8:.4f})")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, nargs="+", default=list(Config.n_list), dest="n_list")
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(tuple(a.n_list), a.samples, a.seed))
