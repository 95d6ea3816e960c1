"""Curvature bounds at extreme confinement and the Fary-Milnor unknot certificate.

Knotting is never decided here. A polygon with total curvature below 4 pi is
certainly unknotted; anything else is only *possibly* knotted, which is why
the reported fraction is named ``frac_possibly_knotted``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crofton import Estimate, Method
from .geom import Polygon, edge_curvature, total_curvature
from .moduli import ConfinedRegionSpec, PolygonBatch, sample_confined, sample_loose, sample_unconfined, vertices_to_edges

FOUR_PI = 4.0 * np.pi
CERT_MARGIN = 1e-9


def unknot_certified(p: Polygon) -> bool:
    return total_curvature(p) < FOUR_PI - CERT_MARGIN


def _mean(values: np.ndarray, seed: int) -> Estimate:
    return Estimate(float(values.mean()), Method.MONTE_CARLO,
                    float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0,
                    len(values), seed)


def _frac(flags: np.ndarray, seed: int) -> Estimate:
    p = float(flags.mean())
    return Estimate(p, Method.MONTE_CARLO, float(np.sqrt(p * (1 - p) / len(flags))), len(flags), seed)


@dataclass(frozen=True)
class ProxyReport:
    n: int
    r: float
    samples: int
    mean_curvature: Estimate
    min_curvature: float
    max_curvature: float
    frac_possibly_knotted: Estimate
    seed: int
    region: str = "confined"

    def __post_init__(self):
        if not (0.0 <= self.frac_possibly_knotted.value <= 1.0):
            raise ValueError("fraction out of range")
        if self.min_curvature > self.mean_curvature.value + 1e-12:
            raise ValueError("minimum exceeds mean")


def proxy_report(batch: PolygonBatch, r: float, seed: int) -> ProxyReport:
    k = batch.curvature
    return ProxyReport(batch.n, r, len(k), _mean(k, seed), float(k.min()), float(k.max()),
                       _frac(k >= FOUR_PI - CERT_MARGIN, seed), seed, batch.meta.get("region", "confined"))


def confined_report(n: int, r: float, samples: int, seed: int) -> ProxyReport:
    return proxy_report(sample_confined(ConfinedRegionSpec(n, r), samples, seed), r, seed)


@dataclass(frozen=True)
class ExtremeReport:
    report: ProxyReport
    bound: float
    holds: bool


def extreme_confinement_check(n: int, samples: int, seed: int, tol: float = 1e-8) -> ExtremeReport:
    """Sample diameter-1 polygons and test the ``2 pi n / 3`` curvature floor.

    Diameter at most 1 caps every interior angle at 60 degrees, so each of the
    ``n`` turning angles is at least ``2 pi / 3``.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    rep = confined_report(n, 1.0, samples, seed)
    bound = 2.0 * np.pi * n / 3.0
    return ExtremeReport(rep, bound, rep.min_curvature >= bound - tol)


@dataclass(frozen=True)
class LooseReport:
    n: int
    epsilons: tuple
    reports: tuple
    max_deviation: tuple
    exponent: float


def loose_confinement_check(n: int, epsilons=(0.2, 0.1, 0.05, 0.025),
                            samples: int = 10_000, seed: int = 0) -> LooseReport:
    """Near-straight polygons: diameter at least ``n/2 - eps`` for each ``eps``.

    Reports ``max |kappa - 2 pi|`` per ``eps`` and the log-log slope of those
    maxima against ``eps``.
    """
    if n % 2 or n < 6:
        raise ValueError("n must be even and at least 6")
    eps = tuple(float(e) for e in epsilons)
    if any(not (0.0 < e <= 0.25) for e in eps):
        raise ValueError("epsilon must lie in (0, 0.25]")
    reports, devs = [], []
    for i, e in enumerate(eps):
        batch = sample_loose(n, n / 2 - e, samples, seed + i)
        reports.append(proxy_report(batch, n / 2 - e, seed + i))
        devs.append(float(np.abs(batch.curvature - 2 * np.pi).max()))
    slope = float(np.polyfit(np.log(eps), np.log(devs), 1)[0]) if len(eps) > 1 else float("nan")
    return LooseReport(n, eps, tuple(reports), tuple(devs), slope)


@dataclass(frozen=True)
class AsymptoteRow:
    n: int
    mean: Estimate
    predicted: float

    @property
    def deviation(self) -> float:
        return self.mean.value - self.predicted


def asymptote_check(n_list=(8, 16, 32, 64), samples: int = 100_000, seed: int = 0) -> list[AsymptoteRow]:
    """Mean unconfined curvature against the linear prediction ``pi n/2 + pi/4``."""
    rows = []
    for n in n_list:
        if n not in (8, 16, 32, 64):
            raise ValueError("n must be one of 8, 16, 32, 64")
        batch = sample_unconfined(n, samples, seed)
        k = edge_curvature(vertices_to_edges(batch.vertices()))
        rows.append(AsymptoteRow(n, _mean(k, seed), np.pi * n / 2 + np.pi / 4))
    return rows
