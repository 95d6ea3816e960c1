"""Expected curvature of confined quadrilaterals and the Crofton identity.

All quadrature lives in the ``(ell, theta in [0, pi])`` chart with the flat
measure ``d ell d theta``. The identity being checked is

    d kbar/dr = (kappa_boundary - kbar) * area'(r) / area(r),

where ``kappa_boundary`` is the curvature expectation under the shell measure
(``mu_B`` below ``sqrt(2)``, ``nu_B`` above).
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geom import quad_curvature
from .measures import (
    SQRT2, ArcKind, RegimeError, alpha, dtheta_max_dr, ell_arc_end, ell_arc_mass_I,
    ell_min, mu_I_density, nu_I_density, swapped_arc_end, theta_arc_end,
    theta_arc_mass_B, theta_max, _check_mu_regime, _check_nu_regime,
)
from .moduli import ConfinedRegionSpec, sample_confined, theta_cut
from .quadrature import integrate, panel_nodes

DEFAULT_TOL = 1e-9
MONOTONE_TOL = 1e-6


class Method(enum.Enum):
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


class Measure(enum.Enum):
    MU_B = "mu_B"
    MU_I = "mu_I"
    NU_B = "nu_B"
    NU_I = "nu_I"


@dataclass(frozen=True)
class Estimate:
    """A numeric result with provenance.

    For quadrature, ``std_error`` is 0 and ``refinement_delta`` holds the last
    change under panel doubling; for Monte Carlo it is the standard error of
    the mean.
    """

    value: float
    method: Method
    std_error: float = 0.0
    samples: int = 0
    seed: int | None = None
    refinement_delta: float = 0.0

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")
        if self.method is Method.MONTE_CARLO and (self.samples < 1 or self.seed is None):
            raise ValueError("Monte Carlo estimates need samples >= 1 and a seed")

    @property
    def error(self) -> float:
        return self.std_error if self.method is Method.MONTE_CARLO else self.refinement_delta


def _check_r(r: float):
    if not (1.0 <= r <= 2.0):
        raise ValueError(f"r must lie in [1, 2], got {r}")


def _ell_segments(r: float):
    """Pieces of ``[0, min(r, 2)]`` on which ``theta_max(., r)`` is smooth."""
    top = min(r, 2.0)
    star = np.sqrt(max(4.0 - r * r, 0.0))
    if 0.0 < star < top:
        return [(0.0, star), (star, top)]
    return [(0.0, top)]


def _double_integral(r, f, upper, segments, panels):
    total = 0.0
    for a, b in segments:
        ell, w_ell = panel_nodes(a, b, panels, singular="both")
        top = upper(ell)
        u, w_u = panel_nodes(0.0, 1.0, panels, singular="right")
        theta = top[:, None] * u[None, :]
        inner = (f(ell[:, None], theta) * w_u[None, :]).sum(axis=1) * top
        total += float(np.dot(w_ell, inner))
    return total


def _refine(compute, tol):
    prev = compute(1)
    panels = 2
    while True:
        val = compute(panels)
        delta = abs(val - prev)
        if delta < tol or panels >= 64:
            return val, delta
        prev = val
        panels *= 2


def area_region(r: float, tol: float = 1e-13) -> float:
    """Chart area of the confined quadrilaterals, ``int theta_max(ell, r) d ell``."""
    _check_r(r)
    return sum(integrate(lambda l: theta_max(l, r), a, b, "both", tol)[0]
               for a, b in _ell_segments(r))


def _kappa_bar_quadrature(r: float, tol: float) -> Estimate:
    segs = _ell_segments(r)
    upper = lambda l: theta_max(l, r)
    num, dn = _refine(lambda p: _double_integral(r, quad_curvature, upper, segs, p), tol)
    area = area_region(r)
    return Estimate(num / area, Method.QUADRATURE, refinement_delta=dn / area)


def kappa_bar_swapped(r: float, tol: float = DEFAULT_TOL) -> Estimate:
    """Mean curvature over the half-chart ``d(v1, v3) >= d(v2, v4)``, ``ell <= r``."""
    _check_r(r)
    segs = [(0.0, SQRT2), (SQRT2, r)] if r > SQRT2 else [(0.0, r)]
    num, dn = _refine(lambda p: _double_integral(r, quad_curvature, theta_cut, segs, p), tol)
    one = lambda l, t: np.ones_like(t)
    area, da = _refine(lambda p: _double_integral(r, one, theta_cut, segs, p), 1e-13)
    return Estimate(num / area, Method.QUADRATURE, refinement_delta=dn / area + da)


def kappa_bar(r: float, method: Method | str = Method.QUADRATURE, budget: int = 100_000,
              seed: int | None = None, tol: float = DEFAULT_TOL) -> Estimate:
    """Expected total curvature of quadrilaterals with diameter at most ``r``."""
    _check_r(r)
    method = Method(method)
    if method is Method.QUADRATURE:
        return _kappa_bar_quadrature(r, tol)
    seed = 0 if seed is None else seed
    batch = sample_confined(ConfinedRegionSpec(4, r), budget, seed)
    k = batch.curvature
    return Estimate(float(k.mean()), Method.MONTE_CARLO, float(k.std(ddof=1) / np.sqrt(len(k))),
                    len(k), seed)


def _integral(f, a, b, singular, tol=1e-13):
    return integrate(f, a, b, singular, tol)


def kappa_boundary(r: float, measure: Measure | str, tol: float = 1e-12) -> Estimate:
    """Curvature expectation under a normalized boundary measure."""
    measure = Measure(measure)
    if measure in (Measure.MU_B, Measure.MU_I):
        _check_mu_regime(r)
    else:
        _check_nu_regime(r)

    if measure is Measure.MU_B:
        top = ell_arc_end(r)
        e_ell, d1 = _integral(lambda th: quad_curvature(r, th), 0.0, top, "both", tol)
        end = theta_arc_end(r)
        e_th, d2 = _integral(lambda l: quad_curvature(l, theta_max(l, r)) * dtheta_max_dr(l, r),
                             0.0, end, "right", tol)
        m_th, d3 = theta_arc_mass_B(r)
        value = (e_ell + e_th) / (top + m_th)
        return Estimate(value, Method.QUADRATURE, refinement_delta=d1 + d2 + d3)

    if measure is Measure.MU_I:
        a = alpha(r)
        top = ell_arc_end(r)
        kink = min(theta_max(0.0, r), top)
        dens = mu_I_density(ArcKind.ELL_ARC, r)
        f = lambda th: quad_curvature(r, th) * dens(th)
        n1, d1 = _integral(f, 0.0, kink, None, tol)
        n2, d2 = _integral(f, kink, top, "left", tol)
        m_ell, d3 = ell_arc_mass_I(r)
        end = theta_arc_end(r)
        g = lambda l: quad_curvature(l, theta_max(l, r)) * theta_max(l, r)
        n3, d4 = _integral(g, 0.0, end, "right", tol)
        m_th, d5 = _integral(lambda l: theta_max(l, r), 0.0, end, "right", tol)
        value = a * (n1 + n2) / m_ell + (1.0 - a) * n3 / m_th
        return Estimate(value, Method.QUADRATURE, refinement_delta=d1 + d2 + d3 + d4 + d5)

    top = swapped_arc_end(r)
    if measure is Measure.NU_B:
        n, d1 = _integral(lambda th: quad_curvature(r, th), 0.0, top, "both", tol)
        return Estimate(n / top, Method.QUADRATURE, refinement_delta=d1)
    dens = nu_I_density(r)
    n, d1 = _integral(lambda th: quad_curvature(r, th) * dens(th), 0.0, top, "both", tol)
    m, d2 = _integral(dens, 0.0, top, "both", tol)
    return Estimate(n / m, Method.QUADRATURE, refinement_delta=d1 + d2)


def boundary_measure_for(r: float) -> Measure:
    return Measure.MU_B if r < SQRT2 else Measure.NU_B


@dataclass(frozen=True)
class CroftonTerms:
    r: float
    h: float
    fd: float
    rhs: float
    kappa_bar: float
    kappa_boundary: float
    area: float
    area_prime: float

    @property
    def residual(self) -> float:
        return abs(self.fd - self.rhs)


def crofton_terms(r: float, h: float = 1e-3, tol: float = DEFAULT_TOL) -> CroftonTerms:
    if not (1.0 + h <= r <= 2.0 - h):
        raise ValueError("central differences need [r - h, r + h] inside [1, 2]")
    kb = kappa_bar(r, tol=tol).value
    fd = (kappa_bar(r + h, tol=tol).value - kappa_bar(r - h, tol=tol).value) / (2 * h)
    area = area_region(r)
    area_prime = (area_region(r + h) - area_region(r - h)) / (2 * h)
    kbd = kappa_boundary(r, boundary_measure_for(r)).value
    rhs = (kbd - kb) * area_prime / area
    return CroftonTerms(r, h, fd, rhs, kb, kbd, area, area_prime)


def crofton_residual(r: float, h: float = 1e-3) -> float:
    """``|finite-difference d kbar/dr - Crofton right-hand side|``."""
    return crofton_terms(r, h).residual


@dataclass
class CurvatureCurve:
    r_values: np.ndarray
    kappa_bar: list
    area: np.ndarray
    kappa_B: np.ndarray
    crofton_residual: np.ndarray

    def __post_init__(self):
        n = len(self.r_values)
        if not (len(self.kappa_bar) == len(self.area) == len(self.kappa_B)
                == len(self.crofton_residual) == n):
            raise ValueError("curve columns must be aligned")
        if np.any(np.diff(self.r_values) <= 0):
            raise ValueError("r values must be strictly increasing")


@dataclass(frozen=True)
class ScanVerdict:
    passed: bool
    worst_increase: float
    tolerance: float
    details: list = field(default_factory=list)


def _curve_point(r: float, h: float, tol: float):
    kb = kappa_bar(r, tol=tol)
    area = area_region(r)
    kbd = kappa_boundary(r, boundary_measure_for(r)).value
    if 1.0 + h <= r <= 2.0 - h:
        res = crofton_terms(r, h, tol).residual
    else:
        res = float("nan")
    return kb, area, kbd, res


def monotonicity_scan(r_grid, h: float = 1e-3, tol: float = DEFAULT_TOL,
                      workers: int = 1) -> tuple[CurvatureCurve, ScanVerdict]:
    """Quadrature curve of ``kbar`` and a non-increase verdict.

    Points are independent, so ``workers > 1`` evaluates them concurrently;
    results are identical for any worker count.
    """
    r = np.asarray(sorted(float(x) for x in r_grid))
    for x in r:
        _check_r(x)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            pts = list(pool.map(lambda x: _curve_point(x, h, tol), r))
    else:
        pts = [_curve_point(x, h, tol) for x in r]
    kb = [p[0] for p in pts]
    curve = CurvatureCurve(r, kb, np.array([p[1] for p in pts]),
                           np.array([p[2] for p in pts]), np.array([p[3] for p in pts]))
    worst, ok, details = 0.0, True, []
    for i in range(1, len(kb)):
        rise = kb[i].value - kb[i - 1].value
        allowed = MONOTONE_TOL + kb[i].refinement_delta + kb[i - 1].refinement_delta
        worst = max(worst, rise)
        if rise > allowed:
            ok = False
            details.append((float(r[i - 1]), float(r[i]), rise, allowed))
    return curve, ScanVerdict(ok, worst, MONOTONE_TOL, details)
