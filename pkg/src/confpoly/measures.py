"""Boundary arcs of the confined quadrilateral chart and their measures.

For ``1 <= r <= 2`` the confined chart is ``{ell <= r, d(v2, v4) <= r}`` with
``theta`` in ``[0, pi]``. Growing ``r`` moves two arcs: the *ell arc*
``ell = r`` (parametrised by ``theta``) and the *theta arc*
``d(v2, v4) = r`` (parametrised by ``ell``). The half-chart where
``d(v1, v3) >= d(v2, v4)`` has a single moving arc, the *section-7 arc*
``ell = r`` restricted to ``theta <= theta_cut(r)``.

On these arcs live four measures:

* ``mu_B`` - the limit of uniform measure on thin shells (boundary measure);
* ``mu_I`` - the pushforward of uniform interior measure along the
  coordinate projections, with per-arc masses matched to ``mu_B``;
* ``nu_B``, ``nu_I`` - the analogues on the section-7 arc.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geom import QuadCoords, d24
from .moduli import in_region_plus, in_region_plus_ell, theta_cut
from .quadrature import integrate

SQRT2 = float(np.sqrt(2.0))


class ArcKind(enum.Enum):
    ELL_ARC = "ell"
    THETA_ARC = "theta"
    ELL_ARC_SWAPPED = "ell_swap"


class RegimeError(ValueError):
    """A measure was requested outside the range of ``r`` where it is defined."""


def theta_max(ell, r):
    """Largest theta keeping ``d(v2, v4) <= r`` at fixed ``ell``."""
    ell = np.asarray(ell, dtype=float)
    denom = 2.0 - ell**2 / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(denom > 0, 1.0 - r**2 / np.where(denom > 0, denom, 1.0), -1.0)
    out = np.minimum(np.pi, np.arccos(np.clip(x, -1.0, 1.0)))
    return out if np.ndim(out) else float(out)


def dtheta_max_dr(ell, r):
    """``d theta_max / d r``; zero where ``theta_max`` is pinned at ``pi``."""
    ell = np.asarray(ell, dtype=float)
    denom = 2.0 - ell**2 / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        x = 1.0 - r**2 / denom
        out = 2.0 * r / (denom * np.sqrt(1.0 - x**2))
    out = np.where((denom > 0) & (x > -1.0), out, 0.0)
    return out if np.ndim(out) else float(out)


def ell_min(theta, r):
    """Smallest ``ell`` with ``d(v2, v4) <= r`` at fixed ``theta``.

    A value above ``r`` means the fibre at this ``theta`` is empty.
    """
    theta = np.asarray(theta, dtype=float)
    gap = 2.0 - 2.0 * np.cos(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(gap > 0, 1.0 - r**2 / np.where(gap > 0, gap, 1.0), 0.0)
    out = 2.0 * np.sqrt(np.clip(inner, 0.0, None))
    return out if np.ndim(out) else float(out)


def ell_cut(theta):
    """Smallest ``ell`` with ``d(v2, v4) <= ell`` at fixed ``theta``."""
    c = np.cos(np.asarray(theta, dtype=float))
    out = 2.0 * np.sqrt((1.0 - c) / (3.0 - c))
    return out if np.ndim(out) else float(out)


def theta_arc_end(r: float) -> float:
    """Upper ``ell`` of the theta arc; beyond ``sqrt(4 - r^2)`` the arc is absent."""
    return float(min(r, np.sqrt(max(4.0 - r * r, 0.0))))


def ell_arc_end(r: float) -> float:
    return theta_max(r, r)


def swapped_arc_end(r: float) -> float:
    return theta_cut(r)


@dataclass(frozen=True)
class BoundaryArc:
    kind: ArcKind
    r: float
    param_range: tuple

    @classmethod
    def make(cls, kind: ArcKind, r: float) -> "BoundaryArc":
        if kind is ArcKind.ELL_ARC:
            return cls(kind, r, (0.0, ell_arc_end(r)))
        if kind is ArcKind.THETA_ARC:
            return cls(kind, r, (0.0, theta_arc_end(r)))
        return cls(kind, r, (0.0, swapped_arc_end(r)))


@dataclass(frozen=True)
class DensityGrid:
    arc: BoundaryArc
    params: np.ndarray
    density: np.ndarray
    normalized_mass: float

    def __post_init__(self):
        if np.any(self.density < 0):
            raise ValueError("densities must be non-negative")
        if np.any(np.diff(self.params) <= 0):
            raise ValueError("grid parameters must be strictly increasing")

    def mass(self) -> float:
        return float(np.trapezoid(self.density, self.params))

    def cdf(self) -> np.ndarray:
        cells = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.params)
        return np.concatenate([[0.0], np.cumsum(cells)])


def _grid(arc: BoundaryArc, f, grid_size: int, mass: float) -> DensityGrid:
    lo, hi = arc.param_range
    x = np.linspace(lo, hi, grid_size)
    raw = np.asarray(f(x), dtype=float)
    scale = mass / np.trapezoid(raw, x) if hi > lo else 0.0
    return DensityGrid(arc, x, raw * scale, mass)


# ------------------------------------------------------- unnormalized densities


def mu_B_density(kind: ArcKind, r: float):
    if kind is ArcKind.ELL_ARC:
        return lambda th: np.ones_like(np.asarray(th, dtype=float))
    if kind is ArcKind.THETA_ARC:
        return lambda ell: dtheta_max_dr(ell, r)
    raise ValueError(kind)


def mu_I_density(kind: ArcKind, r: float):
    if kind is ArcKind.ELL_ARC:
        return lambda th: np.clip(r - ell_min(th, r), 0.0, None)
    if kind is ArcKind.THETA_ARC:
        return lambda ell: theta_max(ell, r)
    raise ValueError(kind)


def nu_B_density(r: float):
    return lambda th: np.ones_like(np.asarray(th, dtype=float))


def nu_I_density(r: float):
    return lambda th: np.clip(r - ell_cut(th), 0.0, None)


def theta_arc_mass_B(r: float, tol: float = 1e-13) -> tuple[float, float]:
    """Unnormalized ``mu_B`` mass of the theta arc (inverse-sqrt endpoint handled)."""
    return integrate(lambda l: dtheta_max_dr(l, r), 0.0, theta_arc_end(r), "right", tol)


def ell_arc_mass_I(r: float, tol: float = 1e-13) -> tuple[float, float]:
    """Integral of ``r - ell_min`` over the ell arc, split at the kink of ``ell_min``."""
    top = ell_arc_end(r)
    kink = min(theta_max(0.0, r), top)
    f = mu_I_density(ArcKind.ELL_ARC, r)
    a, da = integrate(f, 0.0, kink, None, tol)
    b, db = integrate(f, kink, top, "left", tol)
    return a + b, da + db


def alpha(r: float) -> float:
    """``mu_B`` mass of the ell arc under joint normalization."""
    ell_mass = ell_arc_end(r)
    theta_mass, _ = theta_arc_mass_B(r)
    return ell_mass / (ell_mass + theta_mass)


def _check_mu_regime(r: float):
    if not (1.0 <= r <= SQRT2):
        raise RegimeError(f"mu measures are defined for r in [1, sqrt(2)] ~ [1, {SQRT2:.6f}], got {r}")


def _check_nu_regime(r: float):
    if not (1.0 <= r <= 2.0):
        raise RegimeError(f"nu measures are defined for r in [1, 2], got {r}")


def mu_B_grid(r: float, grid_size: int = 1024) -> tuple[DensityGrid, DensityGrid]:
    """Tabulated ``mu_B`` on (ell arc, theta arc); ``alpha`` is the first grid's mass."""
    _check_mu_regime(r)
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    a = alpha(r)
    ell_arc = BoundaryArc.make(ArcKind.ELL_ARC, r)
    theta_arc = BoundaryArc.make(ArcKind.THETA_ARC, r)
    return (_grid(ell_arc, mu_B_density(ArcKind.ELL_ARC, r), grid_size, a),
            _grid(theta_arc, mu_B_density(ArcKind.THETA_ARC, r), grid_size, 1.0 - a))


def mu_I_grid(r: float, grid_size: int = 1024, alpha_value: float | None = None):
    _check_mu_regime(r)
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    a = alpha(r) if alpha_value is None else alpha_value
    ell_arc = BoundaryArc.make(ArcKind.ELL_ARC, r)
    theta_arc = BoundaryArc.make(ArcKind.THETA_ARC, r)
    return (_grid(ell_arc, mu_I_density(ArcKind.ELL_ARC, r), grid_size, a),
            _grid(theta_arc, mu_I_density(ArcKind.THETA_ARC, r), grid_size, 1.0 - a))


def nu_grids(r: float, grid_size: int = 1024) -> tuple[DensityGrid, DensityGrid]:
    _check_nu_regime(r)
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    arc = BoundaryArc.make(ArcKind.ELL_ARC_SWAPPED, r)
    return (_grid(arc, nu_B_density(r), grid_size, 1.0),
            _grid(arc, nu_I_density(r), grid_size, 1.0))


# --------------------------------------------------------------- projections


def project_pi_ell(q: QuadCoords, r: float) -> QuadCoords:
    if not in_region_plus(q, r):
        raise ValueError("point is outside the confined chart")
    return QuadCoords(r, q.theta)


def project_pi_theta(q: QuadCoords, r: float) -> QuadCoords:
    if not in_region_plus(q, r):
        raise ValueError("point is outside the confined chart")
    return QuadCoords(q.ell, theta_max(q.ell, r))


def project_pi_swapped(q: QuadCoords, r: float) -> QuadCoords:
    if not in_region_plus_ell(q, r):
        raise ValueError("point is outside the half-chart d(v1,v3) >= d(v2,v4)")
    return QuadCoords(r, q.theta)


# ------------------------------------------------------------------ psi_1


def psi1(ell, r):
    """Auxiliary function whose sign drives the theta-arc likelihood-ratio argument.

    With ``r = sqrt(4 - ell^2) sin(x/2)`` it reduces to ``x - sin(x) >= 0``.
    """
    ell = np.asarray(ell, dtype=float)
    r = np.asarray(r, dtype=float)
    a2 = 4.0 - ell**2
    if np.any(ell < 0) or np.any(r < 0) or np.any(ell**2 + r**2 > 4.0 + 1e-12):
        raise ValueError("psi1 needs ell >= 0, r >= 0 and ell^2 + r^2 <= 4")
    root = -2.0 * np.sqrt(np.clip(r**2 * (a2 - r**2), 0.0, None) / a2**2)
    # arccos((-4 + ell^2 + 2 r^2) / (-4 + ell^2)) = arccos(1 - 2 r^2 / a2),
    # evaluated as 2 arcsin(r / sqrt(a2)) to avoid cancellation at small r
    with np.errstate(divide="ignore", invalid="ignore"):
        half = np.where(a2 > 0, r / np.sqrt(np.where(a2 > 0, a2, 1.0)), 1.0)
    out = root + 2.0 * np.arcsin(np.clip(half, 0.0, 1.0))
    return out if np.ndim(out) else float(out)


def likelihood_ratio_B_over_I(ell, r):
    """Unnormalized ``d mu_B / d mu_I`` on the theta arc."""
    return dtheta_max_dr(ell, r) / theta_max(ell, r)


# ------------------------------------------------------ stochastic ordering


@dataclass(frozen=True)
class DominanceReport:
    cdf_holds: bool
    mlr_holds: bool
    max_cdf_violation: float
    max_mlr_violation: float
    tol: float

    @property
    def holds(self) -> bool:
        return self.cdf_holds and self.mlr_holds


def stochastic_dominance(lower: DensityGrid, upper: DensityGrid, tol: float = 1e-8) -> DominanceReport:
    """Check that ``upper`` first-order dominates ``lower`` along the arc parameter.

    The CDF test asks ``F_upper <= F_lower + tol`` at every node. The
    likelihood-ratio test asks ``upper/lower`` to be non-decreasing wherever
    both densities are positive; its violation is reported as the most
    negative slope ``d(ratio)/d(param)``.
    """
    if lower.arc.kind is not upper.arc.kind or not np.array_equal(lower.params, upper.params):
        raise ValueError("grids must share arc and parameter values")
    if abs(lower.normalized_mass - upper.normalized_mass) > 1e-12:
        raise ValueError("grids must carry the same mass")
    cdf_gap = upper.cdf() - lower.cdf()
    cdf_violation = float(max(cdf_gap.max(), 0.0))
    pos = (lower.density > 0) & (upper.density > 0)
    x = lower.params[pos]
    ratio = upper.density[pos] / lower.density[pos]
    slopes = np.diff(ratio) / np.diff(x) if len(x) > 1 else np.zeros(0)
    mlr_violation = float(max(-slopes.min(), 0.0)) if len(slopes) else 0.0
    return DominanceReport(cdf_violation <= tol, mlr_violation <= tol,
                           cdf_violation, mlr_violation, tol)


def d24_on_theta_arc(ell, r):
    """Distance ``d(v2, v4)`` along the theta arc; equals ``r`` by construction."""
    return d24(ell, theta_max(ell, r))
