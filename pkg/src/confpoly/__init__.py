"""Confined equilateral polygons: action-angle sampling, boundary measures,
and the expected total curvature of quadrilaterals under diameter confinement."""

from .geom import (
    Polygon, QuadCoords, d24_closed, diameter, dkappa_dt_closed, quad_curvature_closed,
    quad_from_coords, total_curvature,
)
from .moduli import (
    ActionAngle, ConfinedRegionSpec, in_region_plus, in_region_plus_ell, polytope_contains,
    reconstruct, sample_confined, sample_loose, sample_unconfined,
)
from .crofton import Estimate, area_region, crofton_residual, kappa_bar, kappa_boundary, monotonicity_scan

__version__ = "0.1.0"
