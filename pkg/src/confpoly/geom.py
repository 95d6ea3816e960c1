"""Exact geometry of equilateral spatial polygons.

Polygons are stored as an ``(n, 3)`` array of unit edge vectors; vertices are
recovered as cumulative sums starting at the origin. Quadrilaterals are
addressed through the ``(ell, theta)`` chart where ``ell = d(v1, v3)`` and
``theta`` is the dihedral angle about the diagonal ``v1 v3``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EQUILATERAL_TOL = 1e-9
ARCCOS_SLACK = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of a closed-form expression."""


def safe_arccos(x):
    """arccos that tolerates rounding within ``ARCCOS_SLACK`` of +-1."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + ARCCOS_SLACK):
        raise DomainError(f"arccos argument outside [-1, 1]: {np.max(np.abs(x))!r}")
    out = np.arccos(np.clip(x, -1.0, 1.0))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Polygon:
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 2 or e.shape[1] != 3 or e.shape[0] < 3:
            raise ValueError(f"edges must have shape (n>=3, 3), got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("edges contain non-finite values")
        lengths = np.linalg.norm(e, axis=1)
        if np.max(np.abs(lengths - 1.0)) > EQUILATERAL_TOL:
            raise ValueError("polygon is not equilateral")
        if np.linalg.norm(e.sum(axis=0)) > EQUILATERAL_TOL:
            raise ValueError("polygon does not close")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def n(self) -> int:
        return self.edges.shape[0]

    @property
    def vertices(self) -> np.ndarray:
        """Vertices v1..vn with v1 at the origin."""
        return np.vstack([np.zeros(3), np.cumsum(self.edges[:-1], axis=0)])

    @classmethod
    def from_vertices(cls, vertices) -> "Polygon":
        v = np.asarray(vertices, dtype=float)
        return cls(np.roll(v, -1, axis=0) - v)


@dataclass(frozen=True)
class QuadCoords:
    ell: float
    theta: float

    def __post_init__(self):
        if not (0.0 <= self.ell <= 2.0):
            raise ValueError(f"ell must lie in [0, 2], got {self.ell}")
        if not (0.0 <= self.theta <= np.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


def quad_vertices(ell, theta):
    """Vertices of the chart quadrilateral, broadcasting over ``ell`` and ``theta``.

    Returns an array of shape ``(..., 4, 3)``.
    """
    ell, theta = np.broadcast_arrays(np.asarray(ell, float), np.asarray(theta, float))
    cphi = ell / 2.0
    sphi = np.sqrt(np.clip(1.0 - cphi**2, 0.0, None))
    zero = np.zeros_like(ell)
    v1 = np.stack([zero, zero, zero], axis=-1)
    v2 = np.stack([cphi, sphi, zero], axis=-1)
    v3 = np.stack([2 * cphi, zero, zero], axis=-1)
    v4 = np.stack([cphi, sphi * np.cos(theta), sphi * np.sin(theta)], axis=-1)
    return np.stack([v1, v2, v3, v4], axis=-2)


def quad_from_coords(q: QuadCoords) -> Polygon:
    return Polygon.from_vertices(quad_vertices(q.ell, q.theta))


def edge_curvature(edges):
    """Total curvature of polygons given as edge arrays of shape ``(..., n, 3)``."""
    e = np.asarray(edges, dtype=float)
    nxt = np.roll(e, -1, axis=-2)
    dots = np.einsum("...ij,...ij->...i", e, nxt)
    crosses = np.linalg.norm(np.cross(e, nxt), axis=-1)
    # atan2 form of arccos(<e_i, e_i+1>); stays accurate near angles 0 and pi
    return np.arctan2(crosses, dots).sum(axis=-1)


def total_curvature(p: Polygon) -> float:
    """Sum of exterior angles, each the angle between consecutive edges."""
    return float(edge_curvature(p.edges))


def vertex_diameter(vertices):
    """Largest pairwise vertex distance for arrays of shape ``(..., n, 3)``."""
    v = np.asarray(vertices, dtype=float)
    n = v.shape[-2]
    best = np.zeros(v.shape[:-2])
    for j in range(1, n // 2 + 1):
        d = np.linalg.norm(np.roll(v, -j, axis=-2) - v, axis=-1).max(axis=-1)
        best = np.maximum(best, d)
    return best


def diameter(p: Polygon) -> float:
    return float(vertex_diameter(p.vertices))


def quad_curvature_closed(t, c):
    """Closed-form quadrilateral curvature in ``t = ell^2/4``, ``c = cos(theta)``.

    Evaluates ``2 arccos(-t - (1-t) c) + 2 arccos(2t - 1)``. Both arccos terms
    are computed through half-angle atan2 forms with the factorisation
    ``1 + (-t - (1-t) c) = (1-t)(1-c)`` and
    ``1 - (-t - (1-t) c) = (1-t)(1+c) + 2t``, which keeps full precision where the
    arguments approach -1 or 1.
    """
    t = np.asarray(t, dtype=float)
    c = np.asarray(c, dtype=float)
    safe_arccos(-t - (1.0 - t) * c)  # domain check only
    safe_arccos(2.0 * t - 1.0)
    t = np.clip(t, 0.0, 1.0)
    c = np.clip(c, -1.0, 1.0)
    lo = np.clip((1.0 - t) * (1.0 - c) / 2.0, 0.0, 1.0)
    hi = np.clip((1.0 - t) * (1.0 + c) / 2.0 + t, 0.0, 1.0)
    first = np.pi - 2.0 * np.arctan2(np.sqrt(lo), np.sqrt(hi))
    second = 2.0 * np.arctan2(np.sqrt(1.0 - t), np.sqrt(t))
    out = 2.0 * first + 2.0 * second
    return out if np.ndim(out) else float(out)


def quad_curvature(ell, theta):
    """Chart curvature in ``(ell, theta)``; vectorised, numerically stable form.

    Uses ``2 pi - 4 arcsin(sin(phi) sin(theta/2)) + 4 phi`` with
    ``cos(phi) = ell/2``, which equals the arccos closed form but keeps full
    precision near ``theta = 0``.
    """
    ell = np.asarray(ell, dtype=float)
    theta = np.asarray(theta, dtype=float)
    half = np.clip(ell / 2.0, 0.0, 1.0)
    phi = np.arccos(half)
    s = np.clip(np.sin(phi) * np.sin(theta / 2.0), -1.0, 1.0)
    out = 2.0 * np.pi - 4.0 * np.arcsin(s) + 4.0 * phi
    return out if np.ndim(out) else float(out)


def d24_closed(q: QuadCoords) -> float:
    return float(d24(q.ell, q.theta))


def d24(ell, theta):
    """Vectorised distance between v2 and v4 in the chart."""
    ell = np.asarray(ell, dtype=float)
    theta = np.asarray(theta, dtype=float)
    # 2 - 2 cos(theta) = (2 sin(theta/2))^2, without the cancellation near 0
    out = np.sqrt(np.clip(1.0 - ell**2 / 4.0, 0.0, None)) * 2.0 * np.abs(np.sin(theta / 2.0))
    return out if np.ndim(out) else float(out)


def dkappa_dt_closed(t, c, margin: float = 1e-8):
    """Partial derivative of the closed-form curvature in ``t`` at fixed ``c``."""
    t = np.asarray(t, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(t <= margin) or np.any(t >= 1.0 - margin):
        raise DomainError("t must stay away from the singular points 0 and 1")
    if np.any(c < -1.0) or np.any(c >= 1.0 - margin):
        raise DomainError("c must lie in [-1, 1)")
    inner = -c * (1.0 - t) - t
    out = -2.0 * (c - 1.0) / np.sqrt(1.0 - inner**2) - 4.0 / np.sqrt(1.0 - (2.0 * t - 1.0) ** 2)
    return out if np.ndim(out) else float(out)


def psi2(x, t):
    """Secant-slope auxiliary from the stretching monotonicity argument."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(1.0 - (-x * (1.0 - t) - t) ** 2, 0.0, None))
