"""Action-angle coordinates and uniform samplers on equilateral polygon space.

Diagonals are measured from ``v1``: ``ell_k = d(v1, v_k)`` for ``k = 3..n-1``
(with ``ell_2 = ell_n = 1`` fixed), and ``theta_k`` is the dihedral rotation
of triangle ``(v1, v_k, v_{k+1})`` about the axis ``v1 v_k``. The invariant
volume is the product Lebesgue measure in these coordinates, so exact uniform
sampling reduces to uniform sampling of the fan polytope times a torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .geom import Polygon, QuadCoords, d24, edge_curvature, vertex_diameter
from .rng import stream

POLYTOPE_SLACK = 1e-12
CHUNK = 1 << 15
DEFAULT_PROBE_BUDGET = 10**6


class SamplerExhausted(RuntimeError):
    """Rejection sampling found no admissible proposal within its budget."""


@dataclass(frozen=True)
class ActionAngle:
    n: int
    ells: tuple
    thetas: tuple

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("action-angle coordinates need n >= 4")
        if len(self.ells) != self.n - 3 or len(self.thetas) != self.n - 3:
            raise ValueError(f"expected {self.n - 3} ells and thetas")
        object.__setattr__(self, "ells", tuple(float(x) for x in self.ells))
        object.__setattr__(self, "thetas", tuple(float(x) for x in self.thetas))


@dataclass(frozen=True)
class ConfinedRegionSpec:
    n: int
    r: float

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("n must be at least 4")
        if not self.r > 0:
            raise ValueError("r must be positive")
        if self.n == 4 and not (1.0 <= self.r <= 2.0):
            raise ValueError("quadrilateral analyses need 1 <= r <= 2")


def ell_upper_bounds(n: int) -> np.ndarray:
    """Largest possible value of each diagonal ``ell_3..ell_{n-1}``."""
    k = np.arange(3, n)
    return np.minimum(k - 1, n + 1 - k).astype(float)


def feasible_ells(ells, slack: float = POLYTOPE_SLACK) -> np.ndarray:
    """Fan-triangle inequalities for arrays of shape ``(..., n-3)``."""
    ells = np.asarray(ells, dtype=float)
    pad = np.ones(ells.shape[:-1] + (1,))
    full = np.concatenate([pad, ells, pad], axis=-1)
    a, b = full[..., :-1], full[..., 1:]
    ok = (np.abs(a - b) <= 1.0 + slack) & (a + b >= 1.0 - slack)
    return ok.all(axis=-1) & (ells >= -slack).all(axis=-1)


def polytope_contains(aa: ActionAngle) -> bool:
    return bool(feasible_ells(np.array(aa.ells)))


def reconstruct_vertices(ells, thetas) -> np.ndarray:
    """Batch fan reconstruction; returns vertices of shape ``(m, n, 3)``."""
    ells = np.atleast_2d(np.asarray(ells, dtype=float))
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    m, k = ells.shape
    n = k + 3
    diag = np.ones((m, n + 1))  # diag[:, j] = d(v1, v_j), 1-based j
    diag[:, 3:n] = ells
    v = np.zeros((m, n, 3))
    l3 = diag[:, 3]
    v[:, 1] = np.stack([l3 / 2, np.sqrt(np.clip(1 - l3**2 / 4, 0, None)), 0 * l3], axis=-1)
    v[:, 2, 0] = l3
    for j in range(3, n):
        lj, lnext = diag[:, j], diag[:, j + 1]
        vj, vprev = v[:, j - 1], v[:, j - 2]
        safe = lj > 1e-14
        axis = np.where(safe[:, None], vj / np.where(safe, lj, 1.0)[:, None], [1.0, 0.0, 0.0])
        w = vprev - np.einsum("ij,ij->i", vprev, axis)[:, None] * axis
        wn = np.linalg.norm(w, axis=1)
        fallback = np.cross(axis, [0.0, 0.0, 1.0])
        fb_bad = np.linalg.norm(fallback, axis=1) < 1e-8
        fallback[fb_bad] = np.cross(axis[fb_bad], [0.0, 1.0, 0.0])
        fallback /= np.linalg.norm(fallback, axis=1)[:, None]
        u = np.where((wn > 1e-14)[:, None], w / np.where(wn > 1e-14, wn, 1.0)[:, None], fallback)
        x = np.where(safe, (lj**2 + (lnext - 1.0) * (lnext + 1.0)) / (2 * np.where(safe, lj, 1.0)), 0.0)
        y = np.sqrt(np.clip((lnext - x) * (lnext + x), 0.0, None))
        th = thetas[:, j - 3]
        direction = np.cos(th)[:, None] * u + np.sin(th)[:, None] * np.cross(axis, u)
        v[:, j] = x[:, None] * axis + y[:, None] * direction
    return v


def vertices_to_edges(v: np.ndarray) -> np.ndarray:
    return np.roll(v, -1, axis=-2) - v


def reconstruct(aa: ActionAngle) -> Polygon:
    if not polytope_contains(aa):
        raise ValueError("diagonal lengths violate the fan-triangle inequalities")
    v = reconstruct_vertices([aa.ells], [aa.thetas])[0]
    return Polygon(vertices_to_edges(v))


def action_angle_from_polygon(p: Polygon) -> ActionAngle:
    """Recover fan coordinates; thetas are returned in ``[0, 2 pi)``."""
    v = p.vertices
    n = p.n
    ells, thetas = [], []
    for j in range(3, n):
        vj = v[j - 1]
        lj = np.linalg.norm(vj)
        ells.append(lj)
        axis = vj / lj
        a = v[j - 2] - (v[j - 2] @ axis) * axis
        b = v[j] - (v[j] @ axis) * axis
        ang = np.arctan2(np.cross(a, b) @ axis, a @ b)
        thetas.append(ang % (2 * np.pi))
    return ActionAngle(n, tuple(ells), tuple(thetas))


# ---------------------------------------------------------------- samplers


def _propose_ells(rng, size: int, n: int, hi: np.ndarray) -> tuple[np.ndarray, float]:
    """Uniform proposals on a box that covers the admissible ell-polytope.

    Two exact boxes are available: the step box (differences of consecutive
    diagonals in [-1, 1]) and a coordinate box ``prod [0, hi_k]``. The one of
    smaller volume is used. Returns proposals and the box volume.
    """
    k = n - 3
    step_vol = 2.0**k
    box_vol = float(np.prod(hi))
    if box_vol <= step_vol:
        return rng.uniform(0.0, 1.0, size=(size, k)) * hi, box_vol
    steps = rng.uniform(-1.0, 1.0, size=(size, k))
    return 1.0 + np.cumsum(steps, axis=1), step_vol


@dataclass
class ActionAngleBatch:
    n: int
    ells: np.ndarray
    thetas: np.ndarray
    proposals: int
    approximate: bool = False

    def __len__(self):
        return self.ells.shape[0]

    @property
    def acceptance_rate(self) -> float:
        return len(self) / self.proposals if self.proposals else 0.0

    def __iter__(self) -> Iterator[ActionAngle]:
        for e, t in zip(self.ells, self.thetas):
            yield ActionAngle(self.n, tuple(e), tuple(t))

    def vertices(self) -> np.ndarray:
        return reconstruct_vertices(self.ells, self.thetas)


def sample_unconfined(n: int, count: int, seed: int, chunk: int = CHUNK) -> ActionAngleBatch:
    """Exact uniform draws on the full moduli space by box rejection."""
    if n < 4:
        raise ValueError("n must be at least 4")
    hi = ell_upper_bounds(n)
    got_e, got_t, total, proposals = [], [], 0, 0
    sid = 0
    while total < count:
        rng = stream(seed, sid)
        sid += 1
        ells, _ = _propose_ells(rng, chunk, n, hi)
        thetas = rng.uniform(0.0, 2 * np.pi, size=(chunk, n - 3))
        ok = feasible_ells(ells, slack=0.0)
        idx = np.flatnonzero(ok)
        take = idx[: count - total]
        proposals += chunk if len(take) == len(idx) else int(take[-1]) + 1
        got_e.append(ells[take])
        got_t.append(thetas[take])
        total += len(take)
    return ActionAngleBatch(n, np.concatenate(got_e), np.concatenate(got_t), proposals)


@dataclass
class PolygonBatch:
    """Accepted polygons together with their fan coordinates and summaries."""

    n: int
    ells: np.ndarray
    thetas: np.ndarray
    edges: np.ndarray
    curvature: np.ndarray
    diameter: np.ndarray
    proposals: int
    approximate: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.edges.shape[0]

    @property
    def acceptance_rate(self) -> float:
        return len(self) / self.proposals if self.proposals else 0.0

    def polygons(self) -> Iterator[Polygon]:
        for e in self.edges:
            yield Polygon(e)


def _rejection_polygons(n, count, seed, lo, hi, keep, chunk, probe_budget, message):
    k = n - 3
    parts, total, proposals, sid = [], 0, 0, 0
    while total < count:
        rng = stream(seed, sid)
        sid += 1
        if lo is None:
            ells, _ = _propose_ells(rng, chunk, n, hi)
        else:
            ells = lo + rng.uniform(0.0, 1.0, size=(chunk, k)) * (hi - lo)
        thetas = rng.uniform(0.0, 2 * np.pi, size=(chunk, k))
        ok = feasible_ells(ells, slack=0.0)
        cand = np.flatnonzero(ok)
        v = reconstruct_vertices(ells[cand], thetas[cand])
        diam = vertex_diameter(v)
        sel = keep(ells[cand], v, diam)
        idx = cand[sel]
        take = idx[: count - total]
        proposals += chunk if len(take) == len(idx) else int(take[-1]) + 1
        if total == 0 and len(take) == 0 and proposals >= probe_budget:
            raise SamplerExhausted(message)
        pos = np.searchsorted(cand, take)
        edges = vertices_to_edges(v[pos])
        parts.append((ells[take], thetas[take], edges, diam[pos]))
        total += len(take)
    ells, thetas, edges, diam = (np.concatenate(x) for x in zip(*parts))
    return ells, thetas, edges, diam, proposals


def sample_confined(spec: ConfinedRegionSpec, count: int, seed: int,
                    chunk: int = CHUNK, probe_budget: int = DEFAULT_PROBE_BUDGET) -> PolygonBatch:
    """Exact uniform draws on polygons of diameter at most ``spec.r``.

    Since every diagonal from ``v1`` is bounded by the diameter, proposals are
    drawn from the smaller of the step box and ``prod [0, min(r, hi_k)]``.
    """
    n, r = spec.n, spec.r
    hi = np.minimum(ell_upper_bounds(n), r)
    ells, thetas, edges, diam, proposals = _rejection_polygons(
        n, count, seed, None, hi,
        lambda e, v, d: d <= r,
        chunk, probe_budget,
        "region too small for rejection sampling at this r",
    )
    box = min(float(np.prod(hi)), 2.0 ** (n - 3)) * (2 * np.pi) ** (n - 3)
    return PolygonBatch(n, ells, thetas, edges, edge_curvature(edges), diam, proposals,
                        meta={"region": "confined", "r": r, "box_volume": box})


def sample_loose(n: int, min_diameter: float, count: int, seed: int,
                 chunk: int = CHUNK, probe_budget: int = DEFAULT_PROBE_BUDGET) -> PolygonBatch:
    """Exact uniform draws on even-``n`` polygons of diameter at least ``min_diameter``.

    Requires ``n/2 - 1/2 < min_diameter <= n/2``. In that range the diameter is
    realised by exactly one antipodal pair ``(v_k, v_{k+n/2})``; the pieces for
    different ``k`` are relabelings of one another, which preserve both the
    volume form and total curvature. We therefore sample the piece with
    ``d(v1, v_{n/2+1}) >= min_diameter``, which pins every diagonal to within
    ``eps = n/2 - min_diameter`` of its maximum.
    """
    if n % 2 or n < 4:
        raise ValueError("loose sampling needs even n >= 4")
    half = n // 2
    eps = half - min_diameter
    if not (0.0 <= eps < 0.5):
        raise ValueError(f"min_diameter must lie in ({half - 0.5}, {half}]")
    hi = ell_upper_bounds(n)
    lo = np.clip(hi - eps, 0.0, None)
    pivot = half + 1 - 3  # column of ell_{n/2+1}

    def keep(e, v, d):
        sel = e[:, pivot] >= min_diameter
        others = np.linalg.norm(v[:, 1:half] - v[:, half + 1:], axis=-1)
        if sel.any() and np.any(others[sel] >= min_diameter):
            raise AssertionError("diameter attained by two antipodal pairs")
        return sel

    ells, thetas, edges, diam, proposals = _rejection_polygons(
        n, count, seed, lo, hi, keep, chunk, probe_budget,
        "loose region too thin for rejection sampling; increase epsilon",
    )
    return PolygonBatch(n, ells, thetas, edges, edge_curvature(edges), diam, proposals,
                        meta={"region": "loose", "min_diameter": min_diameter})


def polytope_inequalities(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``A x <= b`` describing the fan polytope in ``ell_3..ell_{n-1}``."""
    k = n - 3
    rows, rhs = [], []

    def add(coeffs, b):
        rows.append(coeffs)
        rhs.append(b)

    for j in range(k + 1):  # pairs (diag_j, diag_{j+1}) with fixed ends = 1
        a = np.zeros(k)
        const_a = 1.0 if j == 0 else 0.0
        const_b = 1.0 if j == k else 0.0
        if j > 0:
            a[j - 1] = 1.0
        b_vec = np.zeros(k)
        if j < k:
            b_vec[j] = 1.0
        # a - b <= 1, b - a <= 1, -(a + b) <= -1
        add(a - b_vec, 1.0 - const_a + const_b)
        add(b_vec - a, 1.0 - const_b + const_a)
        add(-(a + b_vec), -1.0 + const_a + const_b)
    for i in range(k):
        a = np.zeros(k)
        a[i] = -1.0
        add(a, 0.0)
    return np.array(rows), np.array(rhs)


def hit_and_run_unconfined(n: int, count: int, seed: int,
                           burn_in: int = 1000, thin: int = 10) -> ActionAngleBatch:
    """Approximate uniform draws on the fan polytope by hit-and-run.

    Faster than rejection for large ``n`` but only asymptotically exact; the
    returned batch is flagged ``approximate``.
    """
    A, b = polytope_inequalities(n)
    rng = stream(seed, 0)
    x = np.ones(n - 3)
    out = np.empty((count, n - 3))
    steps = burn_in + count * thin
    for it in range(steps):
        d = rng.normal(size=n - 3)
        d /= np.linalg.norm(d)
        ad = A @ d
        slack = b - A @ x
        with np.errstate(divide="ignore"):
            bounds = slack / ad
        tmax = np.min(bounds[ad > 0]) if np.any(ad > 0) else 0.0
        tmin = np.max(bounds[ad < 0]) if np.any(ad < 0) else 0.0
        x = x + rng.uniform(tmin, tmax) * d
        if it >= burn_in and (it - burn_in) % thin == thin - 1:
            out[(it - burn_in) // thin] = x
    thetas = stream(seed, 1).uniform(0.0, 2 * np.pi, size=(count, n - 3))
    return ActionAngleBatch(n, out, thetas, steps, approximate=True)


# ------------------------------------------------------- quadrilateral chart


def in_region_plus(q: QuadCoords, r: float) -> bool:
    return bool(q.ell <= r and d24(q.ell, q.theta) <= r)


def theta_cut(ell):
    """Largest theta with ``d(v2, v4) <= d(v1, v3)`` at fixed ``ell``."""
    ell = np.asarray(ell, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (4.0 - 3.0 * ell**2) / (4.0 - ell**2)
    c = np.where(ell >= 2.0, -1.0, c)
    out = np.arccos(np.clip(c, -1.0, 1.0))
    return out if np.ndim(out) else float(out)


def in_region_plus_ell(q: QuadCoords, r: float) -> bool:
    by_distance = in_region_plus(q, r) and d24(q.ell, q.theta) <= q.ell
    if q.ell > 0:
        by_angle = q.ell <= r and q.theta <= theta_cut(q.ell)
        if by_angle != by_distance and abs(q.theta - theta_cut(q.ell)) > 1e-9:
            raise AssertionError("distance and angle descriptions disagree")
    return bool(by_distance)
