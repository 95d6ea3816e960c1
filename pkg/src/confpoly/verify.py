"""Named numerical checks of the quadrilateral curvature results.

Each check returns a :class:`Check` with the tolerance it was run at, the
measured quantity, and a signed margin (positive means inside tolerance).
Suites group checks for the ``verify`` CLI command.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from . import crofton, knotproxy, measures
from .geom import (
    d24, dkappa_dt_closed, edge_curvature, psi2, quad_curvature_closed, quad_vertices,
)
from .moduli import (
    ConfinedRegionSpec, sample_confined, vertices_to_edges,
)

SQRT2 = measures.SQRT2
SCAN_GRID = tuple(np.round(np.linspace(1.0, 2.0, 21), 10))
CROFTON_GRID = (1.05, 1.15, 1.25, 1.35, 1.45, 1.55, 1.65, 1.75, 1.85, 1.95)
CHAIN_GRID = (1.10, 1.20, 1.30)
ROUNDOFF_FLOOR = 1e-12


@dataclass
class Check:
    name: str
    tolerance: float
    measured: float
    margin: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: measured={self.measured:.6g} tol={self.tolerance:.3g} {self.detail}".rstrip()

    def to_dict(self) -> dict:
        return {k: (v if not isinstance(v, float) or np.isfinite(v) else str(v))
                for k, v in asdict(self).items()}


def _upper(name, measured, tol, detail=""):
    return Check(name, tol, float(measured), float(tol - measured), bool(measured <= tol), detail)


def _lower(name, measured, tol, detail=""):
    return Check(name, tol, float(measured), float(measured - tol), bool(measured >= tol), detail)


def chart_grid(size: int = 200):
    ell = np.linspace(0.0, 2.0, size)
    theta = np.linspace(0.0, np.pi, size)
    return np.meshgrid(ell, theta, indexing="ij")


def vertex_curvature_grid(L, T):
    """Curvature from explicit vertices, independent of the closed forms."""
    return edge_curvature(vertices_to_edges(quad_vertices(L, T)))


# ----------------------------------------------------------------- criteria


def check_monotone_curve(r_grid=SCAN_GRID, runtime_budget: float = 60.0) -> Check:
    t0 = time.perf_counter()
    curve, verdict = crofton.monotonicity_scan(r_grid)
    elapsed = time.perf_counter() - t0
    deltas = max(k.refinement_delta for k in curve.kappa_bar)
    tol = crofton.MONOTONE_TOL + 2 * deltas
    c = _upper("monotone kbar(r) on [1,2]", verdict.worst_increase, tol,
               f"runtime={elapsed:.1f}s")
    c.passed = c.passed and verdict.passed and elapsed < runtime_budget
    return c


def _kbar_error(r: float) -> tuple[float, float]:
    k = crofton.kappa_bar(r)
    twin = crofton.kappa_bar_swapped(r)
    return k.value, max(k.refinement_delta, abs(k.value - twin.value), ROUNDOFF_FLOOR)


def check_inequality_chain(r_values=CHAIN_GRID) -> list[Check]:
    out = []
    for r in r_values:
        kb = crofton.kappa_boundary(r, "mu_B")
        ki = crofton.kappa_boundary(r, "mu_I")
        kbar, ebar = _kbar_error(r)
        eb = max(kb.refinement_delta, ROUNDOFF_FLOOR)
        ei = max(ki.refinement_delta, ROUNDOFF_FLOOR)
        gap1 = ki.value - kb.value
        gap2 = kbar - ki.value
        ratio = min(gap1 / (eb + ei), gap2 / (ei + ebar))
        out.append(_lower(f"kappa_muB < kappa_muI < kbar at r={r}", ratio, 10.0,
                          f"gaps=({gap1:.4g}, {gap2:.4g}) [gap/error ratio]"))
    return out


def check_crofton(r_values=CROFTON_GRID, h: float = 1e-3, tol: float = 1e-3) -> list[Check]:
    out = []
    for r in r_values:
        if abs(r - SQRT2) <= 0.02:
            continue
        t = crofton.crofton_terms(r, h)
        regime = crofton.boundary_measure_for(r).value
        out.append(_upper(f"Crofton residual at r={r}", t.residual, tol,
                          f"fd={t.fd:.8g} rhs={t.rhs:.8g} ({regime})"))
    return out


def check_alpha(r_values=CHAIN_GRID, grid_size: int = 2048, tol: float = 5e-3) -> list[Check]:
    out = []
    for r in r_values:
        ell_g, th_g = measures.mu_B_grid(r, grid_size)
        raw_ell = measures.mu_B_density(measures.ArcKind.ELL_ARC, r)(ell_g.params)
        raw_th = measures.mu_B_density(measures.ArcKind.THETA_ARC, r)(th_g.params)
        m1, m2 = np.trapezoid(raw_ell, ell_g.params), np.trapezoid(raw_th, th_g.params)
        a_grid = m1 / (m1 + m2)
        a_quad = ell_g.normalized_mass
        dev = max(abs(a_grid - 0.5), abs(a_quad - 0.5))
        out.append(_upper(f"alpha(r={r}) = 1/2", dev, tol,
                          f"alpha_grid={a_grid:.10f} alpha_quad={a_quad:.12f}"))
    return out


def check_dominance(r_values=CHAIN_GRID, grid_size: int = 1024, tol: float = 1e-8) -> list[Check]:
    out = []
    for r in r_values:
        for size in (grid_size, 2 * grid_size):
            b_ell, b_th = measures.mu_B_grid(r, size)
            i_ell, i_th = measures.mu_I_grid(r, size, b_ell.normalized_mass)
            rep3 = measures.stochastic_dominance(i_ell, b_ell, tol)
            rep4 = measures.stochastic_dominance(i_th, b_th, tol)
            out.append(_upper(f"mu_I <= mu_B on ell arc (CDF), r={r}, grid={size}",
                              rep3.max_cdf_violation, tol))
            out.append(_upper(f"mu_I <= mu_B on theta arc (CDF), r={r}, grid={size}",
                              rep4.max_cdf_violation, tol))
            out.append(_upper(f"d(mu_B/mu_I)/d ell >= -tol on theta arc, r={r}, grid={size}",
                              rep4.max_mlr_violation, tol))
    return out


def psi1_grid(size: int = 200):
    rs = np.linspace(1.0, SQRT2 - 0.01, size)
    R, U = np.meshgrid(rs, np.linspace(0.0, 1.0, size), indexing="ij")
    L = U * (np.sqrt(4.0 - R**2) - 0.01)
    return L, R


def check_psi1(tol: float = -1e-10) -> Check:
    L, R = psi1_grid()
    return _lower("psi1 >= -1e-10 on its grid", float(measures.psi1(L, R).min()), tol)


def check_curvature_monotone(size: int = 200, tol: float = 1e-9) -> list[Check]:
    L, T = chart_grid(size)
    K = vertex_curvature_grid(L, T)
    rise_theta = float(np.diff(K, axis=1).max())
    rise_ell = float(np.diff(K, axis=0).max())
    flat = float(np.abs(K[:, -1] - 2 * np.pi).max())
    return [
        _upper("kappa non-increasing in theta (fixed ell)", rise_theta, tol),
        _upper("kappa non-increasing in ell (fixed theta)", rise_ell, tol),
        _upper("kappa(ell, pi) = 2 pi", flat, tol),
    ]


def check_closed_forms(size: int = 200, tol: float = 1e-9, rel: float = 1e-4) -> list[Check]:
    L, T = chart_grid(size)
    V = quad_vertices(L, T)
    K = edge_curvature(vertices_to_edges(V))
    Kc = quad_curvature_closed(L**2 / 4, np.cos(T))
    D = np.linalg.norm(V[..., 1, :] - V[..., 3, :], axis=-1)
    Dc = d24(L, T)
    t = np.linspace(0.05, 0.95, 37)
    c = np.linspace(-1.0, 0.95, 40)
    Tt, Cc = np.meshgrid(t, c, indexing="ij")
    h = 1e-6
    fd = (quad_curvature_closed(Tt + h, Cc) - quad_curvature_closed(Tt - h, Cc)) / (2 * h)
    an = dkappa_dt_closed(Tt, Cc)
    scaled = np.abs(fd - an) / np.maximum(np.abs(an), 1e-6 / rel)
    return [
        _upper("closed-form curvature vs vertex oracle", float(np.abs(K - Kc).max()), tol),
        _upper("closed-form d(v2,v4) vs vertex oracle", float(np.abs(D - Dc).max()), tol),
        _upper("dkappa/dt vs central differences (relative)", float(scaled.max()), rel),
    ]


def check_star_shape(r_values=(1.1, 1.3, 1.6, 1.9), size: int = 120) -> list[Check]:
    """Region is a down-set in theta and an up-set in ell (below r)."""
    ell = np.linspace(0.0, 2.0, size)
    theta = np.linspace(0.0, np.pi, size)
    out = []
    for r in r_values:
        L, T = np.meshgrid(ell, theta, indexing="ij")
        inside = (L <= r) & (d24(L, T) <= r)
        theta_bad = int(np.sum(inside[:, 1:] & ~inside[:, :-1]))
        below_r = ell <= r
        sub = inside[below_r]
        ell_bad = int(np.sum(sub[:-1] & ~sub[1:]))
        out.append(_upper(f"region star-shaped in theta, r={r}", theta_bad, 0))
        out.append(_upper(f"region monotone in ell below r, r={r}", ell_bad, 0))
    return out


def check_psi2(tol: float = 1e-9) -> Check:
    x = np.linspace(-0.999, 0.999, 2001)
    worst = -np.inf
    for t in np.arange(1, 10) / 10:
        y = psi2(x, t)
        worst = max(worst, float((y[2:] - 2 * y[1:-1] + y[:-2]).max()))
    return _upper("psi2 concave (second differences <= tol)", worst, tol)


def fold_theta(theta):
    return np.where(theta > np.pi, 2 * np.pi - theta, theta)


def check_uniformity(samples: int = 100_000, seed: int = 7, bins: int = 20) -> Check:
    batch = sample_confined(ConfinedRegionSpec(4, 2.0), samples, seed)
    ell = batch.ells[:, 0]
    th = fold_theta(batch.thetas[:, 0])
    counts, _, _ = np.histogram2d(ell, th, bins=bins, range=[[0, 2], [0, np.pi]])
    p = float(stats.chisquare(counts.ravel()).pvalue)
    return _lower(f"n=4 r=2 uniform in (ell, theta), chi2 {bins}x{bins}", p, 0.01)


def check_mc_vs_quadrature(r_grid=SCAN_GRID, samples: int = 100_000, seed: int = 7,
                           runtime_budget: float = 120.0) -> list[Check]:
    out = []
    for r in r_grid:
        t0 = time.perf_counter()
        mc = crofton.kappa_bar(r, "monte_carlo", samples, seed)
        elapsed = time.perf_counter() - t0
        q = crofton.kappa_bar(r)
        z = abs(mc.value - q.value) / mc.std_error
        c = _upper(f"MC vs quadrature kbar at r={r:.2f} (z-score)", z, 3.0,
                   f"mc={mc.value:.6f}+-{mc.std_error:.2g} quad={q.value:.6f} t={elapsed:.1f}s")
        c.passed = c.passed and elapsed < runtime_budget
        out.append(c)
    return out


def check_extreme(ns=(4, 6), samples: int = 10_000, seed: int = 7, tol: float = 1e-8) -> list[Check]:
    out = []
    for n in ns:
        rep = knotproxy.extreme_confinement_check(n, samples, seed, tol)
        out.append(_lower(f"diameter-1 {n}-gons have kappa >= 2 pi n/3 (min - bound)",
                          rep.report.min_curvature - rep.bound, -tol,
                          f"min={rep.report.min_curvature:.6f} bound={rep.bound:.6f}"))
    return out


def check_loose(n: int = 6, samples: int = 10_000, seed: int = 7) -> list[Check]:
    rep = knotproxy.loose_confinement_check(n, (0.2, 0.1, 0.05, 0.025), samples, seed)
    devs = np.array(rep.max_deviation)
    decreasing = bool(np.all(np.diff(devs) < 0))
    slope = rep.exponent
    idx = rep.epsilons.index(0.05)
    kmax = rep.reports[idx].max_curvature
    slope_ok = 0.4 <= slope <= 0.6
    return [
        Check("max|kappa - 2pi| log-log slope in [0.4, 0.6]", 0.1, slope,
              0.1 - abs(slope - 0.5), slope_ok and decreasing,
              f"maxima={np.round(devs, 5).tolist()} decreasing={decreasing}"),
        _upper("all kappa < 4 pi at eps=0.05 (max kappa - 4pi)", kmax - 4 * np.pi, 0.0),
    ]


def check_asymptote(samples: int = 100_000, seed: int = 7) -> Check:
    rows = knotproxy.asymptote_check((8, 64), samples, seed)
    d8, d64 = rows[0].deviation, rows[1].deviation
    sig = float(np.hypot(rows[0].mean.std_error, rows[1].mean.std_error))
    return _upper("|dev(64)| <= |dev(8)| + 3 sigma", abs(d64) - abs(d8), 3 * sig,
                  f"dev8={d8:.4f} dev64={d64:.4f}")


# ------------------------------------------------------------------ suites


SUITES = ("lemmas", "dominance", "crofton", "alpha", "knotproxy", "all")


def run_suite(suite: str, seed: int = 7, samples: int = 10_000) -> list[Check]:
    """Run a named group of checks.

    ``samples`` is the accepted-sample budget of the extreme and loose
    confinement checks; the Monte Carlo cross-check and the asymptote use ten
    times as many, so the default reproduces the full-size runs.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    checks: list[Check] = []
    if suite in ("lemmas", "all"):
        checks += check_closed_forms()
        checks += check_curvature_monotone()
        checks += check_star_shape()
        checks.append(check_psi1())
        checks.append(check_psi2())
    if suite in ("dominance", "all"):
        checks += check_dominance()
        checks += check_inequality_chain()
    if suite in ("alpha", "all"):
        checks += check_alpha()
    if suite in ("crofton", "all"):
        checks += check_crofton()
        checks.append(check_monotone_curve())
        checks += check_mc_vs_quadrature(samples=10 * samples, seed=seed)
    if suite in ("knotproxy", "all"):
        checks += check_extreme(samples=samples, seed=seed)
        checks += check_loose(samples=samples, seed=seed)
        checks.append(check_asymptote(samples=10 * samples, seed=seed))
    return checks
