import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from confpoly.crofton import (
    CurvatureCurve, Estimate, Measure, Method, area_region, boundary_measure_for, crofton_residual,
    crofton_terms, kappa_bar, kappa_bar_swapped, kappa_boundary, monotonicity_scan,
)
from confpoly.geom import quad_curvature
from confpoly.measures import RegimeError, mu_B_grid, theta_max
from confpoly.moduli import ConfinedRegionSpec, sample_confined, sample_unconfined
from confpoly.quadrature import integrate, panel_nodes

SQRT2 = math.sqrt(2)


def scipy_kappa_bar(r):
    top = min(r, 2.0)
    star = math.sqrt(max(4 - r * r, 0.0))
    segs = [(0, star), (star, top)] if 0 < star < top else [(0, top)]
    num = area = 0.0
    for a, b in segs:
        num += sp_integrate.dblquad(lambda th, l: quad_curvature(l, th), a, b, 0,
                                    lambda l: theta_max(l, r), epsabs=1e-12, epsrel=1e-12)[0]
        area += sp_integrate.quad(lambda l: theta_max(l, r), a, b, epsabs=1e-13, limit=200)[0]
    return num / area, area


class TestQuadrature:
    def test_polynomial_exact(self):
        x, w = panel_nodes(0.0, 2.0, 1)
        assert np.dot(w, x**5) == pytest.approx(2**6 / 6, rel=1e-14)

    def test_inverse_sqrt_endpoint(self):
        val, _ = integrate(lambda x: 1 / np.sqrt(1 - x), 0.0, 1.0, "right")
        assert val == pytest.approx(2.0, abs=1e-12)
        val, _ = integrate(lambda x: 1 / np.sqrt(x), 0.0, 1.0, "left")
        assert val == pytest.approx(2.0, abs=1e-12)

    def test_both_endpoints(self):
        val, _ = integrate(lambda x: 1 / np.sqrt(x * (1 - x)), 0.0, 1.0, "both")
        assert val == pytest.approx(math.pi, abs=1e-10)

    def test_empty_interval(self):
        assert integrate(np.sin, 1.0, 1.0) == (0.0, 0.0)


class TestArea:
    def test_full_chart(self):
        assert area_region(2.0) == pytest.approx(2 * math.pi, abs=1e-12)

    @pytest.mark.parametrize("r", [1.0, 1.2, 1.5, 1.9])
    def test_scipy_oracle(self, r):
        assert area_region(r) == pytest.approx(scipy_kappa_bar(r)[1], abs=1e-10)

    def test_non_decreasing(self):
        a = [area_region(r) for r in np.linspace(1, 2, 41)]
        assert np.diff(a).min() >= 0

    def test_brute_force_grid(self):
        # midpoint counting on a fine chart grid
        r = 1.3
        n = 2000
        L, T = np.meshgrid((np.arange(n) + 0.5) * 2 / n, (np.arange(n) + 0.5) * np.pi / n, indexing="ij")
        inside = (L <= r) & (T <= theta_max(L, r))
        assert inside.mean() * 2 * np.pi == pytest.approx(area_region(r), abs=5e-3)

    def test_matches_sampler(self):
        r = 1.2
        batch = sample_confined(ConfinedRegionSpec(4, r), 50_000, seed=12)
        p = batch.acceptance_rate
        mc = p * batch.meta["box_volume"] / 2
        se = math.sqrt(p * (1 - p) / batch.proposals) * batch.meta["box_volume"] / 2
        assert abs(mc - area_region(r)) < 3 * se

    def test_range(self):
        with pytest.raises(ValueError):
            area_region(0.9)


class TestKappaBar:
    @pytest.mark.parametrize("r", [1.0, 1.2, 1.7, 2.0])
    def test_scipy_oracle(self, r):
        est = kappa_bar(r)
        assert est.method is Method.QUADRATURE
        assert est.value == pytest.approx(scipy_kappa_bar(r)[0], abs=1e-8)
        assert est.refinement_delta < 1e-7

    def test_unconfined_value(self):
        # uniform mean over [0, 2] x [0, pi]; E[arccos(ell/2)] = 1 gives exactly 8
        assert kappa_bar(2.0).value == pytest.approx(8.0, abs=1e-12)

    def test_r1_exceeds_r2(self):
        assert kappa_bar(1.0).value > kappa_bar(2.0).value

    def test_mc_agrees_at_r2(self):
        mc = kappa_bar(2.0, Method.MONTE_CARLO, 1_000_000, seed=3)
        assert mc.samples == 1_000_000
        assert abs(mc.value - kappa_bar(2.0).value) < 3 * mc.std_error

    def test_unconfined_mean(self):
        batch = sample_unconfined(4, 200_000, seed=4)
        k = quad_curvature(batch.ells[:, 0], np.where(batch.thetas[:, 0] > np.pi,
                                                      2 * np.pi - batch.thetas[:, 0], batch.thetas[:, 0]))
        se = k.std() / math.sqrt(len(k))
        assert abs(k.mean() - kappa_bar(2.0).value) < 3 * se

    @pytest.mark.parametrize("r", [1.1, 1.45, 1.8])
    def test_mc_agrees(self, r):
        mc = kappa_bar(r, "monte_carlo", 100_000, seed=5)
        assert abs(mc.value - kappa_bar(r).value) <= 3 * mc.std_error

    @pytest.mark.parametrize("r", [1.0, 1.2, 1.5, 1.9, 2.0])
    def test_swapped_twin(self, r):
        # swapping the two diagonals preserves both the region and the curvature
        assert kappa_bar_swapped(r).value == pytest.approx(kappa_bar(r).value, abs=1e-9)

    def test_bracketed(self):
        lo, hi = kappa_bar(2.0).value, kappa_bar(1.0).value
        for r in np.linspace(1, 2, 11):
            assert lo - 1e-9 <= kappa_bar(r).value <= hi + 1e-9

    def test_estimate_invariants(self):
        with pytest.raises(ValueError):
            Estimate(1.0, Method.QUADRATURE, std_error=-1.0)
        with pytest.raises(ValueError):
            Estimate(1.0, Method.MONTE_CARLO, 0.1, samples=0, seed=1)
        with pytest.raises(ValueError):
            Estimate(1.0, Method.MONTE_CARLO, 0.1, samples=10, seed=None)


class TestBoundary:
    @pytest.mark.parametrize("r", [1.1, 1.15, 1.2, 1.25, 1.3, 1.35])
    def test_ordering_chain(self, r):
        b = kappa_boundary(r, Measure.MU_B)
        i = kappa_boundary(r, Measure.MU_I)
        k = kappa_bar(r)
        err = b.error + i.error + k.error + 1e-12
        assert i.value - b.value > 10 * err
        assert k.value - i.value > 10 * err

    def test_nu_below_mean(self):
        assert kappa_boundary(1.5, Measure.NU_B).value < kappa_bar(1.5).value
        assert kappa_boundary(1.5, Measure.NU_I).value < kappa_bar(1.5).value

    def test_regime_error_names_interval(self):
        with pytest.raises(RegimeError, match="sqrt"):
            kappa_boundary(1.6, Measure.MU_B)
        with pytest.raises(RegimeError):
            kappa_boundary(2.5, Measure.NU_B)

    def test_measure_choice(self):
        assert boundary_measure_for(1.2) is Measure.MU_B
        assert boundary_measure_for(1.7) is Measure.NU_B

    @pytest.mark.parametrize("r", [1.05, 1.2, 1.35])
    def test_mu_B_matches_grid(self, r):
        # trapezoid on a fine grid of the tabulated measure, an independent route
        g_ell, g_th = mu_B_grid(r, 20001)
        num = np.trapezoid(g_ell.density * quad_curvature(r, g_ell.params), g_ell.params)
        num += np.trapezoid(g_th.density * quad_curvature(g_th.params, theta_max(g_th.params, r)),
                            g_th.params)
        assert num == pytest.approx(kappa_boundary(r, Measure.MU_B).value, abs=1e-6)


class TestCrofton:
    @pytest.mark.parametrize("r", [1.2, 1.7])
    def test_residual(self, r):
        assert crofton_residual(r) < 1e-3

    def test_slope_near_two(self):
        # above sqrt(2) the area grows like 2 pi (r - 1) all the way to r = 2, so the
        # ell = r arc stays active and the slope tends to (2 pi - 8) rather than 0
        t = crofton_terms(1.99)
        assert t.area_prime == pytest.approx(2 * math.pi, abs=1e-6)
        assert t.residual < 1e-3
        near = crofton_terms(1.999, h=5e-4)
        assert near.fd < t.fd < 0
        assert near.fd == pytest.approx(2 * math.pi - 8, abs=0.05)

    def test_needs_room(self):
        with pytest.raises(ValueError):
            crofton_terms(1.0005, h=1e-3)


class TestScan:
    def test_single_point(self):
        curve, verdict = monotonicity_scan([2.0])
        assert verdict.passed
        assert len(curve.r_values) == 1
        assert math.isnan(curve.crofton_residual[0])

    def test_coarse_grid_pass(self):
        curve, verdict = monotonicity_scan(np.linspace(1, 2, 6))
        assert verdict.passed
        assert np.all(np.diff([k.value for k in curve.kappa_bar]) <= 0)

    def test_workers_and_order_independent(self):
        grid = [1.3, 1.1, 1.9]
        c1, v1 = monotonicity_scan(grid, workers=1)
        c2, v2 = monotonicity_scan(sorted(grid), workers=3)
        assert [k.value for k in c1.kappa_bar] == [k.value for k in c2.kappa_bar]
        np.testing.assert_array_equal(c1.crofton_residual, c2.crofton_residual)
        assert v1 == v2

    def test_curve_validation(self):
        e = Estimate(1.0, Method.QUADRATURE)
        with pytest.raises(ValueError):
            CurvatureCurve(np.array([1.0, 1.0]), [e, e], np.zeros(2), np.zeros(2), np.zeros(2))
        with pytest.raises(ValueError):
            CurvatureCurve(np.array([1.0, 1.1]), [e], np.zeros(2), np.zeros(2), np.zeros(2))

    @given(st.lists(st.floats(1, 2), min_size=2, max_size=4, unique=True))
    @settings(max_examples=10, deadline=None)
    def test_random_grids_pass(self, grid):
        assert monotonicity_scan(grid, h=1e-3)[1].passed
