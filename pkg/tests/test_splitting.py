import math

import numpy as np
import pytest

from svexner.model import G, CellState, FieldState, Frozen, Grass, PositivityFailure, ThresholdGrass
from svexner.pressure_riemann import star_state_iterative, star_state_linearized
from svexner.splitting import (
    GAUSS1,
    BoundarySpec,
    FixedDepth,
    InflowDischarge,
    Periodic,
    Reflective,
    Transmissive,
    advection_flux_first_order,
    apply_boundary,
    compatibility_residual,
    fluctuations,
    gauss_rule,
    integrate,
    run_first_order,
    step_first_order,
)
from tests.conftest import periodic_smooth_field

BED_L, BED_R = CellState(1, 0, 0), CellState(1, 0, 0.1)


class TestQuadrature:
    def test_three_point_rule(self):
        r = gauss_rule(3)
        d = math.sqrt(15) / 10
        assert r.points == (0.5, 0.5 - d, 0.5 + d)
        assert sum(r.weights) == pytest.approx(1.0, abs=1e-15)
        # exact for quintics on [0, 1]
        assert sum(w * s ** 5 for s, w in zip(r.points, r.weights)) == pytest.approx(1 / 6)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            gauss_rule(4)


class TestFluctuations:
    def test_lake_at_rest(self):
        L, R = CellState(0.8, 0, 0.2), CellState(0.95, 0, 0.05)
        p = fluctuations(L, R, star_state_iterative(L, R))
        # zero up to the rounding of h_L - (eta_R - eta_L) versus h_R
        np.testing.assert_allclose(p.d_minus, 0.0, atol=1e-14)
        np.testing.assert_allclose(p.d_plus, 0.0, atol=1e-14)

    def test_bed_step_hand_evaluation(self):
        s = star_state_linearized(BED_L, BED_R)
        p = fluctuations(BED_L, BED_R, s)
        # midpoint depth along Q_i -> Q*R is (1 + 0.95)/2; along Q*L -> Q_{i+1} it is (1.05 + 1)/2
        np.testing.assert_allclose(p.d_minus, [s.q_star, G * 0.975 * (0.95 + 0.1 - 1.0), 0.0],
                                   rtol=1e-12)
        np.testing.assert_allclose(p.d_plus, [-s.q_star, G * 1.025 * (1.0 + 0.1 - 1.05), 0.0],
                                   rtol=1e-12)
        assert p.d_minus[1] == pytest.approx(0.478043, abs=1e-6)
        assert p.d_plus[1] == pytest.approx(0.502557, abs=1e-6)

    def test_structure(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a = CellState(rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
            b = CellState(rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
            s = star_state_iterative(a, b)
            p = fluctuations(a, b, s)
            assert p.d_minus[2] == 0.0 and p.d_plus[2] == 0.0
            assert p.d_minus[0] == s.q_star - a.q
            assert p.d_minus[0] + p.d_plus[0] == pytest.approx(b.q - a.q, abs=1e-15)

    def test_quadrature_invariance(self):
        s = star_state_iterative(BED_L, BED_R)
        p1 = fluctuations(BED_L, BED_R, s, gauss_rule(1))
        p3 = fluctuations(BED_L, BED_R, s, gauss_rule(3))
        np.testing.assert_allclose(p1.d_minus, p3.d_minus, rtol=1e-14)
        np.testing.assert_allclose(p1.d_plus, p3.d_plus, rtol=1e-14)


class TestCompatibility:
    def test_trivial_cases(self):
        a = CellState(1.2, 0.3, 0.1)
        np.testing.assert_allclose(compatibility_residual(a, a, star_state_iterative(a, a)), 0,
                                   atol=1e-15)
        L, R = CellState(0.8, 0, 0.2), CellState(0.95, 0, 0.05)
        np.testing.assert_allclose(compatibility_residual(L, R, star_state_iterative(L, R)), 0,
                                   atol=1e-14)

    def test_midpoint_paths_are_compatible(self):
        # with segment paths through the star states the residual vanishes identically
        L = CellState(1.0, 0.2, 0.0)
        for k in range(5):
            R = CellState(1 + 0.3 / 2 ** k, 0.2 - 0.4 / 2 ** k, 0.1 / 2 ** k)
            for star in (star_state_linearized(L, R), star_state_iterative(L, R)):
                r = compatibility_residual(L, R, star)
                assert r[2] == 0.0
                np.testing.assert_allclose(r, 0.0, atol=1e-14)


class TestAdvectionFlux:
    def test_zero_star(self):
        f = advection_flux_first_order(CellState(1, 1, 0), CellState(1, 1, 0), 0.0, Grass(0.01, 3))
        np.testing.assert_array_equal(f.f, 0.0)

    def test_grass_upwind_left(self):
        f = advection_flux_first_order(CellState(1, 1, 0), CellState(2, -1, 0), 0.5, Grass(0.01, 3))
        np.testing.assert_allclose(f.f, [0, 0.5, 0.005], rtol=1e-14)

    def test_upwind_right(self):
        f = advection_flux_first_order(CellState(1, 1, 0), CellState(2, -1, 0), -0.5, Grass(0.01, 3))
        u = -0.5
        np.testing.assert_allclose(f.f, [0, -0.5 * u, -0.5 * 0.01 * u * u / 2], rtol=1e-14)

    def test_dam_break_initial(self):
        f = advection_flux_first_order(CellState(1, 0, 0), CellState(0.1, 0, 0), 1.010788,
                                       Grass(0.01, 3))
        np.testing.assert_array_equal(f.f, 0.0)

    def test_threshold_zero_velocity_limit(self):
        c = ThresholdGrass(0.01, 1.5, -0.5)
        f = advection_flux_first_order(CellState(1, 0, 0), CellState(1, 0, 0), 0.2, c)
        assert f.f[2] == 0.0


class TestBoundaries:
    def field(self, edge):
        Q = np.array([edge, (2.0, 0.0, 0.0), (2.0, 0.0, 0.0), edge]).T
        return FieldState.from_interior(*Q, dx=1.0)

    def ghosts(self, kind):
        f = apply_boundary(self.field((1.0, 2.0, 0.5)), BoundarySpec(kind, kind))
        return f.Q[:, 0], f.Q[:, -1]

    def test_transmissive(self):
        left, right = self.ghosts(Transmissive())
        np.testing.assert_array_equal(left, [1, 2, 0.5])

    def test_reflective(self):
        left, right = self.ghosts(Reflective())
        np.testing.assert_array_equal(left, [1, -2, 0.5])
        np.testing.assert_array_equal(right, [1, -2, 0.5])

    def test_inflow_discharge(self):
        f = apply_boundary(self.field((1.0, 0.5, 0.2)), BoundarySpec(InflowDischarge(0.6263)))
        np.testing.assert_array_equal(f.Q[:, 0], [1, 0.6263, 0.2])

    def test_fixed_depth(self):
        f = apply_boundary(self.field((1.0, 0.5, 0.2)), BoundarySpec(right=FixedDepth(0.7)))
        np.testing.assert_array_equal(f.Q[:, -1], [0.7, 0.5, 0.2])

    def test_periodic_wraps(self):
        f = FieldState.from_interior(np.arange(1.0, 7.0), np.zeros(6), np.zeros(6), 1.0, n_ghost=2)
        g = apply_boundary(f, BoundarySpec(Periodic(), Periodic()))
        np.testing.assert_array_equal(g.Q[0], [5, 6, 1, 2, 3, 4, 5, 6, 1, 2])

    def test_periodic_one_side(self):
        with pytest.raises(ValueError):
            BoundarySpec(Periodic(), Transmissive())


class TestFirstOrderStep:
    def test_well_balanced(self, lake_field):
        f = lake_field()
        g = step_first_order(f, 0.9 * f.dx / math.sqrt(G), Grass(0.01, 1.5),
                             bc=BoundarySpec(Reflective(), Reflective()))
        assert np.max(np.abs(g.interior - f.interior)) <= 1e-14

    def test_conservation_periodic(self):
        f = periodic_smooth_field(50, 1)
        bc = BoundarySpec(Periodic(), Periodic())
        out = run_first_order(f, Grass(0.01, 3), 100.0, bc, max_steps=1000)[-1]
        for r in (0, 2):
            assert abs(out.interior[r].sum() - f.interior[r].sum()) <= 1e-12 * abs(f.interior[r].sum())

    def test_frozen_flat_bed_keeps_eta_bitwise(self):
        M = 40
        h = 1 + 0.3 * (np.arange(M) < 20)
        f = FieldState.from_interior(h, np.zeros(M), np.full(M, 0.37), 0.25)
        out = run_first_order(f, Frozen(), 1.0)[-1]
        np.testing.assert_array_equal(out.eta, 0.37)

    def test_mirror_symmetry(self):
        M = 40
        rng = np.random.default_rng(4)
        h, q, eta = 1 + 0.2 * rng.random(M), 0.3 * rng.standard_normal(M), 0.1 * rng.random(M)
        a = FieldState.from_interior(h, q, eta, 0.5)
        b = FieldState.from_interior(h[::-1], -q[::-1], eta[::-1], 0.5)
        fa = step_first_order(a, 0.01, Grass(0.01, 3))
        fb = step_first_order(b, 0.01, Grass(0.01, 3))
        np.testing.assert_allclose(fa.h, fb.h[::-1], rtol=1e-12)
        np.testing.assert_allclose(fa.q, -fb.q[::-1], rtol=1e-12, atol=1e-13)
        np.testing.assert_allclose(fa.eta, fb.eta[::-1], rtol=1e-12)

    def test_ngp_invariance(self):
        f = periodic_smooth_field(40, 1, seed=5)
        a = step_first_order(f, 0.05, Grass(0.01, 3), quad=gauss_rule(1))
        b = step_first_order(f, 0.05, Grass(0.01, 3), quad=gauss_rule(3))
        np.testing.assert_allclose(a.interior, b.interior, rtol=1e-13)

    def test_positivity_failure(self):
        f = FieldState.from_interior(np.array([1.0, 1.0, 0.05, 1.0, 1.0]),
                                     np.array([0, -2.0, 0, 2.0, 0]), np.zeros(5), 0.1)
        with pytest.raises(PositivityFailure) as exc:
            step_first_order(f, 0.1, Frozen())
        assert exc.value.cell == 1 and exc.value.t == pytest.approx(0.1) and exc.value.h < 0


class TestIntegrate:
    def test_zero_final_time(self, lake_field):
        f = lake_field()
        out = run_first_order(f, Grass(0.01, 1.5), 0.0)
        assert len(out) == 1 and out[0].t == 0.0
        np.testing.assert_array_equal(out[0].interior, f.interior)

    def test_lands_on_output_times(self):
        f = periodic_smooth_field(30, 1)
        bc = BoundarySpec(Periodic(), Periodic())
        out = run_first_order(f, Frozen(), 1.0, bc, output_times=[0.25, 0.5])
        assert [s.t for s in out] == [0.25, 0.5, 1.0]

    def test_max_steps(self):
        f = periodic_smooth_field(30, 1)
        n = []
        out = integrate(f, lambda s, dt: step_first_order(s, dt, Frozen(), bc=BoundarySpec(
            Periodic(), Periodic())), 100.0, max_steps=7, on_step=lambda s, dt: n.append(dt))
        assert len(n) == 7 and out[-1].t < 100.0
