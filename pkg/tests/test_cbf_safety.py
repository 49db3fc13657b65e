import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from funnelsim.cbf_safety import (BarrierParams, barrier_gradient,
                                  barrier_value, evaluate_barrier,
                                  lateral_radius, qp_oracle, safety_filter)
from funnelsim.errors import AxisSingularityError, QPNonConvergenceError
from funnelsim.geometry import RelativePosition

PARAMS = BarrierParams(a=3.0, gamma=1.0, l_eps=1e-3)


def finite_difference_gradient(rel, params, step=1e-6):
    """Independent oracle: central differences of the barrier value."""
    out = np.empty(3)
    base = np.asarray(rel, dtype=float)
    for i in range(3):
        hi = base.copy()
        lo = base.copy()
        hi[i] += step
        lo[i] -= step
        out[i] = (barrier_value(RelativePosition(*hi), params)
                  - barrier_value(RelativePosition(*lo), params)) / (2.0 * step)
    return out


def sample_off_axis(rng, n, l_min=0.1):
    """Random relative positions with lateral radius >= l_min."""
    out = []
    while len(out) < n:
        rel = RelativePosition(*rng.uniform(-3.0, 3.0, 3))
        if lateral_radius(rel) >= l_min:
            out.append(rel)
    return out


class TestBarrierParams:
    @pytest.mark.parametrize("kwargs", [
        {"a": 0.0}, {"a": -1.0}, {"a": 1.0, "gamma": 0.0},
        {"a": 1.0, "l_eps": -1e-3},
    ])
    def test_rejects_non_positive(self, kwargs):
        with pytest.raises(ValueError):
            BarrierParams(**kwargs)


class TestBarrierValue:
    def test_on_axis_equals_x(self):
        assert barrier_value(RelativePosition(2.0, 0.0, 0.0), PARAMS) == 2.0

    def test_hand_evaluated_case(self):
        # l = sqrt(1) = 1, h = 1 - 3 * 1 = -2
        assert barrier_value(RelativePosition(1.0, 1.0, 0.0), PARAMS) == \
            pytest.approx(-2.0, abs=1e-15)

    def test_radial_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x, y, z = rng.uniform(-3.0, 3.0, 3)
            a = barrier_value(RelativePosition(x, y, z), PARAMS)
            b = barrier_value(RelativePosition(x, -y, -z), PARAMS)
            assert a == pytest.approx(b, abs=1e-15)

    def test_rotational_symmetry_about_axis(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            x, y, z = rng.uniform(-3.0, 3.0, 3)
            r = np.hypot(y, z)
            a = barrier_value(RelativePosition(x, y, z), PARAMS)
            b = barrier_value(RelativePosition(x, r, 0.0), PARAMS)
            assert a == pytest.approx(b, abs=1e-12)


class TestBarrierGradient:
    def test_hand_evaluated_case(self):
        # l = 1: grad = (1, -3*1/(2*1), 0)
        g = barrier_gradient(RelativePosition(5.0, 1.0, 0.0), PARAMS)
        assert np.allclose(g, [1.0, -1.5, 0.0], atol=1e-15)

    def test_x_component_is_exactly_one(self):
        rng = np.random.default_rng(9)
        for rel in sample_off_axis(rng, 50):
            assert barrier_gradient(rel, PARAMS)[0] == 1.0

    def test_odd_in_y_and_z(self):
        rng = np.random.default_rng(10)
        for rel in sample_off_axis(rng, 50):
            g = barrier_gradient(rel, PARAMS)
            g_flip = barrier_gradient(
                RelativePosition(rel.x, -rel.y, -rel.z), PARAMS)
            assert g_flip[1] == pytest.approx(-g[1], abs=1e-12)
            assert g_flip[2] == pytest.approx(-g[2], abs=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for rel in sample_off_axis(rng, 200):
            g = barrier_gradient(rel, PARAMS)
            fd = finite_difference_gradient(rel, PARAMS)
            assert np.linalg.norm(fd - g) / np.linalg.norm(g) <= 1e-5

    def test_raises_on_axis(self):
        with pytest.raises(AxisSingularityError):
            barrier_gradient(RelativePosition(1.0, 1e-4, 0.0), PARAMS)


class TestEvaluateBarrier:
    def test_on_axis_flag(self):
        ev = evaluate_barrier(RelativePosition(1.0, 0.0, 0.0), PARAMS)
        assert ev.on_axis
        assert ev.h == 1.0

    def test_off_axis_flag_boundary(self):
        just_out = RelativePosition(1.0, PARAMS.l_eps, 0.0)
        assert not evaluate_barrier(just_out, PARAMS).on_axis
        just_in = RelativePosition(1.0, PARAMS.l_eps * 0.999, 0.0)
        assert evaluate_barrier(just_in, PARAMS).on_axis


class TestSafetyFilter:
    def test_inactive_constraint_returns_input_bits(self):
        rel = RelativePosition(2.0, 0.1, 0.0)
        u = np.array([-0.1, 0.0, 0.0])
        out = safety_filter(u, rel, PARAMS)
        assert out.tolist() == u.tolist()

    def test_worked_violating_case_matches_oracle(self):
        # h = -2, grad = (1, -1.5, 0), lambda = 2 / 3.25
        rel = RelativePosition(1.0, 1.0, 0.0)
        u = np.zeros(3)
        out = safety_filter(u, rel, PARAMS)
        lam = 2.0 / 3.25
        assert np.allclose(out, [lam, -1.5 * lam, 0.0], atol=1e-12)
        oracle = qp_oracle(u, barrier_gradient(rel, PARAMS),
                           barrier_value(rel, PARAMS), PARAMS.gamma)
        assert np.linalg.norm(out - oracle) <= 1e-8

    def test_grid_minimality(self):
        # no feasible grid point is closer to the nominal input
        rel = RelativePosition(1.0, 1.0, 0.0)
        u = np.zeros(3)
        out = safety_filter(u, rel, PARAMS)
        dist = np.linalg.norm(out - u)
        g = barrier_gradient(rel, PARAMS)
        h = barrier_value(rel, PARAMS)
        grid = np.linspace(-2.0, 2.0, 21)
        for cx in grid:
            for cy in grid:
                for cz in (-1.0, -0.5, 0.0, 0.5, 1.0):
                    cand = np.array([cx, cy, cz])
                    if g @ cand >= -PARAMS.gamma * h:
                        assert np.linalg.norm(cand - u) >= dist - 1e-9

    def test_raises_on_axis(self):
        with pytest.raises(AxisSingularityError):
            safety_filter(np.zeros(3), RelativePosition(1.0, 0.0, 0.0), PARAMS)

    @settings(max_examples=200, deadline=None)
    @given(st.tuples(*[st.floats(-3.0, 3.0) for _ in range(6)]))
    def test_constraint_and_idempotence(self, vals):
        x, y, z, ux, uy, uz = vals
        rel = RelativePosition(x, y, z)
        if lateral_radius(rel) < PARAMS.l_eps:
            return
        u = np.array([ux, uy, uz])
        out = safety_filter(u, rel, PARAMS)
        g = barrier_gradient(rel, PARAMS)
        h = barrier_value(rel, PARAMS)
        assert g @ out + PARAMS.gamma * h >= -1e-9
        again = safety_filter(out, rel, PARAMS)
        assert np.linalg.norm(again - out) <= 1e-9


class TestQpOracle:
    def test_inactive_returns_nominal(self):
        u = np.array([1.0, 2.0, 3.0])
        out = qp_oracle(u, np.array([1.0, 0.0, 0.0]), h=5.0, gamma=1.0)
        assert np.allclose(out, u, atol=1e-12)

    def test_zero_gradient_rejected(self):
        with pytest.raises(ValueError):
            qp_oracle(np.zeros(3), np.zeros(3), h=1.0, gamma=1.0)

    def test_budget_exhaustion_raises(self):
        with pytest.raises(QPNonConvergenceError):
            qp_oracle(np.array([0.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]),
                      h=-5.0, gamma=1.0, max_iterations=1)

    def test_randomized_cross_check(self):
        rng = np.random.default_rng(12)
        worst = 0.0
        checked = 0
        while checked < 300:
            rel = RelativePosition(*rng.uniform(-3.0, 3.0, 3))
            if lateral_radius(rel) < 0.1:
                continue
            u = rng.uniform(-2.0, 2.0, 3)
            g = barrier_gradient(rel, PARAMS)
            h = barrier_value(rel, PARAMS)
            if g @ u + PARAMS.gamma * h >= 0.0:
                continue
            checked += 1
            closed = safety_filter(u, rel, PARAMS)
            iterative = qp_oracle(u, g, h, PARAMS.gamma)
            worst = max(worst, float(np.linalg.norm(closed - iterative)))
        assert worst <= 1e-7
