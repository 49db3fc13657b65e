import math

import numpy as np
import pytest

from funnelsim.controller import VelocityCommand
from funnelsim.errors import PlantInstabilityError
from funnelsim.geometry import Pose
from funnelsim.plant import (ArmParams, ContactSurface, PidGains, PlantParams,
                             PlantState, contact_force, step_dynamic,
                             step_kinematic)


def cmd(vx=0.0, vy=0.0, vz=0.0, yaw_rate=0.0):
    return VelocityCommand(np.array([vx, vy, vz]), yaw_rate)


class TestKinematicStep:
    def test_zero_command_only_advances_time(self):
        s0 = PlantState.at_rest(np.array([1.0, 2.0, 3.0]), yaw=0.3)
        s1 = step_kinematic(s0, cmd(), 0.01)
        assert np.allclose(s1.position, s0.position)
        assert s1.yaw == s0.yaw
        assert s1.time == pytest.approx(0.01)

    def test_constant_input_integrates_exactly(self):
        s = PlantState.at_rest(np.zeros(3))
        for _ in range(100):
            s = step_kinematic(s, cmd(vx=1.0), 0.01)
        assert abs(s.position[0] - 1.0) < 1e-12
        assert s.velocity[0] == 1.0

    def test_yaw_wraps(self):
        s = PlantState.at_rest(np.zeros(3), yaw=math.pi - 0.01)
        s = step_kinematic(s, cmd(yaw_rate=10.0), 0.01)
        assert -math.pi < s.yaw <= math.pi

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            step_kinematic(PlantState.at_rest(np.zeros(3)), cmd(), 0.0)


class TestContactForce:
    def test_zero_penetration(self):
        assert contact_force(0.0, 0.0, ArmParams()) == 0.0

    def test_hand_case(self):
        arm = ArmParams(k_a=100.0, d_a=0.0)
        assert contact_force(0.01, 0.0, arm) == pytest.approx(1.0)

    def test_no_adhesion(self):
        arm = ArmParams(k_a=100.0, d_a=10.0)
        assert contact_force(0.001, -5.0, arm) == 0.0

    def test_rejects_negative_penetration(self):
        with pytest.raises(ValueError):
            contact_force(-0.1, 0.0, ArmParams())

    def test_quasistatic_cycle_dissipates(self):
        # triangular load/unload: spring work cancels, damper work >= 0
        for d_a in (0.0, 4.0):
            arm = ArmParams(k_a=120.0, d_a=d_a)
            dt = 1e-3
            rate = 0.01
            work = 0.0
            pen = 0.0
            for phase_rate in (rate, -rate):
                for _ in range(1000):
                    pen = max(0.0, pen + phase_rate * dt)
                    f = contact_force(pen, phase_rate, arm)
                    work += f * phase_rate * dt
            assert work >= -1e-12


class TestDynamicStep:
    def test_hover_is_stationary(self):
        params = PlantParams()
        s = PlantState.at_rest(np.array([0.0, 0.0, 2.0]))
        for _ in range(2000):
            before = s.position.copy()
            s = step_dynamic(s, cmd(), params.dt, params)
            assert np.all(np.abs(s.position - before) < 1e-9)

    def test_velocity_step_tracks_command(self):
        params = PlantParams()
        s = PlantState.at_rest(np.zeros(3))
        for _ in range(3000):
            s = step_dynamic(s, cmd(vx=1.0), params.dt, params)
        assert abs(s.velocity[0] - 1.0) <= 0.05

    def test_matches_independent_scalar_pid_simulation(self):
        # independently coded single-axis reference: same PID structure,
        # plain Python floats, no shared code with the plant
        params = PlantParams(mass=2.0, f_max=15.0,
                             pid_velocity=PidGains(kp=5.0, ki=3.0, kd=0.0))
        dt = params.dt
        v_ref, integ, prev = 0.0, 0.0, 0.0
        trace_ref = []
        for _ in range(2000):
            err = 1.0 - v_ref
            cand = integ + err * dt
            force = 5.0 * err + 3.0 * cand + (err - prev) / dt * 0.0
            if force > params.f_max:
                force = params.f_max
                if err <= 0.0:
                    integ = cand
            elif force < -params.f_max:
                force = -params.f_max
                if err >= 0.0:
                    integ = cand
            else:
                integ = cand
            prev = err
            v_ref += force / params.mass * dt
            trace_ref.append(v_ref)

        s = PlantState.at_rest(np.zeros(3))
        trace = []
        for _ in range(2000):
            s = step_dynamic(s, cmd(vx=1.0), dt, params)
            trace.append(s.velocity[0])
        assert np.allclose(trace, trace_ref, atol=1e-12)

    def test_force_clip_gives_exact_acceleration(self):
        params = PlantParams(mass=2.0, f_max=4.0,
                             pid_velocity=PidGains(kp=100.0, ki=0.0, kd=0.0))
        s = PlantState.at_rest(np.zeros(3))
        s1 = step_dynamic(s, cmd(vx=10.0), params.dt, params)
        # x axis has no feed-forward: clipped force / mass exactly
        assert s1.velocity[0] == pytest.approx(params.f_max / params.mass
                                               * params.dt, abs=1e-15)

    def test_instability_raises(self):
        # proportional gain far beyond the semi-implicit stability limit
        params = PlantParams(mass=0.5, f_max=1e9,
                             pid_velocity=PidGains(kp=5e4, ki=0.0, kd=0.0),
                             speed_limit=20.0)
        s = PlantState.at_rest(np.zeros(3))
        with pytest.raises(PlantInstabilityError):
            for _ in range(5000):
                s = step_dynamic(s, cmd(vx=1.0), params.dt, params)

    def test_determinism(self):
        params = PlantParams()
        surface = ContactSurface(np.array([0.5, 0.0, 0.0]),
                                 np.array([1.0, 0.0, 0.0]))

        def rollout():
            s = PlantState.at_rest(np.array([1.0, 0.2, 0.1]))
            out = []
            for k in range(1500):
                s = step_dynamic(s, cmd(vx=-0.4, yaw_rate=0.1), params.dt,
                                 params, surface)
                out.append((s.position.tolist(), s.velocity.tolist(), s.yaw,
                            s.contact_force))
            return out

        assert rollout() == rollout()


class TestContactGeometry:
    def test_tip_crossing_detected(self):
        # facing the plane (yaw pi): body 0.25 m out, tip offset 0.3,
        # so the tip is already 5 cm through before the step
        params = PlantParams(tip_offset=0.3)
        surface = ContactSurface(np.zeros(3), np.array([1.0, 0.0, 0.0]))
        s = PlantState(np.array([0.25, 0.0, 0.0]), np.array([-0.1, 0.0, 0.0]),
                       yaw=math.pi)
        s1 = step_kinematic(s, cmd(vx=-0.1), 1e-3, params, surface)
        assert s1.arm_deflection == pytest.approx(0.05 + 0.1e-3, abs=1e-12)
        assert s1.arm_deflection_rate == pytest.approx(0.1, abs=1e-12)
        assert s1.contact_force > 0.0

    def test_no_contact_when_clear(self):
        params = PlantParams(tip_offset=0.3)
        surface = ContactSurface(np.zeros(3), np.array([1.0, 0.0, 0.0]))
        s = PlantState.at_rest(np.array([1.0, 0.0, 0.0]), yaw=math.pi)
        s1 = step_kinematic(s, cmd(), 1e-3, params, surface)
        assert s1.contact_force == 0.0
        assert s1.arm_deflection == 0.0

    def test_surface_from_target_pose(self):
        surface = ContactSurface.from_target_pose(
            Pose.from_yaw(np.array([1.0, 2.0, 3.0]), np.pi / 2))
        assert np.allclose(surface.point, [1.0, 2.0, 3.0])
        assert np.allclose(surface.normal, [0.0, 1.0, 0.0], atol=1e-12)

    def test_contact_reaction_slows_dynamic_plant(self):
        params = PlantParams(tip_offset=0.1,
                             arm=ArmParams(k_a=500.0, d_a=10.0))
        surface = ContactSurface(np.zeros(3), np.array([1.0, 0.0, 0.0]))
        s = PlantState(np.array([0.05, 0.0, 1.0]), np.array([-0.5, 0.0, 0.0]),
                       yaw=math.pi)
        with_contact = step_dynamic(s, cmd(vx=-0.5), params.dt, params, surface)
        without = step_dynamic(s, cmd(vx=-0.5), params.dt, params, None)
        assert with_contact.velocity[0] > without.velocity[0]


class TestParamValidation:
    def test_plant_params(self):
        with pytest.raises(ValueError):
            PlantParams(mass=0.0)
        with pytest.raises(ValueError):
            PlantParams(dt=-1e-3)

    def test_arm_params(self):
        with pytest.raises(ValueError):
            ArmParams(k_a=0.0)

    def test_surface_normal_nonzero(self):
        with pytest.raises(ValueError):
            ContactSurface(np.zeros(3), np.zeros(3))

    def test_state_invariants(self):
        s = PlantState.at_rest(np.zeros(3))
        assert s.arm_deflection == 0.0
        assert not s.position.flags.writeable
