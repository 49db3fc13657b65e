# cython: language_level=3
# cython: boundscheck=False
# cython: cdivision=True
"""Compiled stepping kernels.

Twin of ``funnelsim._kernels_py``; same functions, same operation
order.  Built with -ffp-contract=off so results are bit-identical to
the pure-Python fallback.  Keep both files in sync when editing.
"""

from libc.math cimport cos, fmod, sin, sqrt, M_PI

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _wrap(double angle):
    cdef double a = fmod(angle, TWO_PI)
    if a > M_PI:
        a -= TWO_PI
    elif a <= -M_PI:
        a += TWO_PI
    return a


def wrap_angle(double angle):
    """Map an angle in radians to (-pi, pi]."""
    return _wrap(angle)


def barrier_value(double x, double y, double z, double a):
    """Funnel barrier h = x - a * sqrt(l) with l = sqrt(y^2 + z^2)."""
    cdef double l = sqrt(y * y + z * z)
    return x - a * sqrt(l)


def barrier_gradient(double x, double y, double z, double a):
    """Lateral barrier partials (d h/d y, d h/d z); the axial partial is 1.

    Caller must guarantee l = sqrt(y^2 + z^2) > 0.
    """
    cdef double l = sqrt(y * y + z * z)
    cdef double d = 2.0 * (l * sqrt(l))
    return (-(a * y) / d, -(a * z) / d)


cdef inline (double, double, double, double) _filter(
        double ux, double uy, double uz,
        double x, double y, double z, double a, double gamma):
    cdef double l = sqrt(y * y + z * z)
    cdef double sl = sqrt(l)
    cdef double h = x - a * sl
    cdef double d = 2.0 * (l * sl)
    cdef double gy = -(a * y) / d
    cdef double gz = -(a * z) / d
    cdef double margin = ux + gy * uy + gz * uz + gamma * h
    cdef double lam
    if margin >= 0.0:
        return (ux, uy, uz, h)
    lam = -margin / (1.0 + gy * gy + gz * gz)
    return (ux + lam, uy + lam * gy, uz + lam * gz, h)


def filter_velocity(double ux, double uy, double uz,
                    double x, double y, double z, double a, double gamma):
    """Minimally-invasive velocity filter, closed form.

    Solves min ||u - u_nom||^2 s.t. grad(h) . u >= -gamma * h for the
    single linear constraint: if the nominal input already satisfies the
    constraint it is returned unchanged, otherwise it is shifted along
    grad(h) so the constraint holds with equality.

    Returns (ux*, uy*, uz*, h).  Caller must guarantee l > 0.
    """
    return _filter(ux, uy, uz, x, y, z, a, gamma)


def control_cascade(p, double psi, target_pos, r_wt, double psi_d, kp,
                    double k_psi, double v_max, double yaw_rate_max,
                    double a, double gamma, double l_eps):
    """One outer-loop control tick.

    Pseudo-velocity toward the target origin, rotation into the target
    frame, barrier filtering (skipped inside the axis cone l < l_eps),
    rotation back to world, direction-preserving speed saturation, and
    the proportional yaw-rate law.

    p, target_pos: world positions (3-tuples); r_wt: row-major 3x3
    world-from-target rotation (9-tuple); kp: row-major 3x3 gain.

    Returns (ux, uy, uz, yaw_rate, h, on_axis) with the velocity in the
    world frame.
    """
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double tx = target_pos[0], ty = target_pos[1], tz = target_pos[2]
    cdef double r00 = r_wt[0], r01 = r_wt[1], r02 = r_wt[2]
    cdef double r10 = r_wt[3], r11 = r_wt[4], r12 = r_wt[5]
    cdef double r20 = r_wt[6], r21 = r_wt[7], r22 = r_wt[8]
    cdef double k00 = kp[0], k01 = kp[1], k02 = kp[2]
    cdef double k10 = kp[3], k11 = kp[4], k12 = kp[5]
    cdef double k20 = kp[6], k21 = kp[7], k22 = kp[8]

    cdef double dx = px - tx
    cdef double dy = py - ty
    cdef double dz = pz - tz
    # UAV position in the target frame: rel = R^T (p - t)
    cdef double relx = r00 * dx + r10 * dy + r20 * dz
    cdef double rely = r01 * dx + r11 * dy + r21 * dz
    cdef double relz = r02 * dx + r12 * dy + r22 * dz
    # pseudo-velocity toward the contact point, world frame: Kp (t - p)
    cdef double uwx = -(k00 * dx + k01 * dy + k02 * dz)
    cdef double uwy = -(k10 * dx + k11 * dy + k12 * dz)
    cdef double uwz = -(k20 * dx + k21 * dy + k22 * dz)
    # nominal input in the target frame: u_T = R^T u_W
    cdef double utx = r00 * uwx + r10 * uwy + r20 * uwz
    cdef double uty = r01 * uwx + r11 * uwy + r21 * uwz
    cdef double utz = r02 * uwx + r12 * uwy + r22 * uwz

    cdef double l = sqrt(rely * rely + relz * relz)
    cdef bint on_axis
    cdef double h, sx, sy, sz
    if l < l_eps:
        on_axis = True
        h = relx - a * sqrt(l)
        sx = utx
        sy = uty
        sz = utz
    else:
        on_axis = False
        sx, sy, sz, h = _filter(utx, uty, utz, relx, rely, relz, a, gamma)

    # back to world: u_W* = R u_T*
    cdef double ux = r00 * sx + r01 * sy + r02 * sz
    cdef double uy = r10 * sx + r11 * sy + r12 * sz
    cdef double uz = r20 * sx + r21 * sy + r22 * sz
    cdef double speed = sqrt(ux * ux + uy * uy + uz * uz)
    cdef double scale
    if speed > v_max:
        scale = v_max / speed
        ux *= scale
        uy *= scale
        uz *= scale

    cdef double rate = k_psi * _wrap(psi_d - psi)
    if rate > yaw_rate_max:
        rate = yaw_rate_max
    elif rate < -yaw_rate_max:
        rate = -yaw_rate_max
    return (ux, uy, uz, rate, h, on_axis)


def step_kinematic(p, double psi, u, double yaw_rate, double dt):
    """Euler step of the kinematic plant (velocity commanded directly).

    Returns (px, py, pz, psi).
    """
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double ux = u[0], uy = u[1], uz = u[2]
    return (px + ux * dt, py + uy * dt, pz + uz * dt,
            _wrap(psi + yaw_rate * dt))


cdef inline (double, double) _pid_axis(double err, double integ,
                                       double prev_err, double kp, double ki,
                                       double kd, double dt,
                                       double feed_forward, double f_max):
    cdef double cand = integ + err * dt
    cdef double deriv = (err - prev_err) / dt
    cdef double raw = kp * err + ki * cand + kd * deriv + feed_forward
    cdef double force, new_integ
    if raw > f_max:
        force = f_max
        new_integ = integ if err > 0.0 else cand
    elif raw < -f_max:
        force = -f_max
        new_integ = integ if err < 0.0 else cand
    else:
        force = raw
        new_integ = cand
    return (force, new_integ)


def pid_axis_force(double err, double integ, double prev_err, double kp,
                   double ki, double kd, double dt, double feed_forward,
                   double f_max):
    """Single-axis velocity PID with output clamp and conditional
    anti-windup (the integrator freezes when pushing further into
    saturation).  Returns (force, new_integral).
    """
    return _pid_axis(err, integ, prev_err, kp, ki, kd, dt, feed_forward, f_max)


def step_dynamic(p, v, double psi, integ, prev_err, u_cmd, double yaw_rate,
                 f_ext, double mass, double g, double kp, double ki,
                 double kd, double f_max, double dt):
    """Semi-implicit Euler step of the force-driven plant.

    Per-axis velocity PID plus gravity feed-forward on z, each axis
    clamped to +/- f_max; external (contact) force f_ext added before
    integration.  Yaw integrates the commanded rate directly.

    Returns (px, py, pz, vx, vy, vz, psi, ix, iy, iz, ex, ey, ez) where
    i* are updated integrator states and e* the velocity errors to store
    as previous errors.
    """
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double vx = v[0], vy = v[1], vz = v[2]
    cdef double ix0 = integ[0], iy0 = integ[1], iz0 = integ[2]
    cdef double ex0 = prev_err[0], ey0 = prev_err[1], ez0 = prev_err[2]
    cdef double ucx = u_cmd[0], ucy = u_cmd[1], ucz = u_cmd[2]
    cdef double fex = f_ext[0], fey = f_ext[1], fez = f_ext[2]

    cdef double ex = ucx - vx
    cdef double ey = ucy - vy
    cdef double ez = ucz - vz
    cdef double fx, fy, fz, ix, iy, iz
    fx, ix = _pid_axis(ex, ix0, ex0, kp, ki, kd, dt, 0.0, f_max)
    fy, iy = _pid_axis(ey, iy0, ey0, kp, ki, kd, dt, 0.0, f_max)
    fz, iz = _pid_axis(ez, iz0, ez0, kp, ki, kd, dt, mass * g, f_max)

    cdef double ax = (fx + fex) / mass
    cdef double ay = (fy + fey) / mass
    cdef double az = (fz + fez) / mass - g
    vx += ax * dt
    vy += ay * dt
    vz += az * dt
    px += vx * dt
    py += vy * dt
    pz += vz * dt
    psi = _wrap(psi + yaw_rate * dt)
    return (px, py, pz, vx, vy, vz, psi, ix, iy, iz, ex, ey, ez)


def contact_state(p, v, double psi, double yaw_rate, double tip_offset,
                  plane_point, plane_normal, double k_a, double d_a):
    """Spring-damper normal force at the end-effector tip.

    The tip sits tip_offset ahead of the body origin along body +x.
    plane_normal is the outward unit normal of the contact surface;
    penetration is depth beyond the plane along -normal.  Force is
    floored at zero (no adhesion).

    Returns (force, penetration, penetration_rate, fx, fy, fz) with
    (fx, fy, fz) = force * normal, the reaction on the vehicle.
    """
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double vx = v[0], vy = v[1], vz = v[2]
    cdef double qx = plane_point[0], qy = plane_point[1], qz = plane_point[2]
    cdef double nx = plane_normal[0], ny = plane_normal[1], nz = plane_normal[2]
    cdef double c = cos(psi)
    cdef double s = sin(psi)
    cdef double tipx = px + c * tip_offset
    cdef double tipy = py + s * tip_offset
    cdef double tipz = pz
    cdef double pen = (qx - tipx) * nx + (qy - tipy) * ny + (qz - tipz) * nz
    cdef double tvx, tvy, rate, f
    if pen <= 0.0:
        return (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    tvx = vx - yaw_rate * s * tip_offset
    tvy = vy + yaw_rate * c * tip_offset
    rate = -(tvx * nx + tvy * ny + vz * nz)
    f = k_a * pen + d_a * rate
    if f < 0.0:
        f = 0.0
    return (f, pen, rate, f * nx, f * ny, f * nz)
