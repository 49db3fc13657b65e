"""Pure-Python stepping kernels.

Fallback twin of the compiled extension ``funnelsim._kernels`` (see
``funnelsim.backend``).  Every function here mirrors its Cython
counterpart operation for operation, and the extension is compiled with
FP contraction disabled, so the two backends produce bit-identical
results.  Keep the arithmetic order in sync when editing either file.

All kernels take plain floats / tuples of floats and perform no
validation; argument checking lives in the public modules that wrap
them.
"""

from math import cos, fmod, pi, sin, sqrt

TWO_PI = 2.0 * pi


def wrap_angle(angle):
    """Map an angle in radians to (-pi, pi]."""
    a = fmod(angle, TWO_PI)
    if a > pi:
        a -= TWO_PI
    elif a <= -pi:
        a += TWO_PI
    return a


def barrier_value(x, y, z, a):
    """Funnel barrier h = x - a * sqrt(l) with l = sqrt(y^2 + z^2)."""
    l = sqrt(y * y + z * z)
    return x - a * sqrt(l)


def barrier_gradient(x, y, z, a):
    """Lateral barrier partials (d h/d y, d h/d z); the axial partial is 1.

    Caller must guarantee l = sqrt(y^2 + z^2) > 0.
    """
    l = sqrt(y * y + z * z)
    d = 2.0 * (l * sqrt(l))
    return (-(a * y) / d, -(a * z) / d)


def filter_velocity(ux, uy, uz, x, y, z, a, gamma):
    """Minimally-invasive velocity filter, closed form.

    Solves min ||u - u_nom||^2 s.t. grad(h) . u >= -gamma * h for the
    single linear constraint: if the nominal input already satisfies the
    constraint it is returned unchanged, otherwise it is shifted along
    grad(h) so the constraint holds with equality.

    Returns (ux*, uy*, uz*, h).  Caller must guarantee l > 0.
    """
    l = sqrt(y * y + z * z)
    sl = sqrt(l)
    h = x - a * sl
    d = 2.0 * (l * sl)
    gy = -(a * y) / d
    gz = -(a * z) / d
    margin = ux + gy * uy + gz * uz + gamma * h
    if margin >= 0.0:
        return (ux, uy, uz, h)
    lam = -margin / (1.0 + gy * gy + gz * gz)
    return (ux + lam, uy + lam * gy, uz + lam * gz, h)


def control_cascade(p, psi, target_pos, r_wt, psi_d, kp, k_psi,
                    v_max, yaw_rate_max, a, gamma, l_eps):
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
    px, py, pz = p
    tx, ty, tz = target_pos
    r00, r01, r02, r10, r11, r12, r20, r21, r22 = r_wt
    k00, k01, k02, k10, k11, k12, k20, k21, k22 = kp

    dx = px - tx
    dy = py - ty
    dz = pz - tz
    # UAV position in the target frame: rel = R^T (p - t)
    relx = r00 * dx + r10 * dy + r20 * dz
    rely = r01 * dx + r11 * dy + r21 * dz
    relz = r02 * dx + r12 * dy + r22 * dz
    # pseudo-velocity toward the contact point, world frame: Kp (t - p)
    uwx = -(k00 * dx + k01 * dy + k02 * dz)
    uwy = -(k10 * dx + k11 * dy + k12 * dz)
    uwz = -(k20 * dx + k21 * dy + k22 * dz)
    # nominal input in the target frame: u_T = R^T u_W
    utx = r00 * uwx + r10 * uwy + r20 * uwz
    uty = r01 * uwx + r11 * uwy + r21 * uwz
    utz = r02 * uwx + r12 * uwy + r22 * uwz

    l = sqrt(rely * rely + relz * relz)
    if l < l_eps:
        on_axis = True
        h = relx - a * sqrt(l)
        sx = utx
        sy = uty
        sz = utz
    else:
        on_axis = False
        sx, sy, sz, h = filter_velocity(utx, uty, utz, relx, rely, relz, a, gamma)

    # back to world: u_W* = R u_T*
    ux = r00 * sx + r01 * sy + r02 * sz
    uy = r10 * sx + r11 * sy + r12 * sz
    uz = r20 * sx + r21 * sy + r22 * sz
    speed = sqrt(ux * ux + uy * uy + uz * uz)
    if speed > v_max:
        scale = v_max / speed
        ux *= scale
        uy *= scale
        uz *= scale

    rate = k_psi * wrap_angle(psi_d - psi)
    if rate > yaw_rate_max:
        rate = yaw_rate_max
    elif rate < -yaw_rate_max:
        rate = -yaw_rate_max
    return (ux, uy, uz, rate, h, on_axis)


def step_kinematic(p, psi, u, yaw_rate, dt):
    """Euler step of the kinematic plant (velocity commanded directly).

    Returns (px, py, pz, psi).
    """
    px, py, pz = p
    ux, uy, uz = u
    return (px + ux * dt, py + uy * dt, pz + uz * dt,
            wrap_angle(psi + yaw_rate * dt))


def pid_axis_force(err, integ, prev_err, kp, ki, kd, dt, feed_forward, f_max):
    """Single-axis velocity PID with output clamp and conditional
    anti-windup (the integrator freezes when pushing further into
    saturation).  Returns (force, new_integral).
    """
    cand = integ + err * dt
    deriv = (err - prev_err) / dt
    raw = kp * err + ki * cand + kd * deriv + feed_forward
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


def step_dynamic(p, v, psi, integ, prev_err, u_cmd, yaw_rate, f_ext,
                 mass, g, kp, ki, kd, f_max, dt):
    """Semi-implicit Euler step of the force-driven plant.

    Per-axis velocity PID plus gravity feed-forward on z, each axis
    clamped to +/- f_max; external (contact) force f_ext added before
    integration.  Yaw integrates the commanded rate directly.

    Returns (px, py, pz, vx, vy, vz, psi, ix, iy, iz, ex, ey, ez) where
    i* are updated integrator states and e* the velocity errors to store
    as previous errors.
    """
    px, py, pz = p
    vx, vy, vz = v
    ix0, iy0, iz0 = integ
    ex0, ey0, ez0 = prev_err
    ucx, ucy, ucz = u_cmd
    fex, fey, fez = f_ext

    ex = ucx - vx
    ey = ucy - vy
    ez = ucz - vz
    fx, ix = pid_axis_force(ex, ix0, ex0, kp, ki, kd, dt, 0.0, f_max)
    fy, iy = pid_axis_force(ey, iy0, ey0, kp, ki, kd, dt, 0.0, f_max)
    fz, iz = pid_axis_force(ez, iz0, ez0, kp, ki, kd, dt, mass * g, f_max)

    ax = (fx + fex) / mass
    ay = (fy + fey) / mass
    az = (fz + fez) / mass - g
    vx += ax * dt
    vy += ay * dt
    vz += az * dt
    px += vx * dt
    py += vy * dt
    pz += vz * dt
    psi = wrap_angle(psi + yaw_rate * dt)
    return (px, py, pz, vx, vy, vz, psi, ix, iy, iz, ex, ey, ez)


def contact_state(p, v, psi, yaw_rate, tip_offset, plane_point, plane_normal,
                  k_a, d_a):
    """Spring-damper normal force at the end-effector tip.

    The tip sits tip_offset ahead of the body origin along body +x.
    plane_normal is the outward unit normal of the contact surface;
    penetration is depth beyond the plane along -normal.  Force is
    floored at zero (no adhesion).

    Returns (force, penetration, penetration_rate, fx, fy, fz) with
    (fx, fy, fz) = force * normal, the reaction on the vehicle.
    """
    px, py, pz = p
    vx, vy, vz = v
    qx, qy, qz = plane_point
    nx, ny, nz = plane_normal
    c = cos(psi)
    s = sin(psi)
    tipx = px + c * tip_offset
    tipy = py + s * tip_offset
    tipz = pz
    pen = (qx - tipx) * nx + (qy - tipy) * ny + (qz - tipz) * nz
    if pen <= 0.0:
        return (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    tvx = vx - yaw_rate * s * tip_offset
    tvy = vy + yaw_rate * c * tip_offset
    rate = -(tvx * nx + tvy * ny + vz * nz)
    f = k_a * pen + d_a * rate
    if f < 0.0:
        f = 0.0
    return (f, pen, rate, f * nx, f * ny, f * nz)
