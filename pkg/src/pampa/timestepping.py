"""Explicit SSP time integration written as convex combinations of Euler steps."""


def euler_step(state, dt, rhs):
    return state + dt * rhs(state)


def ssp_rk3_stages(state, dt, euler):
    """Shu-Osher SSP-RK3 built from an arbitrary forward-Euler map.

    ``euler(u, dt)`` must return the (possibly limited) Euler update of ``u``;
    any convex invariant of ``euler`` is then kept by the full step.
    """
    u1 = euler(state, dt)
    u2 = 0.75 * state + 0.25 * euler(u1, dt)
    return state / 3.0 + (2.0 / 3.0) * euler(u2, dt)


def ssp_rk3_step(state, dt, rhs):
    return ssp_rk3_stages(state, dt, lambda u, h: u + h * rhs(u))
