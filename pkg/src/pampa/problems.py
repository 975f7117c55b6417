"""Initial data for the 1D experiments."""

import numpy as np


def cosine(x):
    return np.cos(2.0 * np.pi * x)


def sine(x):
    return np.sin(2.0 * np.pi * x)


def gaussian(x):
    return np.exp(-10.0 * x**2)


_JUMP_TOL = 1e-12


def _g(x, beta, z):
    return np.exp(-beta * (x - z) ** 2)


def _f(x, alpha, a):
    return np.sqrt(np.maximum(1.0 - alpha**2 * (x - a) ** 2, 0.0))


def jiang_shu(x):
    """Composite profile of Jiang and Shu on [-1, 1], values in [0, 1].

    Gaussians, a square pulse, a triangle and a semi-ellipse. Intervals are
    closed on the right so nodes sitting on a jump take the left limit
    (the upwind value for positive speed). Jump locations are widened by
    ``_JUMP_TOL`` so that nodes produced by ``linspace`` still land on the
    intended side.
    """
    x = np.asarray(x, dtype=float)
    delta, z, a, alpha = 0.005, -0.7, 0.5, 10.0
    beta = np.log(2.0) / (36.0 * delta**2)
    out = np.zeros_like(x)
    t = _JUMP_TOL

    m = (x > -0.8 + t) & (x <= -0.6 + t)
    out[m] = (_g(x[m], beta, z - delta) + _g(x[m], beta, z + delta) + 4.0 * _g(x[m], beta, z)) / 6.0
    m = (x > -0.4 + t) & (x <= -0.2 + t)
    out[m] = 1.0
    m = (x > 0.0 + t) & (x <= 0.2 + t)
    out[m] = 1.0 - np.abs(10.0 * (x[m] - 0.1))
    m = (x > 0.4 + t) & (x <= 0.6 + t)
    out[m] = (_f(x[m], alpha, a - delta) + _f(x[m], alpha, a + delta) + 4.0 * _f(x[m], alpha, a)) / 6.0
    return out


INITIAL_CONDITIONS = {
    "cos": (cosine, (0.0, 1.0)),
    "sin": (sine, (0.0, 1.0)),
    "gauss": (gaussian, (-1.0, 1.0)),
    "jiangshu": (jiang_shu, (-1.0, 1.0)),
}


def periodic_advected(u0, a, t, lo, hi):
    """Exact solution of ``u_t + a u_x = 0`` on the periodic interval [lo, hi]."""
    period = hi - lo

    def exact(x):
        return u0(lo + np.mod(np.asarray(x) - a * t - lo, period))

    return exact
