"""Bound preservation for the 1D average update.

The average update ``ubar - lam (f(u_{j+1}) - f(u_j))`` is rewritten, with the
midpoint value recovered from Simpson's rule, as a convex combination of three
monotone two-point updates. When the point values and the recovered midpoint
are in ``[m, M]`` and ``6 lam`` does not exceed the stability limit of the
monotone flux, the new average stays in ``[m, M]``.

The point values themselves are kept in bounds by a scaling limiter about the
cell average.
"""

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

SLACK = 1e-12


@dataclass(frozen=True)
class Bounds:
    m: float
    M: float

    def __post_init__(self):
        if not self.m <= self.M:
            raise ValueError(f"empty bounds [{self.m}, {self.M}]")

    def contains(self, x, slack=SLACK):
        x = np.asarray(x)
        return (x >= self.m - slack) & (x <= self.M + slack)


@dataclass(frozen=True)
class MonotoneFlux:
    """Two-point flux ``fhat(u_minus, u_plus)`` and its stability limit ``lam0``."""

    kind: str
    fhat: Callable
    f: Callable
    lam0: float

    def __call__(self, u, v):
        return self.fhat(u, v)


def upwind_linear(a: float) -> MonotoneFlux:
    a = float(a)
    ap, am = max(a, 0.0), min(a, 0.0)
    return MonotoneFlux("upwind-linear", lambda u, v: ap * np.asarray(u) + am * np.asarray(v),
                        lambda u: a * np.asarray(u), 1.0)


def rusanov(f: Callable, df: Callable) -> MonotoneFlux:
    def fhat(u, v):
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        s = np.maximum(np.abs(df(u)), np.abs(df(v)))
        return 0.5 * (f(u) + f(v)) - 0.5 * s * (v - u)

    return MonotoneFlux("rusanov", fhat, f, 0.5)


def rusanov_flux(flux) -> MonotoneFlux:
    """Rusanov flux built from a ``scheme1d.FluxSpec``."""
    return rusanov(flux.f, flux.df)


def check_monotone(flux: MonotoneFlux, lo=-2.0, hi=2.0, n=100, seed=0, h=1e-6):
    """Sample ``n`` pairs and report (consistent, nondecreasing in 1st, nonincreasing in 2nd)."""
    rng = np.random.default_rng(seed)
    u, v = rng.uniform(lo, hi, (2, n))
    consistent = np.allclose(flux(u, u), flux.f(u), rtol=1e-13, atol=1e-13)
    inc = np.all(flux(u + h, v) - flux(u, v) >= -1e-12)
    dec = np.all(flux(u, v + h) - flux(u, v) <= 1e-12)
    return bool(consistent), bool(inc), bool(dec)


def simpson_midpoint(u_j, ubar, u_j1):
    return (6.0 * np.asarray(ubar) - u_j - u_j1) / 4.0


def convex_average_update(u_j, ubar, u_j1, flux: MonotoneFlux, lam):
    """Return ``(direct, decomposed)`` forms of the average update.

    Each bracket of the decomposed form is a monotone two-point update with
    ratio ``6 lam``, ``(6/4) lam`` and ``6 lam`` respectively.
    """
    f = flux.f
    mid = simpson_midpoint(u_j, ubar, u_j1)
    direct = ubar - lam * (f(u_j1) - f(u_j))
    g_right = flux(mid, u_j1)
    g_left = flux(u_j, mid)
    decomposed = (
        (u_j1 - 6.0 * lam * (f(u_j1) - g_right)) / 6.0
        + 4.0 * (mid - 1.5 * lam * (g_right - g_left)) / 6.0
        + (u_j - 6.0 * lam * (g_left - f(u_j))) / 6.0
    )
    return direct, decomposed


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not applicable"


def average_bounds_guarantee(u_j, ubar, u_j1, flux: MonotoneFlux, lam, bounds: Bounds) -> Verdict:
    mid = simpson_midpoint(u_j, ubar, u_j1)
    if not (np.all(bounds.contains([u_j, u_j1, mid], 0.0)) and 0 <= 6 * lam <= flux.lam0):
        return Verdict.NOT_APPLICABLE
    direct, _ = convex_average_update(u_j, ubar, u_j1, flux, lam)
    return Verdict.PASS if bounds.contains(direct) else Verdict.FAIL


def random_trials(n, flux: MonotoneFlux, bounds: Bounds, seed=0, lam_max=None):
    """Vectorised witness of the average bound on ``n`` random admissible tuples.

    The tuple is drawn as two point values and a midpoint in ``[m, M]``, the
    average then follows from Simpson's rule. Returns a dict with counts of
    bound violations and the largest telescoping mismatch.
    """
    rng = np.random.default_rng(seed)
    lam_max = flux.lam0 / 6.0 if lam_max is None else lam_max
    u_j, u_j1, mid = rng.uniform(bounds.m, bounds.M, (3, n))
    ubar = (u_j + 4.0 * mid + u_j1) / 6.0
    lam = rng.uniform(0.0, lam_max, n)
    direct, decomposed = convex_average_update(u_j, ubar, u_j1, flux, lam)
    bad = ~bounds.contains(direct)
    return {
        "trials": n,
        "violations": int(bad.sum()),
        "max_telescoping_error": float(np.max(np.abs(direct - decomposed))),
        "min_update": float(direct.min()),
        "max_update": float(direct.max()),
    }


def admissible_dt(alpha_K, alphas, lam0, cell_measure, max_speed):
    """Largest ``dt`` for which every convex term is a monotone update.

    In 1D pass ``alpha_K = 4/6``, ``alphas = (1/6, 1/6)`` and ``cell_measure = dx``.
    On a triangle ``cell_measure`` is ``|K| / |dK|``.
    """
    weights = np.concatenate([[alpha_K], np.ravel(alphas)])
    if np.any(weights <= 0):
        raise ValueError("all convex weights must be positive")
    if lam0 < 0 or cell_measure <= 0:
        raise ValueError("lam0 must be nonnegative and the cell measure positive")
    if max_speed <= 0:
        return np.inf
    return lam0 * float(weights.min()) * cell_measure / max_speed


# --------------------------------------------------------------------------
# point value limiter


def scaling_theta(ubar, values, bounds: Bounds):
    """Scaling factor about ``ubar`` bringing ``values`` into bounds (1 if already inside)."""
    vmax, vmin = np.max(values), np.min(values)
    theta = 1.0
    if vmax > bounds.M and vmax > ubar:
        theta = min(theta, (bounds.M - ubar) / (vmax - ubar))
    if vmin < bounds.m and vmin < ubar:
        theta = min(theta, (ubar - bounds.m) / (ubar - vmin))
    return max(theta, 0.0)


def limit_cell(ubar, values, bounds: Bounds):
    values = np.asarray(values, dtype=float)
    theta = scaling_theta(ubar, values, bounds)
    return ubar + theta * (values - ubar), theta


@dataclass
class LimiterStats:
    n_limited: int
    n_skipped: int
    theta_min: float


def limit_solution(mesh, sol, bounds) -> LimiterStats:
    """Limit the point values of ``sol`` in place.

    Every cell with an out-of-bounds end value proposes scaled values for
    both ends. Only nodes that are out of bounds are changed; a node shared
    by two limited cells takes the proposal closest to its current value.
    Both proposals are in bounds, so the choice only decides how far the
    value moves. Cells whose average is itself out of bounds are skipped.
    """
    if not isinstance(bounds, Bounds):
        bounds = Bounds(*bounds)
    v = sol.point_values
    avg = sol.averages(mesh)
    il, ir = mesh.left_point, mesh.right_point
    vl, vr = v[il], v[ir]
    ok = bounds.contains(avg)
    need = ok & ~(bounds.contains(vl, 0.0) & bounds.contains(vr, 0.0))
    if not need.any():
        return LimiterStats(0, int((~ok).sum()), 1.0)

    theta = np.ones(mesh.n_cells)
    hi = np.maximum(vl, vr)
    lo = np.minimum(vl, vr)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where((hi > bounds.M) & (hi > avg), (bounds.M - avg) / (hi - avg), 1.0)
        t_lo = np.where((lo < bounds.m) & (lo < avg), (avg - bounds.m) / (avg - lo), 1.0)
    theta[need] = np.clip(np.minimum(t_hi, t_lo)[need], 0.0, 1.0)
    # the clip only removes rounding residue from the scaling
    prop_l = np.clip(avg + theta * (vl - avg), bounds.m, bounds.M)
    prop_r = np.clip(avg + theta * (vr - avg), bounds.m, bounds.M)

    outside = ~bounds.contains(v, 0.0)
    new = v.copy()
    best = np.full(v.size, np.inf)
    for idx, prop in ((il, prop_l), (ir, prop_r)):
        for i, p in zip(idx[need], prop[need]):
            d = abs(p - v[i])
            if outside[i] and d < best[i]:
                best[i], new[i] = d, p
    sol.point_values[:] = new
    return LimiterStats(int(need.sum()), int((~ok).sum()), float(theta[need].min()))


# --------------------------------------------------------------------------
# average-aware correction of the point values


@dataclass
class ConstraintReport:
    iterations: int
    max_violation: float
    feasible: bool


def _pair_constraints(mesh, sol, bounds: Bounds, lam, speed):
    """Coefficients ``(alpha, beta, lo, hi)`` of ``lo <= alpha u_j + beta u_{j+1} <= hi``.

    With a constant speed the next Euler average is
    ``ubar - lam speed (u_{j+1} - u_j)`` and the constraint is exact. Without
    one the Simpson midpoint is kept in bounds instead, which is sufficient
    under ``6 lam <= lam0``.
    """
    # averages a round-off outside the bounds are treated as on them
    avg = np.clip(sol.averages(mesh), bounds.m, bounds.M)
    n = mesh.n_cells
    if speed is None:
        return np.ones(n), np.ones(n), 6.0 * avg - 4.0 * bounds.M, 6.0 * avg - 4.0 * bounds.m
    c = np.broadcast_to(np.asarray(lam, dtype=float) * speed, (n,))
    # c (u_{j+1} - u_j) in [ubar - M, ubar - m]
    return -c, c, avg - bounds.M, avg - bounds.m


def constrain_points(mesh, sol, bounds, lam=None, speed=None, tol=1e-14):
    """Move the point values so that the next average update stays in ``bounds``.

    Every cell constrains a pair of point values (see ``_pair_constraints``).
    The node downstream of a cell (the right one unless ``speed < 0``) is
    the one the cell may move: the sweep starts at the first violated cell
    and clips each downstream node into the interval allowed by its
    upstream neighbour and by ``[m, M]``, until nothing changes. With a
    constant speed a constant state is always admissible, so the sweep
    cannot get stuck; the Simpson form can be infeasible next to sharp
    jumps in the averages, which is reported. Averages are not touched.
    """
    if not isinstance(bounds, Bounds):
        bounds = Bounds(*bounds)
    alpha, beta, lo, hi = _pair_constraints(mesh, sol, bounds, lam, speed)
    active = bounds.contains(sol.averages(mesh))
    v = sol.point_values
    np.clip(v, bounds.m, bounds.M, out=v)
    il, ir = mesh.left_point, mesh.right_point
    n = mesh.n_cells

    def violated(cells):
        s = alpha[cells] * v[il[cells]] + beta[cells] * v[ir[cells]]
        return active[cells] & ((s > hi[cells] + tol) | (s < lo[cells] - tol))

    bad = violated(np.arange(n))
    if not bad.any():
        return ConstraintReport(0, 0.0, True)

    backwards = speed is not None and np.all(np.asarray(speed) < 0)
    order = np.arange(n)[::-1] if backwards else np.arange(n)
    free_node, fixed_node = (il, ir) if backwards else (ir, il)
    a_free, a_fixed = (alpha, beta) if backwards else (beta, alpha)

    pos = int(np.argmax(bad[order]))
    remaining = int(bad.sum())
    feasible = True
    visits = 0
    quiet = 0
    while visits < 3 * n and (remaining > 0 or quiet == 0):
        j = order[pos]
        if bad[j]:
            bad[j] = False
            remaining -= 1
        changed = False
        if active[j] and a_free[j] != 0.0:
            base = a_fixed[j] * v[fixed_node[j]]
            x0, x1 = (lo[j] - base) / a_free[j], (hi[j] - base) / a_free[j]
            if x0 > x1:
                x0, x1 = x1, x0
            x0, x1 = max(x0, bounds.m), min(x1, bounds.M)
            old = v[free_node[j]]
            if x0 > x1 + tol:
                feasible = False
                new = min(max(old, x1), x0)
            else:
                new = min(max(old, x0), x1)
            if new != old:
                v[free_node[j]] = new
                changed = True
        quiet = 0 if changed else 1
        visits += 1
        pos += 1
        if pos == n:
            if not mesh.periodic:
                break
            pos = 0
    worst = violated(np.arange(n))
    s = alpha * v[il] + beta * v[ir]
    excess = np.where(active, np.maximum(s - hi, lo - s), 0.0).max(initial=0.0)
    return ConstraintReport(visits, float(max(excess, 0.0)), feasible and not worst.any())
