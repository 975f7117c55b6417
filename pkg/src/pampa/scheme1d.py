"""Semi-discrete PAMPA in one space dimension and its discontinuous Galerkin twin.

The scheme is evaluated in two steps. First every cell produces the full
local time derivative of its ``k + 1`` DoFs (``DGUpdate``); the two point
derivatives of neighbouring cells disagree in general. Then a projection
rule combines the two one-sided derivatives at each node into a single one,
leaving the moment derivatives untouched.

``pampa_rhs`` computes the cell derivatives directly from the reconstruction
(point values from ``-f'(u) u_h'``, moments from the weak flux integral);
``dg_rhs`` applies the inverse mass matrix to the Galerkin flux vector. For
linear advection the two agree to round-off.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import bp1d
from .basis1d import DualBasis1D, OperatorSet1D, build_dual_basis, build_operators
from .mesh1d import Mesh1D, Solution1D, cell_local_dofs
from .timestepping import euler_step, ssp_rk3_stages, ssp_rk3_step  # noqa: F401

BLOWUP_LIMIT = 1e10


class BlowUpError(RuntimeError):
    pass


@dataclass(frozen=True)
class FluxSpec:
    kind: str
    f: Callable
    df: Callable
    a: Optional[float] = None
    name: str = ""

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    def max_speed(self, values) -> float:
        if self.is_linear:
            return abs(self.a)
        return float(np.max(np.abs(self.df(np.asarray(values)))))

    def check_derivative(self, rng=None, n=10, lo=-2.0, hi=2.0, h=1e-6) -> float:
        """Largest relative mismatch between ``df`` and a central difference of ``f``."""
        rng = np.random.default_rng(0) if rng is None else rng
        x = rng.uniform(lo, hi, n)
        fd = (self.f(x + h) - self.f(x - h)) / (2 * h)
        exact = self.df(x)
        return float(np.max(np.abs(fd - exact) / np.maximum(np.abs(exact), 1.0)))


def linear_advection(a: float) -> FluxSpec:
    a = float(a)
    return FluxSpec("linear", lambda u: a * u, lambda u: a * np.ones_like(u), a, f"advection(a={a:g})")


def general_scalar(f, df, name="general") -> FluxSpec:
    return FluxSpec("general", f, df, None, name)


def burgers() -> FluxSpec:
    return general_scalar(lambda u: 0.5 * u * u, lambda u: np.asarray(u, dtype=float), "burgers")


PROJECTION_KINDS = ("central", "upwind", "length-weighted")


@dataclass(frozen=True)
class ProjectionRule:
    kind: str = "central"
    tie_epsilon: float = 1e-14

    def __post_init__(self):
        if self.kind not in PROJECTION_KINDS:
            raise ValueError(f"unknown projection rule {self.kind!r}")

    def node_weights(self, mesh: Mesh1D, speed=None):
        """Weights on (left-cell, right-cell) derivatives at every point slot.

        At a non-periodic end only one cell exists and takes weight one.
        """
        n = mesh.n_points
        w_left = np.full(n, 0.5)
        if self.kind == "length-weighted":
            dl, dr = _side_lengths(mesh)
            w_left = dl / (dl + dr)
        elif self.kind == "upwind":
            if speed is None:
                raise ValueError("upwind projection needs the wave speed at the nodes")
            speed = np.broadcast_to(np.asarray(speed, dtype=float), (n,))
            w_left = np.where(speed > self.tie_epsilon, 1.0,
                              np.where(speed < -self.tie_epsilon, 0.0, 0.5))
        if not mesh.periodic:
            w_left = np.array(w_left, dtype=float)
            w_left[0], w_left[-1] = 0.0, 1.0
        return w_left, 1.0 - w_left


def _side_lengths(mesh: Mesh1D):
    dx = mesh.lengths
    if mesh.periodic:
        return np.roll(dx, 1), dx
    dl = np.concatenate([[dx[0]], dx])
    dr = np.concatenate([dx, [dx[-1]]])
    return dl, dr


@dataclass
class DGUpdate:
    """Per-cell dG time derivatives.

    ``left[j]`` / ``right[j]`` are the derivatives of cell ``j``'s end point
    values, ``moments[j]`` those of its integral moments.
    """

    left: np.ndarray
    right: np.ndarray
    moments: np.ndarray

    def local(self, mesh: Mesh1D) -> np.ndarray:
        """Derivatives of the reference DoFs ``(left, moments/dx..., right)``."""
        return np.column_stack([self.left, self.moments / mesh.lengths[:, None], self.right])


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _check_order(u: Solution1D, basis: DualBasis1D, mesh: Mesh1D):
    if u.k != basis.k:
        raise ValueError(f"solution order {u.k} does not match basis order {basis.k}")
    if u.point_values.size != mesh.n_points or u.n_cells != mesh.n_cells:
        raise ValueError("solution layout does not match the mesh")


def pampa_rhs(mesh: Mesh1D, u: Solution1D, flux: FluxSpec,
              basis: Optional[DualBasis1D] = None) -> DGUpdate:
    basis = build_dual_basis(u.k) if basis is None else basis
    _check_order(u, basis, mesh)
    k = u.k
    dx = mesh.lengths
    local = cell_local_dofs(mesh, u)
    uL, uR = local[:, 0], local[:, -1]

    ends = basis.eval_deriv(np.array([0.0, 1.0]))  # (k+1, 2)
    slope = local @ ends / dx[:, None]
    left = -flux.df(uL) * slope[:, 0]
    right = -flux.df(uR) * slope[:, 1]

    # d/dt int m_l u = -[xi^l f]_0^1 + l int_0^1 xi^(l-1) f(u_h) dxi
    moments = np.empty((mesh.n_cells, k - 1))
    fL, fR = flux.f(uL), flux.f(uR)
    moments[:, 0] = -(fR - fL)
    if k > 2:
        ls = np.arange(1, k - 1)
        if flux.is_linear:
            vol = flux.a * local[:, 1:k - 1]  # int xi^(l-1) u_h is the stored moment l-1
        else:
            xg, wg = _gauss(k + 1)
            fq = flux.f(local @ basis.eval(xg))
            vol = (fq * wg) @ (xg[:, None] ** (ls - 1))
        moments[:, 1:] = -fR[:, None] + ls * vol
    return DGUpdate(left, right, moments)


def dg_rhs(mesh: Mesh1D, u: Solution1D, flux: FluxSpec,
           ops: Optional[OperatorSet1D] = None,
           basis: Optional[DualBasis1D] = None) -> DGUpdate:
    """Galerkin path: ``-M^{-1} F`` with ``F_kappa = int phi_kappa f(u_h)_x``."""
    basis = build_dual_basis(u.k) if basis is None else basis
    ops = build_operators(basis) if ops is None else ops
    _check_order(u, basis, mesh)
    dx = mesh.lengths
    local = cell_local_dofs(mesh, u)
    minv_ref = ops.M_inv * ops.dx

    if flux.is_linear:
        F = flux.a * local @ ops.Q.T
    else:
        xg, wg = _gauss(u.k + 1)
        fq = flux.f(local @ basis.eval(xg))
        fb = flux.f(local[:, [0, -1]])
        at = basis.eval(np.array([0.0, 1.0]))
        F = fb[:, 1:2] * at[:, 1] - fb[:, 0:1] * at[:, 0] - (fq * wg) @ basis.eval_deriv(xg).T
    ref = -F @ minv_ref.T
    return DGUpdate(ref[:, 0] / dx, ref[:, -1] / dx, ref[:, 1:-1])


def project(mesh: Mesh1D, upd: DGUpdate, u: Solution1D, rule: ProjectionRule,
            flux: Optional[FluxSpec] = None) -> Solution1D:
    """Combine the one-sided point derivatives into single-valued ones.

    Returns the time derivative of ``u`` packed as a ``Solution1D``.
    """
    speed = None
    if rule.kind == "upwind":
        if flux is None:
            raise ValueError("upwind projection needs the flux")
        speed = flux.df(u.point_values)
    w_left, w_right = rule.node_weights(mesh, speed)
    n = mesh.n_points
    from_left = np.zeros(n)
    from_right = np.zeros(n)
    from_left[mesh.right_point] = upd.right
    from_right[mesh.left_point] = upd.left
    # left-then-right summation keeps the result reproducible bit for bit
    du = w_left * from_left + w_right * from_right
    return Solution1D(u.k, du, upd.moments.copy())


def central_projected_point_rhs(u_j, ubar_left, ubar_right, u_j2, a, dx):
    """Central-projection derivative of the node between two uniform k = 2 cells."""
    return -(a / dx) * (u_j - 3.0 * ubar_left + 3.0 * ubar_right - u_j2)


def semidiscrete(mesh: Mesh1D, k: int, flux: FluxSpec, rule: ProjectionRule):
    """Vector right-hand side ``L(U)`` of the projected scheme."""
    basis = build_dual_basis(k)

    def rhs(vec):
        u = Solution1D.from_vector(k, mesh, vec)
        return project(mesh, pampa_rhs(mesh, u, flux, basis), u, rule, flux).to_vector()

    return rhs


def linear_operator(mesh: Mesh1D, k: int, flux: FluxSpec, rule: ProjectionRule) -> sp.csr_matrix:
    """Sparse matrix of the projected scheme for linear advection, assembled column by column."""
    if not flux.is_linear:
        raise ValueError("only linear fluxes give a linear operator")
    rhs = semidiscrete(mesh, k, flux, rule)
    n = mesh.n_points + mesh.n_cells * (k - 1)
    basis_probe = np.eye(n)
    cols = [rhs(basis_probe[:, i]) for i in range(n)]
    dense = np.column_stack(cols)
    dense[np.abs(dense) < 1e-14 * np.abs(dense).max()] = 0.0
    return sp.csr_matrix(dense)


def energy_and_inequality_check(mesh: Mesh1D, left_values, right_values):
    """Energy of the length-weighted projection against the sum of cell energies.

    ``left_values[j]`` and ``right_values[j]`` are cell ``j``'s (discontinuous)
    end point values. Returns ``(lhs, rhs, holds)``.
    """
    uL = np.asarray(left_values, dtype=float)
    uR = np.asarray(right_values, dtype=float)
    dl, dr = _side_lengths(mesh)
    n = mesh.n_points
    from_left = np.zeros(n)
    from_right = np.zeros(n)
    from_left[mesh.right_point] = uR
    from_right[mesh.left_point] = uL
    if mesh.periodic:
        proj = (dr * from_right + dl * from_left) / (dl + dr)
        gamma = dl + dr
    else:
        gamma = np.concatenate([[0.0], dl[1:-1] + dr[1:-1], [0.0]])
        proj = np.empty(n)
        proj[1:-1] = (dr[1:-1] * from_right[1:-1] + dl[1:-1] * from_left[1:-1]) / gamma[1:-1]
        proj[0], proj[-1] = from_right[0], from_left[-1]
        gamma[0], gamma[-1] = mesh.lengths[0], mesh.lengths[-1]
    lhs = float(np.sum(gamma * proj**2))
    rhs = float(np.sum(mesh.lengths * (uL**2 + uR**2)))
    return lhs, rhs, lhs <= rhs + 1e-12


# --------------------------------------------------------------------------
# initial data, errors and the time loop


def initialize(mesh: Mesh1D, k: int, u0, n_quad: int = 16) -> Solution1D:
    """Point values sampled at the nodes, moments by Gauss quadrature per cell."""
    xg, wg = _gauss(max(n_quad, k + 2))
    dx = mesh.lengths
    x = mesh.nodes[:-1, None] + dx[:, None] * xg
    vals = u0(x)
    moments = dx[:, None] * ((vals * wg) @ (xg[:, None] ** np.arange(k - 1)))
    return Solution1D(k, u0(mesh.point_coordinates), moments)


def errors(mesh: Mesh1D, u: Solution1D, exact, basis: Optional[DualBasis1D] = None):
    """L1, L2 and max errors of the reconstruction ``u_h`` against ``exact``."""
    basis = build_dual_basis(u.k) if basis is None else basis
    xg, wg = _gauss(u.k + 3)
    dx = mesh.lengths
    diff = cell_local_dofs(mesh, u) @ basis.eval(xg) - exact(mesh.nodes[:-1, None] + dx[:, None] * xg)
    l1 = float(np.sum(dx[:, None] * wg * np.abs(diff)))
    l2 = float(np.sqrt(np.sum(dx[:, None] * wg * diff**2)))
    linf = max(float(np.max(np.abs(diff))),
               float(np.max(np.abs(u.point_values - exact(mesh.point_coordinates)))))
    return {"L1": l1, "L2": l2, "Linf": linf}


# "point-scaling" only scales the point values about the cell average;
# "point" also moves them so that the next average update stays in bounds;
# "point-and-average" scales the points and limits the average fluxes.
BP_MODES = ("off", "point", "point-scaling", "point-and-average")


@dataclass
class RunConfig1D:
    mesh: Mesh1D
    k: int
    flux: FluxSpec
    u0: Callable
    cfl: float
    t_end: float
    projection: ProjectionRule = field(default_factory=ProjectionRule)
    bp: str = "off"
    bounds: Optional[tuple] = None
    exact: Optional[Callable] = None  # exact(x, t)
    record_every: int = 1

    def __post_init__(self):
        if self.bp not in BP_MODES:
            raise ValueError(f"bp mode must be one of {BP_MODES}")
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")


@dataclass
class SimulationResult:
    solution: Solution1D
    time: float
    steps: int
    diagnostics: list
    errors: Optional[dict] = None


def run_simulation(config: RunConfig1D) -> SimulationResult:
    mesh, k, flux = config.mesh, config.k, config.flux
    basis = build_dual_basis(k)
    u = initialize(mesh, k, config.u0)
    bounds = config.bounds
    if config.bp != "off" and bounds is None:
        xs = np.linspace(mesh.nodes[0], mesh.nodes[-1], 20001)
        vals = np.concatenate([config.u0(xs), u.point_values, u.averages(mesh)])
        bounds = (float(vals.min()), float(vals.max()))

    limiter_stats = {"limited": 0, "skipped": 0, "theta_min": 1.0, "infeasible": 0}
    constrained = config.bp == "point"
    if bounds is not None:
        bounds = bp1d.Bounds(*bounds)

    if flux.is_linear and config.bp == "off":
        L = linear_operator(mesh, k, flux, config.projection)

        def rhs(vec):
            return L @ vec
    else:
        rhs = semidiscrete(mesh, k, flux, config.projection)

    npts = mesh.n_points

    def euler(vec, h):
        new = vec + h * rhs(vec)
        if config.bp == "point-and-average":
            new = _limit_average_fluxes(mesh, k, flux, vec, new, h, bounds)
        if config.bp != "off":
            sol = Solution1D.from_vector(k, mesh, new)
            stats = bp1d.limit_solution(mesh, sol, bounds)
            limiter_stats["limited"] += stats.n_limited
            limiter_stats["skipped"] += stats.n_skipped
            limiter_stats["theta_min"] = min(limiter_stats["theta_min"], stats.theta_min)
            if constrained:
                _constrain(sol, h)
            new[:npts] = sol.point_values
        return new

    def _constrain(sol, h):
        speed = flux.a if flux.is_linear else None
        rep = bp1d.constrain_points(mesh, sol, bounds, h / mesh.lengths, speed)
        limiter_stats["infeasible"] += int(not rep.feasible)

    vec = u.to_vector()
    t, steps = 0.0, 0
    diagnostics = [_diagnostics_row(mesh, basis, flux, config, vec, 0, t, 0.0, limiter_stats)]
    while t < config.t_end:
        sol = Solution1D.from_vector(k, mesh, vec)
        speed = max(flux.max_speed(sol.point_values), flux.max_speed(sol.averages(mesh)), 1e-300)
        dt = config.cfl * float(mesh.lengths.min()) / speed
        if t + dt >= config.t_end * (1 - 1e-14):
            dt = config.t_end - t
        limiter_stats.update(limited=0, skipped=0, theta_min=1.0, infeasible=0)
        if constrained:
            sol = Solution1D.from_vector(k, mesh, vec)
            _constrain(sol, dt)
            vec[:npts] = sol.point_values
        vec = ssp_rk3_stages(vec, dt, euler)
        t = config.t_end if dt == config.t_end - t else t + dt
        steps += 1
        if not np.all(np.isfinite(vec)) or np.max(np.abs(vec)) > BLOWUP_LIMIT:
            raise BlowUpError(f"solution blew up at t={t:.6g} (step {steps})")
        if steps % config.record_every == 0 or t >= config.t_end:
            diagnostics.append(_diagnostics_row(mesh, basis, flux, config, vec, steps, t, dt, limiter_stats))

    final = Solution1D.from_vector(k, mesh, vec)
    errs = None
    if config.exact is not None:
        errs = errors(mesh, final, lambda x: config.exact(x, t), basis)
    return SimulationResult(final, t, steps, diagnostics, errs)


def _diagnostics_row(mesh, basis, flux, config, vec, step, t, dt, limiter_stats):
    k = config.k
    sol = Solution1D.from_vector(k, mesh, vec)
    avg = sol.averages(mesh)
    upd = pampa_rhs(mesh, sol, flux, basis)
    h = dt if dt > 0 else config.cfl * float(mesh.lengths.min()) / max(flux.max_speed(sol.point_values), 1e-300)
    lhs, rhs, _ = energy_and_inequality_check(
        mesh,
        sol.point_values[mesh.left_point] + h * upd.left,
        sol.point_values[mesh.right_point] + h * upd.right,
    )
    return {
        "step": step,
        "t": t,
        "dt": dt,
        "min_average": float(avg.min()),
        "max_average": float(avg.max()),
        "min_point": float(sol.point_values.min()),
        "max_point": float(sol.point_values.max()),
        "mass": float(sol.cell_moments[:, 0].sum()),
        "energy_lhs": lhs,
        "energy_rhs": rhs,
        "n_limited": limiter_stats["limited"],
        "theta_min": limiter_stats["theta_min"],
        "n_infeasible": limiter_stats["infeasible"],
    }


def _limit_average_fluxes(mesh, k, flux, old, new, h, bounds):
    """Blend the average update with first-order upwind fluxes where it leaves ``bounds``."""
    npts = mesh.n_points
    m, M = bounds.m, bounds.M
    dx = mesh.lengths
    old_sol = Solution1D.from_vector(k, mesh, old)
    avg_old = old_sol.averages(mesh)
    v = old_sol.point_values
    high = flux.f(v)  # interface flux at every node
    nb = np.roll(avg_old, 1) if mesh.periodic else np.concatenate([[avg_old[0]], avg_old[:-1]])
    right_avg = avg_old if mesh.periodic else np.concatenate([avg_old[:-1], [avg_old[-1]]])
    low = bp1d.rusanov_flux(flux)(nb[:npts], right_avg[:npts])
    lam = h / dx
    il, ir = mesh.left_point, mesh.right_point
    low_avg = avg_old - lam * (low[ir] - low[il])
    diff = high - low
    # per-cell room for antidiffusive flux, Zalesak style
    up_room = (M - low_avg) / lam
    down_room = (low_avg - m) / lam
    into = -np.minimum(diff[ir], 0) + np.maximum(diff[il], 0)
    out_of = np.maximum(diff[ir], 0) - np.minimum(diff[il], 0)
    r_plus = np.where(into > 0, np.minimum(1.0, up_room / np.where(into > 0, into, 1)), 1.0)
    r_minus = np.where(out_of > 0, np.minimum(1.0, down_room / np.where(out_of > 0, out_of, 1)), 1.0)
    r_plus, r_minus = np.maximum(r_plus, 0), np.maximum(r_minus, 0)
    theta = np.ones(npts)
    # node i is the right end of cell cl and the left end of cell cr
    cl = np.full(npts, -1)
    cr = np.full(npts, -1)
    cl[ir] = np.arange(mesh.n_cells)
    cr[il] = np.arange(mesh.n_cells)
    for i in range(npts):
        lim = 1.0
        if cl[i] >= 0:
            lim = min(lim, r_minus[cl[i]] if diff[i] > 0 else r_plus[cl[i]])
        if cr[i] >= 0:
            lim = min(lim, r_plus[cr[i]] if diff[i] > 0 else r_minus[cr[i]])
        theta[i] = lim
    flux_lim = low + theta * diff
    out = new.copy()
    out[npts::k - 1] = dx * (avg_old - lam * (flux_lim[ir] - flux_lim[il]))
    return out


def convergence_study(make_config: Callable[[int], RunConfig1D], levels) -> list:
    """Run ``make_config(n)`` for each cell count and attach EOCs.

    Each row holds ``n``, the three error norms and ``EOC_<norm>`` (``None``
    on the coarsest level). The EOC uses the actual ratio of mesh sizes, so
    levels need not be doublings.
    """
    levels = list(levels)
    if len(levels) < 3:
        raise ValueError("a convergence study needs at least three levels")
    rows = []
    for n in levels:
        cfg = make_config(n)
        if cfg.exact is None:
            raise ValueError("convergence study needs an exact solution")
        res = run_simulation(cfg)
        h = float(cfg.mesh.lengths.max())
        row = {"n": n, "h": h, "steps": res.steps, **res.errors}
        for norm in ("L1", "L2", "Linf"):
            row[f"EOC_{norm}"] = None
            if rows:
                prev = rows[-1]
                if prev[norm] > 0 and row[norm] > 0:
                    row[f"EOC_{norm}"] = float(np.log(prev[norm] / row[norm]) / np.log(prev["h"] / h))
        rows.append(row)
    return rows
