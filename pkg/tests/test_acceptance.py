"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured values,
then asserts. Tolerances and runtime limits are pinned here.
"""

import time
from fractions import Fraction as F

import numpy as np
import pytest
import sympy

from pampa import bp1d, problems, sbp1d
from pampa import scheme1d as S
from pampa.basis1d import build_dual_basis, mass_matrix_exact
from pampa import _exact
from pampa.mesh1d import Solution1D, make_random, make_uniform
from pampa.tri2d import (boundary_lagrange_centroid, centroid_weights, cyclic_solutions,
                         moment_matrix, omega_factorial_scale)
from pampa.tri2d import solver as T


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail, elapsed, limit):
        ok = bool(ok) and elapsed < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail} | "
                  f"{elapsed:.2f} s (limit {limit:g} s)")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def _advection_config(n, k, rule, cfl, t_end):
    exact = lambda x, t: problems.periodic_advected(problems.cosine, 1.0, t, 0, 1)(x)  # noqa: E731
    return S.RunConfig1D(make_uniform(0, 1, n), k, S.linear_advection(1.0), problems.cosine, cfl,
                         t_end, projection=S.ProjectionRule(rule), exact=exact, record_every=10**9)


def test_criterion_1_golden_matrices(report):
    t0 = time.perf_counter()
    M = mass_matrix_exact(build_dual_basis(2))
    m_ok = M == [[F(2, 15), F(-1, 10), F(-1, 30)], [F(-1, 10), F(6, 5), F(-1, 10)],
                 [F(-1, 30), F(-1, 10), F(2, 15)]]
    inv_ok = _exact.inverse(M) == [[9, 1, 3], [1, 1, 1], [3, 1, 9]]
    t = sbp1d.element_sbp(2)
    q_ok = [list(r) for r in t.Q_exact] == [[F(-1, 2), 1, F(-1, 2)], [-1, 0, 1], [F(1, 2), -1, F(1, 2)]]
    d_ok = [list(r) for r in t.D_exact] == [[-4, 6, -2], [-1, 0, 1], [2, -6, 4]]
    b_ok = [list(r) for r in t.B_exact] == [[-1, 0, 0], [0, 0, 0], [0, 0, 1]]
    rep = sbp1d.check_sbp(t)
    skew = max(sbp1d.check_sbp(sbp1d.global_periodic_operator(n, 1.0 / n))["skew"] for n in (8, 9))
    ok = m_ok and inv_ok and q_ok and d_ok and b_ok and rep["sbp"] == 0 and rep["consistency"] == 0
    ok = ok and skew <= 1e-12
    detail = (f"M {m_ok}, M^-1 {inv_ok}, Q {q_ok}, D {d_ok}, B {b_ok}, "
              f"Q+Q^T-B {rep['sbp']}, D1 {rep['consistency']}, global skew {skew:.1e}")
    report(1, "golden matrices", ok, detail, time.perf_counter() - t0, 1.0)


def test_criterion_2_pampa_equals_dg(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for k in (2, 3, 4):
        basis = build_dual_basis(k)
        for trial in range(100):
            mesh = make_random(0, 1, 12, 0.3, 1000 * k + trial)
            u = Solution1D(k, rng.uniform(-1, 1, mesh.n_points),
                           rng.uniform(-1, 1, (mesh.n_cells, k - 1)) * mesh.lengths[:, None])
            a = S.pampa_rhs(mesh, u, S.linear_advection(1.3), basis=basis)
            b = S.dg_rhs(mesh, u, S.linear_advection(1.3), basis=basis)
            diff = max(np.abs(a.left - b.left).max(), np.abs(a.right - b.right).max(),
                       np.abs(a.moments - b.moments).max())
            worst = max(worst, diff)
    report(2, "PAMPA equals dG", worst <= 1e-11, f"max |pampa - dg| = {worst:.2e} (tol 1e-11)",
           time.perf_counter() - t0, 5.0)


def test_criterion_3_convergence(report):
    t0 = time.perf_counter()
    eoc = {}
    for k in (2, 3):
        rows = S.convergence_study(lambda n: _advection_config(n, k, "central", 0.05, 1.0),
                                   [40, 80, 160, 320])
        eoc[k] = rows[-1]["EOC_L2"]
    ok = 2.7 <= eoc[2] <= 3.3 and 3.6 <= eoc[3] <= 4.4
    detail = f"EOC_L2 k=2 {eoc[2]:.3f} (want [2.7, 3.3]), k=3 {eoc[3]:.3f} (want [3.6, 4.4])"
    report(3, "smooth convergence, central projection", ok, detail, time.perf_counter() - t0, 60.0)


def test_criterion_4_long_time(report):
    t0 = time.perf_counter()
    e10 = S.run_simulation(_advection_config(100, 2, "upwind", 0.1, 10.0)).errors["Linf"]
    e100 = S.run_simulation(_advection_config(100, 2, "upwind", 0.1, 100.0)).errors["Linf"]
    ok = e10 <= 5e-3 and np.isfinite(e100) and e100 <= 0.1
    detail = f"upwind projection, Linf 10 periods {e10:.3e} (tol 5e-3), 100 periods {e100:.3e} (tol 0.1)"
    report(4, "long-time dispersion", ok, detail, time.perf_counter() - t0, 120.0)


def test_criterion_5_energy_inequality(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    violations, worst = 0, -np.inf
    for trial in range(1000):
        n = int(rng.integers(3, 40))
        mesh = make_random(0, 1, n, float(rng.uniform(0, 0.45)), trial)
        left, right = rng.normal(size=(2, n))
        lhs, rhs, _ = S.energy_and_inequality_check(mesh, left, right)
        worst = max(worst, lhs - rhs)
        violations += lhs > rhs + 1e-12
    report(5, "energy inequality", violations == 0,
           f"{violations} violations in 1000 sets, max(lhs - rhs) = {worst:.3e}",
           time.perf_counter() - t0, 2.0)


def test_criterion_6_algebraic_bounds(report):
    t0 = time.perf_counter()
    rep = bp1d.random_trials(1_000_000, bp1d.upwind_linear(1.0), bp1d.Bounds(0.0, 1.0), seed=6)
    ok = rep["violations"] == 0 and rep["max_telescoping_error"] <= 1e-13
    detail = (f"{rep['violations']} violations in 1e6 trials, "
              f"telescoping error {rep['max_telescoping_error']:.1e} (tol 1e-13)")
    report(6, "average bound, algebraic", ok, detail, time.perf_counter() - t0, 30.0)


def test_criterion_7_jiang_shu_run(report):
    t0 = time.perf_counter()
    x = np.linspace(-1, 1, 200001)
    u0 = problems.jiang_shu(x)
    lo, hi = float(u0.min()), float(u0.max())
    cfg = S.RunConfig1D(make_uniform(-1, 1, 300), 2, S.linear_advection(1.0), problems.jiang_shu,
                        0.15, 2.0, bp="point", bounds=(lo, hi), record_every=1)
    res = S.run_simulation(cfg)
    amin = min(d["min_average"] for d in res.diagnostics)
    amax = max(d["max_average"] for d in res.diagnostics)
    ok = amin >= lo - 1e-12 and amax <= hi + 1e-12 and len(res.diagnostics) == res.steps + 1
    detail = (f"{res.steps} steps, averages in [{amin:.3e}, {amax:.15f}], "
              f"initial range [{lo:.3e}, {hi:.15f}], slack 1e-12")
    report(7, "Jiang-Shu run, point limiting", ok, detail, time.perf_counter() - t0, 60.0)


def test_criterion_8_triangle_tables(report):
    t0 = time.perf_counter()
    q, c = centroid_weights("quadratic"), centroid_weights("cubic")
    quad_ok = (q.alpha_K, q.alphas[0], q.alphas[3], q.total) == (F(9, 20), F(1, 20), F(2, 15), 1)
    cubic_ok = (c.alpha_K, c.alphas[0], c.alphas[3], c.total) == (F(9, 20), F(1, 30), F(9, 120), 1)
    omega_ok = omega_factorial_scale() == F(360, 567)
    A = moment_matrix(3, "full", "factorial")[2]
    X = cyclic_solutions(A)[0]
    residual = max(abs(float(sum(A[i][j] * X[j] for j in range(3)) - (i == 0))) for i in range(3))
    x_ok = X == [F(1800, 7), F(-720, 7), F(-720, 7)] and residual <= 1e-12
    lag = [v for _, v in boundary_lagrange_centroid(3)]
    r5 = sympy.sqrt(5)
    lag_ok = lag[0] == F(-1, 27) and {sympy.simplify(v - F(5, 18)) for v in lag[3:]} == {
        -5 * r5 / 54, 5 * r5 / 54}
    signs_ok = all(w.omega_K > 0 and all(v < 0 for v in w.phi_centroid)
                   for w in (q, c, centroid_weights("cubic-moment")))
    ok = quad_ok and cubic_ok and omega_ok and x_ok and lag_ok and signs_ok
    detail = (f"quadratic {quad_ok}, cubic {cubic_ok}, omega 360/567 {omega_ok}, "
              f"X {x_ok} (residual {residual:.0e}), Lagrange {lag_ok}, signs {signs_ok}")
    report(8, "triangle weight tables", ok, detail, time.perf_counter() - t0, 1.0)


def test_criterion_9_triangle_solver(report):
    t0 = time.perf_counter()
    errs = [T.run_2d(T.translation_case(n, record_every=10**9)).errors["L2"] for n in (32, 64, 128)]
    eoc = float(np.log2(errs[1] / errs[2]))
    rng = np.random.default_rng(9)
    mesh = T.translation_case(16).mesh
    u = T.TriSolutionQ2(rng.uniform(size=mesh.n_points), rng.uniform(size=mesh.n_triangles))
    cancel = T.interior_flux_cancellation(mesh, u, (-1.0, 1.0))
    trials = T.random_average_trials(100_000, seed=9)
    ok = 2.5 <= eoc <= 3.5 and cancel <= 1e-12 and trials["violations"] == 0
    detail = (f"L2 {errs[0]:.3e} {errs[1]:.3e} {errs[2]:.3e}, EOC {eoc:.3f} (want [2.5, 3.5]), "
              f"flux cancellation {cancel:.1e}, {trials['violations']} violations in 1e5 trials")
    report(9, "quadratic triangle solver", ok, detail, time.perf_counter() - t0, 300.0)
