from fractions import Fraction as F

import numpy as np
import pytest

from pampa import scheme1d as S, sbp1d
from pampa.mesh1d import Solution1D, make_uniform
from pampa.timestepping import ssp_rk3_step


def test_quadratic_element_matrices():
    t = sbp1d.element_sbp(2)
    assert [list(r) for r in t.Q_exact] == [[F(-1, 2), 1, F(-1, 2)], [-1, 0, 1], [F(1, 2), -1, F(1, 2)]]
    assert [list(r) for r in t.D_exact] == [[-4, 6, -2], [-1, 0, 1], [2, -6, 4]]
    assert [list(r) for r in t.B_exact] == [[-1, 0, 0], [0, 0, 0], [0, 0, 1]]
    assert np.array_equal(t.D @ np.ones(3), np.zeros(3))


@pytest.mark.parametrize("k", range(2, 7))
def test_element_identities_exact(k):
    t = sbp1d.element_sbp(k)
    rep = sbp1d.check_sbp(t)
    assert rep["sbp"] == 0 and rep["passed"]
    B = np.zeros((k + 1, k + 1))
    B[0, 0], B[-1, -1] = -1, 1
    assert np.array_equal(t.B, B)


def test_constant_dofs():
    assert np.allclose(sbp1d.constant_dofs(4), [1, 1, 1 / 2, 1 / 3, 1])


def test_element_order_guard():
    with pytest.raises(ValueError):
        sbp1d.element_sbp(1)


@pytest.mark.parametrize("n", [3, 8, 9, 20])
def test_global_operator_is_skew_in_weighted_norm(n):
    op = sbp1d.global_periodic_operator(n, 1.0 / n)
    md = (op.M @ op.D).toarray()
    assert np.abs(md + md.T).max() <= 1e-13
    assert np.abs(op.D @ np.ones(2 * n)).max() <= 1e-13
    assert sbp1d.check_sbp(op)["passed"]


def test_global_weights_put_three_on_averages():
    op = sbp1d.global_periodic_operator(5, 0.2)
    w = op.M.diagonal()
    assert np.allclose(w[0::2], 0.2 / 4) and np.allclose(w[1::2], 3 * 0.2 / 4)


def test_global_stencils():
    n, dx = 6, 0.5
    D = sbp1d.global_periodic_operator(n, dx).D.toarray()
    avg_row = D[sbp1d.average_slot(2, n)]
    assert avg_row[sbp1d.point_slot(2, n)] == -1 / dx and avg_row[sbp1d.point_slot(3, n)] == 1 / dx
    assert np.count_nonzero(avg_row) == 2
    pt = D[sbp1d.point_slot(3, n)]
    expect = {sbp1d.point_slot(2, n): 1, sbp1d.average_slot(2, n): -3,
              sbp1d.average_slot(3, n): 3, sbp1d.point_slot(4, n): -1}
    assert np.count_nonzero(pt) == 4
    for col, c in expect.items():
        assert pt[col] == c / dx


def test_average_row_reproduces_unit_slope():
    n, dx = 6, 0.25
    D = sbp1d.global_periodic_operator(n, dx).D.toarray()
    x = np.arange(n + 1) * dx
    U = np.zeros(2 * n)
    j = 2
    U[sbp1d.point_slot(j, n)], U[sbp1d.point_slot(j + 1, n)] = x[j], x[j + 1]
    U[sbp1d.average_slot(j, n)] = 0.5 * (x[j] + x[j + 1])
    assert (D @ U)[sbp1d.average_slot(j, n)] == pytest.approx(1.0)


def test_global_operator_matches_projected_scheme(rng):
    n, a = 7, 1.3
    mesh = make_uniform(0, 1, n)
    op = sbp1d.global_periodic_operator(n, mesh.lengths[0])
    pts, avg = rng.normal(size=(2, n))
    u = Solution1D(2, pts, (avg * mesh.lengths)[:, None])
    du = S.project(mesh, S.pampa_rhs(mesh, u, S.linear_advection(a)), u, S.ProjectionRule("central"))
    ref = sbp1d.interleave(du.point_values, du.cell_moments[:, 0] / mesh.lengths)
    assert np.abs(-a * (op.D @ sbp1d.interleave(pts, avg)) - ref).max() <= 1e-12


def test_global_operator_size_guard():
    with pytest.raises(ValueError):
        sbp1d.global_periodic_operator(2, 0.5)
    with pytest.raises(ValueError):
        sbp1d.global_periodic_operator(5, 0.0)


def test_corrupted_q_is_flagged():
    Q = sbp1d.element_sbp(2).Q.copy()
    B = sbp1d.element_sbp(2).B
    assert sbp1d.check_matrices(Q, B)["passed"]
    Q[1, 1] += 1e-6
    rep = sbp1d.check_matrices(Q, B)
    assert rep["sbp"] == pytest.approx(2e-6) and not rep["passed"]


def test_energy_drift_is_third_order_in_dt(rng):
    n = 16
    op = sbp1d.global_periodic_operator(n, 1.0 / n)
    U = rng.normal(size=2 * n)
    rhs = lambda v: -(op.D @ v)  # noqa: E731
    drifts = []
    for dt in (0.004, 0.002):
        drifts.append(abs(sbp1d.energy(op, ssp_rk3_step(U, dt, rhs)) - sbp1d.energy(op, U)))
    # SSP-RK3 on a skew operator loses energy at order dt^4 per step
    assert drifts[1] < drifts[0] / 8
    assert drifts[0] < 1e-3 * sbp1d.energy(op, U)


def test_check_sbp_type_error():
    with pytest.raises(TypeError):
        sbp1d.check_sbp(np.eye(3))
