import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pampa import bp1d, problems, scheme1d as S
from pampa.mesh1d import Solution1D, make_random, make_uniform

UNIT = bp1d.Bounds(0.0, 1.0)
BURGERS = S.burgers()


def test_bounds_validation():
    with pytest.raises(ValueError):
        bp1d.Bounds(1.0, 0.0)
    assert bool(UNIT.contains(1.0 + 1e-13)) and not bool(UNIT.contains(1.0 + 1e-11))


@pytest.mark.parametrize("flux", [bp1d.upwind_linear(1.0), bp1d.upwind_linear(-2.0),
                                  bp1d.rusanov(BURGERS.f, BURGERS.df), bp1d.rusanov_flux(BURGERS)])
def test_fluxes_are_consistent_and_monotone(flux):
    assert bp1d.check_monotone(flux) == (True, True, True)


def test_stability_limits():
    assert bp1d.upwind_linear(1.0).lam0 == 1.0
    assert bp1d.rusanov(BURGERS.f, BURGERS.df).lam0 == 0.5


def test_simpson_midpoint_examples():
    assert bp1d.simpson_midpoint(2, 2, 2) == 2
    assert bp1d.simpson_midpoint(0, 0.5, 1) == 0.5
    assert bp1d.simpson_midpoint(0, 1, 0) == 1.5


@pytest.mark.parametrize("flux", [bp1d.upwind_linear(0.8), bp1d.rusanov(BURGERS.f, BURGERS.df)])
def test_telescoping_identity(flux, rng):
    u_j, ubar, u_j1 = rng.uniform(-2, 2, (3, 1000))
    lam = rng.uniform(0, 1, 1000)
    direct, decomposed = bp1d.convex_average_update(u_j, ubar, u_j1, flux, lam)
    assert np.abs(direct - decomposed).max() <= 1e-13


def test_constant_state_is_fixed():
    for flux in (bp1d.upwind_linear(1.0), bp1d.rusanov(BURGERS.f, BURGERS.df)):
        assert bp1d.convex_average_update(0.3, 0.3, 0.3, flux, 0.1) == pytest.approx((0.3, 0.3))


def test_linear_profile_at_limit_cfl():
    flux = bp1d.upwind_linear(1.0)
    lam = 1 / 6
    mid = bp1d.simpson_midpoint(0, 0.5, 1)
    brackets = [1 - 6 * lam * (1 - flux(mid, 1)), mid - 1.5 * lam * (flux(mid, 1) - flux(0, mid)),
                0 - 6 * lam * (flux(0, mid) - 0)]
    direct, _ = bp1d.convex_average_update(0.0, 0.5, 1.0, flux, lam)
    assert all(0 <= b <= 1.5 for b in brackets)
    assert 0 <= direct <= 1.5


def test_guarantee_verdicts():
    flux = bp1d.upwind_linear(1.0)
    assert bp1d.average_bounds_guarantee(0.1, 0.5, 0.9, flux, 1 / 6, UNIT) is bp1d.Verdict.PASS
    assert bp1d.average_bounds_guarantee(0.1, 0.5, 0.9, flux, 0.0, UNIT) is bp1d.Verdict.PASS
    assert bp1d.average_bounds_guarantee(0.1, 0.5, 0.9, flux, 0.25, UNIT) is bp1d.Verdict.NOT_APPLICABLE
    # midpoint (6 * 0.9 - 0 - 0) / 4 > 1: outside the preconditions
    assert bp1d.average_bounds_guarantee(0.0, 0.9, 0.0, flux, 0.1, UNIT) is bp1d.Verdict.NOT_APPLICABLE


def test_zero_step_keeps_average():
    direct, _ = bp1d.convex_average_update(0.2, 0.4, 0.9, bp1d.upwind_linear(1.0), 0.0)
    assert direct == 0.4


def test_random_trials_upwind():
    rep = bp1d.random_trials(100_000, bp1d.upwind_linear(1.0), UNIT, seed=3)
    assert rep["violations"] == 0 and rep["max_telescoping_error"] <= 1e-13


def test_random_trials_rusanov():
    flux = bp1d.rusanov(BURGERS.f, BURGERS.df)
    rep = bp1d.random_trials(50_000, flux, bp1d.Bounds(-1.0, 1.0), seed=4)
    assert rep["violations"] == 0


def test_violations_exist_beyond_the_limit():
    # with 6 lam = 1.5 an admissible tuple can leave the bounds
    rep = bp1d.random_trials(100_000, bp1d.upwind_linear(1.0), UNIT, seed=5, lam_max=0.25)
    assert rep["violations"] > 0
    direct, _ = bp1d.convex_average_update(0.0, 0.2, 1.0, bp1d.upwind_linear(1.0), 0.25)
    assert direct < 0


def test_admissible_dt_examples():
    assert bp1d.admissible_dt(9 / 20, [1 / 20, 2 / 15], 1.0, 1.0, 1.0) == pytest.approx(1 / 20)
    assert bp1d.admissible_dt(9 / 20, [1 / 20, 2 / 15], 0.0, 1.0, 1.0) == 0.0
    dx, speed = 0.1, 2.0
    assert bp1d.admissible_dt(4 / 6, [1 / 6, 1 / 6], 1.0, dx, speed) == pytest.approx(dx / (6 * speed))
    assert bp1d.admissible_dt(0.5, [0.5], 1.0, 1.0, 0.0) == np.inf


@pytest.mark.parametrize("weights", [(0.0, [0.5]), (0.5, [-0.1, 0.6])])
def test_admissible_dt_rejects_nonpositive_weights(weights):
    with pytest.raises(ValueError):
        bp1d.admissible_dt(*weights, 1.0, 1.0, 1.0)


# --------------------------------------------------------------------------
# limiters


def test_limit_cell_examples():
    vals, theta = bp1d.limit_cell(0.5, [0.2, 0.9], UNIT)
    assert theta == 1.0 and np.array_equal(vals, [0.2, 0.9])
    vals, theta = bp1d.limit_cell(0.5, [-0.5, 1.5], UNIT)
    assert theta == 0.5 and np.allclose(vals, [0.0, 1.0])
    vals, theta = bp1d.limit_cell(0.5, [0.5, 0.5], UNIT)
    assert theta == 1.0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_limit_solution_properties(seed):
    rng = np.random.default_rng(seed)
    mesh = make_random(0, 1, 10, 0.3, seed)
    avg = rng.uniform(0, 1, 10)
    avg[0] = 1.5  # out of bounds: must be skipped and left alone
    sol = Solution1D(2, rng.uniform(-0.5, 1.5, 10), (avg * mesh.lengths)[:, None])
    before = sol.cell_moments.copy()
    stats = bp1d.limit_solution(mesh, sol, UNIT)
    assert np.array_equal(sol.cell_moments, before)
    assert stats.n_skipped == 1
    ok_nodes = np.setdiff1d(np.arange(10), [mesh.left_point[0], mesh.right_point[0]])
    v = sol.point_values[ok_nodes]
    assert np.all((v >= 0) & (v <= 1))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), a=st.sampled_from([1.0, -0.7]), c=st.floats(0.01, 0.15))
def test_constraint_keeps_next_average_in_bounds(seed, a, c):
    rng = np.random.default_rng(seed)
    mesh = make_uniform(0, 1, 12)
    avg = rng.uniform(0, 1, 12)
    sol = Solution1D(2, rng.uniform(-0.3, 1.3, 12), (avg * mesh.lengths)[:, None])
    lam = c / abs(a) * np.ones(12)
    rep = bp1d.constrain_points(mesh, sol, UNIT, lam, speed=a)
    v = sol.point_values
    nxt = avg - lam * a * (v[mesh.right_point] - v[mesh.left_point])
    assert rep.feasible
    assert np.all(UNIT.contains(nxt)) and np.all(UNIT.contains(v, 0.0))
    assert np.array_equal(sol.averages(mesh), avg * mesh.lengths / mesh.lengths)


def test_constraint_is_noop_when_satisfied():
    mesh = make_uniform(0, 1, 5)
    sol = Solution1D(2, np.full(5, 0.5), np.full((5, 1), 0.5 * 0.2))
    rep = bp1d.constrain_points(mesh, sol, UNIT, 0.1 * np.ones(5), speed=1.0)
    assert rep.iterations == 0 and np.all(sol.point_values == 0.5)


def test_jiang_shu_profile():
    x = np.linspace(-1, 1, 2001)
    u = problems.jiang_shu(x)
    assert u.min() == 0.0 and u.max() == pytest.approx(1.0)
    # the square pulse takes its left limit at the jumps
    assert problems.jiang_shu(np.array([-0.4, -0.3, -0.2])).tolist() == [0.0, 1.0, 1.0]


@pytest.mark.parametrize("mode", ["point", "point-and-average"])
def test_short_jiang_shu_run_stays_in_bounds(mode):
    cfg = S.RunConfig1D(make_uniform(-1, 1, 100), 2, S.linear_advection(1.0), problems.jiang_shu,
                        0.15, 0.3, projection=S.ProjectionRule("central"), bp=mode, bounds=(0.0, 1.0))
    res = S.run_simulation(cfg)
    assert min(d["min_average"] for d in res.diagnostics) >= -1e-12
    assert max(d["max_average"] for d in res.diagnostics) <= 1 + 1e-12


def test_point_scaling_alone_is_not_enough():
    cfg = S.RunConfig1D(make_uniform(-1, 1, 300), 2, S.linear_advection(1.0), problems.jiang_shu,
                        0.15, 0.2, bp="point-scaling", bounds=(0.0, 1.0))
    res = S.run_simulation(cfg)
    # once an average leaves the bounds its cell is skipped by the limiter
    assert min(d["min_average"] for d in res.diagnostics) < -1e-6
