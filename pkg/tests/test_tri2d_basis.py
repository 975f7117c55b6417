from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pampa.tri2d import (BaryPoly, bary_integral, boundary_lagrange_centroid, build_dual_basis,
                         centroid_weights, check_barycentric, cyclic_solutions, gl_points,
                         moment_matrix, omega_factorial_scale, quadratic_basis_eval)

F = Fraction
VARIANTS = ["quadratic", "cubic", "cubic-moment"]


def test_bary_integral_examples():
    assert bary_integral(0, 0, 0, 3) == 3
    assert bary_integral(1, 1, 1) == F(1, 60)
    assert bary_integral(2, 1, 1) == F(1, 180)
    with pytest.raises(ValueError):
        bary_integral(-1, 0, 0)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(0, 4), n=st.integers(0, 4), q=st.integers(0, 4))
def test_bary_integral_matches_quadrature(m, n, q):
    # Duffy-transformed Gauss-Legendre rule on the unit right triangle (area 1/2)
    x, w = np.polynomial.legendre.leggauss(12)
    x, w = (x + 1) / 2, w / 2
    s, t = np.meshgrid(x, x, indexing="ij")
    ws = np.outer(w, w) * (1 - s)
    l2, l3 = s, t * (1 - s)
    l1 = 1 - l2 - l3
    quad = float((ws * l1**m * l2**n * l3**q).sum())
    assert quad == pytest.approx(float(bary_integral(m, n, q, F(1, 2))), rel=1e-12)


def test_barypoly_mean_is_exact():
    p = BaryPoly.monomial((1, 1, 1), 60)
    assert p.mean() == 1
    assert (BaryPoly.lam(0) * 2 - 1).at((F(1, 3),) * 3) == F(-1, 3)


def test_check_barycentric_rejects_bad_input():
    with pytest.raises(ValueError):
        check_barycentric([0.5, 0.6, 0.0])
    with pytest.raises(ValueError):
        check_barycentric([1.2, -0.2, 0.0])


def test_gauss_lobatto_points():
    assert gl_points(2) == pytest.approx([0, 0.5, 1])
    p = gl_points(3)
    assert p[1] == pytest.approx(0.2763932023, abs=1e-10)
    assert p[1] + p[2] == pytest.approx(1.0)
    exact = gl_points(3, exact=True)
    assert sympy.simplify(exact[1] - (sympy.sqrt(5) - 1) / (2 * sympy.sqrt(5))) == 0
    for k in (4, 5):
        pts = gl_points(k)
        assert len(pts) == k + 1 and np.all(np.diff(pts) > 0)
    with pytest.raises(ValueError):
        gl_points(6)


def test_circulant_moment_system():
    _, _, A = moment_matrix(3, "full", "factorial")
    assert A == [[F(c, 720) for c in row] for row in ([6, 4, 4], [4, 6, 4], [4, 4, 6])]
    X = cyclic_solutions(A)
    assert X[0] == [F(1800, 7), F(-720, 7), F(-720, 7)]
    for m, col in enumerate(X):
        residual = [sum(A[i][j] * col[j] for j in range(3)) - (i == m) for i in range(3)]
        assert all(r == 0 for r in residual)


def test_normalized_and_factorial_tables_differ_by_scale():
    # normalized solutions equal the factorial ones times 2 / (2k + 1)
    _, c_mu, A = moment_matrix(3, "full", "mean")
    Xn = cyclic_solutions(A)[0]
    Xf = cyclic_solutions(moment_matrix(3, "full", "factorial")[2])[0]
    ratio = [a / b for a, b in zip(Xn, Xf)]
    assert len(set(ratio)) == 1
    assert omega_factorial_scale() == F(360, 567) == F(40, 63)


def test_single_bubble_moment():
    _, _, A = moment_matrix(2, "average")
    assert A == [[F(1, 60)]]
    basis = build_dual_basis("quadratic")
    assert basis.psi[0].terms == {(1, 1, 1): 60}


@pytest.mark.parametrize("variant", VARIANTS)
def test_biorthogonality(variant):
    basis = build_dual_basis(variant, exact=True)
    assert np.abs(basis.biorthogonality() - np.eye(basis.size)).max() <= 1e-11


@pytest.mark.parametrize("variant", VARIANTS)
def test_moment_functions_vanish_on_the_boundary(variant):
    basis = build_dual_basis(variant, exact=False)
    for psi in basis.psi:
        for p in basis.points:
            assert abs(psi([float(x) for x in p.bary])) <= 1e-13


def test_float_basis_agrees_with_exact():
    ex, fl = build_dual_basis("cubic-moment", True), build_dual_basis("cubic-moment", False)
    lam = np.array([0.2, 0.3, 0.5])
    assert np.allclose(ex.eval(lam), fl.eval(lam), atol=1e-12)


def test_centroid_weight_tables():
    q = centroid_weights("quadratic")
    assert q.alpha_K == F(9, 20) and q.alphas == [F(1, 20)] * 3 + [F(2, 15)] * 3 and q.total == 1
    c = centroid_weights("cubic")
    assert c.alpha_K == F(9, 20) and c.alphas == [F(1, 30)] * 3 + [F(9, 120)] * 6 and c.total == 1
    assert q.omega_K == F(20, 9)


@pytest.mark.parametrize("variant", VARIANTS)
def test_centroid_sign_pattern(variant):
    w = centroid_weights(variant)
    assert w.omega_K > 0
    assert all(v < 0 for v in w.phi_centroid)
    assert all(a > 0 for a in w.alphas) and w.total == 1


def test_lagrange_centroid_values():
    values = boundary_lagrange_centroid(3)
    assert [v for _, v in values[:3]] == [F(-1, 27)] * 3
    r5 = sympy.sqrt(5)
    edge = sorted((float(v), v) for _, v in values[3:])
    for (_, v), want in zip(edge, [F(5, 18) - 5 * r5 / 54] * 3 + [F(5, 18) + 5 * r5 / 54] * 3):
        assert sympy.simplify(v - want) == 0
    with pytest.raises(ValueError):
        boundary_lagrange_centroid(2)


def test_quadratic_closed_form_examples():
    c = quadratic_basis_eval(np.full(3, 1 / 3))
    assert c[6] == pytest.approx(20 / 9)
    assert np.allclose(c[:3], -1 / 9) and np.allclose(c[3:6], -8 / 27)
    v = quadratic_basis_eval(np.array([1.0, 0.0, 0.0]))
    assert np.array_equal(v, [1, 0, 0, 0, 0, 0, 0])


def test_quadratic_closed_form_matches_dual_basis(rng):
    lam = rng.dirichlet(np.ones(3), 50)
    basis = build_dual_basis("quadratic", exact=False)
    assert np.allclose(quadratic_basis_eval(lam), basis.eval(lam), atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_quadratic_partition_of_unity(a, b):
    lam = np.array([a * (1 - b), (1 - a) * (1 - b), b])
    lam[2] = 1 - lam[0] - lam[1]
    lam = np.clip(lam, 0, 1)
    assert quadratic_basis_eval(lam).sum() == pytest.approx(1.0, abs=1e-13)
