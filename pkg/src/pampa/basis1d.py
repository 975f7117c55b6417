"""Dual bases, mass matrices and Riesz representers for 1D PAMPA elements.

Everything lives on the reference cell ``xi in [0, 1]``. The local DoF
functionals, in the order used throughout the package, are

    (value at xi=0, int xi^0 v, ..., int xi^(k-2) v, value at xi=1)

so for ``k = 2`` the layout is (left value, average, right value). Matrices
are assembled in exact rational arithmetic from ``int_0^1 xi^n = 1/(n+1)``
and converted to floats afterwards.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from . import _exact

MAX_ORDER = 8


def functional_matrix(k: int):
    """Exact table ``T[l][n] = <theta_l, xi^n>`` in the package DoF order."""
    rows = [[Fraction(int(n == 0)) for n in range(k + 1)]]
    for l in range(k - 1):
        rows.append([Fraction(1, l + n + 1) for n in range(k + 1)])
    rows.append([Fraction(1)] * (k + 1))
    return rows


@dataclass(frozen=True)
class DualBasis1D:
    """Polynomials ``phi_q`` with ``<theta_l, phi_q> = delta_lq``.

    ``exact_coeffs[q][n]`` is the coefficient of ``xi^n`` in ``phi_q``;
    ``coeffs`` is the same table as a float array.
    """

    k: int
    exact_coeffs: tuple
    coeffs: np.ndarray

    @property
    def size(self) -> int:
        return self.k + 1

    def polynomials(self) -> list:
        return [Polynomial(row) for row in self.coeffs]

    def eval(self, xi) -> np.ndarray:
        """Values ``phi_q(xi)``, shape ``(k+1,) + shape(xi)``."""
        xi = np.asarray(xi, dtype=float)
        powers = xi[..., None] ** np.arange(self.k + 1)
        return np.moveaxis(powers @ self.coeffs.T, -1, 0)

    def eval_deriv(self, xi) -> np.ndarray:
        """Values ``d phi_q / d xi`` at ``xi``."""
        xi = np.asarray(xi, dtype=float)
        n = np.arange(1, self.k + 1)
        powers = xi[..., None] ** (n - 1)
        return np.moveaxis(powers @ (self.coeffs[:, 1:] * n).T, -1, 0)

    def interpolate(self, dofs, xi) -> np.ndarray:
        """Evaluate ``sum_q dofs[..., q] phi_q(xi)``."""
        return np.tensordot(np.asarray(dofs), self.eval(xi), axes=(-1, 0))


def build_dual_basis(k: int) -> DualBasis1D:
    if not 2 <= k <= MAX_ORDER:
        raise ValueError(f"order k must be in [2, {MAX_ORDER}], got {k}")
    try:
        t_inv = _exact.inverse(functional_matrix(k))
    except ZeroDivisionError as exc:  # pragma: no cover - cannot happen for these functionals
        raise RuntimeError("degenerate DoF functionals") from exc
    exact = tuple(tuple(row) for row in _exact.transpose(t_inv))
    return DualBasis1D(k, exact, _exact.to_float(exact))


def _gram_exact(basis: DualBasis1D, derivative: bool = False):
    c = basis.exact_coeffs
    n = basis.size
    out = [[Fraction(0)] * n for _ in range(n)]
    for l in range(n):
        for kap in range(n):
            acc = Fraction(0)
            for p, cl in enumerate(c[l]):
                if cl == 0:
                    continue
                for q, ck in enumerate(c[kap]):
                    if ck == 0:
                        continue
                    if derivative:
                        if q:
                            acc += cl * ck * Fraction(q, p + q)
                    else:
                        acc += cl * ck * Fraction(1, p + q + 1)
            out[l][kap] = acc
    return out


def mass_matrix_exact(basis: DualBasis1D):
    """Reference-cell mass matrix ``int_0^1 phi_l phi_kappa`` as Fractions."""
    return _gram_exact(basis)


def mass_matrix(basis: DualBasis1D, dx: float) -> np.ndarray:
    if dx <= 0:
        raise ValueError("dx must be positive")
    return dx * _exact.to_float(mass_matrix_exact(basis))


def inverse_mass(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("mass matrix must be square")
    if not np.allclose(M, M.T, rtol=1e-13, atol=1e-15):
        raise ValueError("mass matrix is not symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise ValueError("mass matrix is not positive definite") from exc
    return np.linalg.inv(M)


def skew_matrix_exact(basis: DualBasis1D):
    """``Q[l][kappa] = int_0^1 phi_l phi_kappa'`` as Fractions."""
    return _gram_exact(basis, derivative=True)


def boundary_matrix_exact(basis: DualBasis1D):
    at0 = [sum(row[:1], Fraction(0)) for row in basis.exact_coeffs]
    at1 = [sum(row, Fraction(0)) for row in basis.exact_coeffs]
    n = basis.size
    return [[at1[l] * at1[q] - at0[l] * at0[q] for q in range(n)] for l in range(n)]


def riesz_representers(basis: DualBasis1D) -> list:
    """Polynomials ``psi_l`` in ``xi`` with ``int_0^1 psi_l v = <theta_l, v>``.

    Moment functionals are represented by their monomials; the two point
    functionals by ``sum_q a_lq phi_q`` with ``a`` the inverse reference mass.
    """
    k = basis.k
    a = _exact.inverse(mass_matrix_exact(basis))
    reps = []
    for l in range(k + 1):
        if 0 < l < k:
            coef = [0.0] * (l - 1) + [1.0]
        else:
            coef = [float(sum(a[l][q] * basis.exact_coeffs[q][n] for q in range(k + 1)))
                    for n in range(k + 1)]
        reps.append(Polynomial(coef))
    return reps


@dataclass(frozen=True)
class OperatorSet1D:
    k: int
    dx: float
    M: np.ndarray
    M_inv: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    B: np.ndarray


def build_operators(basis: DualBasis1D, dx: float = 1.0) -> OperatorSet1D:
    M = mass_matrix(basis, dx)
    inv = _exact.inverse(mass_matrix_exact(basis))
    q = skew_matrix_exact(basis)
    return OperatorSet1D(
        basis.k, dx, M,
        M_inv=_exact.to_float(inv) / dx,
        Q=_exact.to_float(q),
        D=_exact.to_float(_exact.matmul(inv, q)) / dx,
        B=_exact.to_float(boundary_matrix_exact(basis)),
    )
