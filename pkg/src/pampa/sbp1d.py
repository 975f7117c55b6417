"""Summation-by-parts structure of the 1D element and of the projected k = 2 scheme.

Element level: ``Q = M D`` satisfies ``Q + Q^T = B`` with ``B = diag(-1, 0, ..., 0, 1)``.

Global level (k = 2, uniform periodic mesh, central projection): on the
interleaved vector ``(u_0, ubar_0, u_1, ubar_1, ...)`` the scheme reads
``dU/dt = -a Dt U``. The average rows are ``(-1, 0, 1)/dx`` and the point rows
``(1, -3, 0, 3, -1)/dx``. With ``Mt = dx/4 diag(1, 3, 1, 3, ...)`` (weight 3 on
the averages) the product ``Mt Dt`` is skew-symmetric.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import _exact
from .basis1d import (boundary_matrix_exact, build_dual_basis, functional_matrix,
                      mass_matrix_exact, skew_matrix_exact)

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class SBPTriple:
    """Element operators in the package DoF order (left point, moments, right point).

    ``Q_exact``, ``D_exact``, ``B_exact`` are Fraction tables; ``Q``, ``D``, ``B``
    the float versions.
    """

    k: int
    Q_exact: tuple
    D_exact: tuple
    B_exact: tuple
    Q: np.ndarray
    D: np.ndarray
    B: np.ndarray


def element_sbp(k: int) -> SBPTriple:
    if k < 2:
        raise ValueError("k must be at least 2")
    basis = build_dual_basis(k)
    q = skew_matrix_exact(basis)
    d = _exact.matmul(_exact.inverse(mass_matrix_exact(basis)), q)
    b = boundary_matrix_exact(basis)
    freeze = lambda m: tuple(tuple(r) for r in m)  # noqa: E731
    return SBPTriple(k, freeze(q), freeze(d), freeze(b),
                     _exact.to_float(q), _exact.to_float(d), _exact.to_float(b))


def constant_dofs(k: int) -> np.ndarray:
    """DoFs of the constant 1; all ones for k = 2, ``1/(l+1)`` on the higher moments."""
    return np.array([float(row[0]) for row in functional_matrix(k)])


@dataclass(frozen=True)
class GlobalPeriodicOperator:
    n_cells: int
    dx: float
    D: sp.csr_matrix
    M: sp.dia_matrix

    @property
    def n_nodes(self) -> int:
        return self.n_cells

    @property
    def size(self) -> int:
        return 2 * self.n_cells


def point_slot(i: int, n_cells: int) -> int:
    return 2 * (i % n_cells)


def average_slot(j: int, n_cells: int) -> int:
    return 2 * (j % n_cells) + 1


def global_periodic_operator(n_cells: int, dx: float) -> GlobalPeriodicOperator:
    if n_cells < 3:
        raise ValueError("the periodic operator needs at least 3 cells")
    if dx <= 0:
        raise ValueError("dx must be positive")
    n = n_cells
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v / dx)

    for j in range(n):
        a = average_slot(j, n)
        put(a, point_slot(j, n), -1.0)
        put(a, point_slot(j + 1, n), 1.0)
        # node j+1 sits between cells j and j+1
        p = point_slot(j + 1, n)
        put(p, point_slot(j, n), 1.0)
        put(p, average_slot(j, n), -3.0)
        put(p, average_slot(j + 1, n), 3.0)
        put(p, point_slot(j + 2, n), -1.0)
    D = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))
    weights = np.tile([1.0, 3.0], n) * dx / 4.0
    return GlobalPeriodicOperator(n, dx, D, sp.diags(weights))


def interleave(point_values, averages) -> np.ndarray:
    out = np.empty(2 * len(point_values))
    out[0::2] = point_values
    out[1::2] = averages
    return out


def _max_abs(m) -> float:
    if sp.issparse(m):
        return float(abs(m).max()) if m.nnz else 0.0
    m = np.asarray(m, dtype=float)
    return float(np.abs(m).max()) if m.size else 0.0


def _exact_residual(a, b) -> float:
    return float(max(abs(Fraction(x) - Fraction(y)) for ra, rb in zip(a, b) for x, y in zip(ra, rb)))


def check_sbp(op) -> dict:
    """Residuals of the SBP identities; ``passed`` is true iff all are <= 1e-12."""
    if isinstance(op, SBPTriple):
        qt_q = [[op.Q_exact[i][j] + op.Q_exact[j][i] for j in range(op.k + 1)] for i in range(op.k + 1)]
        report = {
            "sbp": _exact_residual(qt_q, op.B_exact),
            "sbp_float": _max_abs(op.Q + op.Q.T - op.B),
            "consistency": _max_abs(op.D @ constant_dofs(op.k)),
            "boundary_diag": _max_abs(op.B - np.diag(np.diag(op.B))),
        }
    elif isinstance(op, GlobalPeriodicOperator):
        md = op.M @ op.D
        report = {
            "skew": _max_abs(md + md.T),
            "consistency": _max_abs(op.D @ np.ones(op.size)),
        }
    else:
        raise TypeError(f"cannot check {type(op).__name__}")
    report["passed"] = all(v <= RESIDUAL_TOL for v in report.values())
    return report


def check_matrices(Q, B) -> dict:
    """Residual of ``Q + Q^T = B`` for arbitrary (possibly perturbed) float matrices."""
    Q, B = np.asarray(Q, dtype=float), np.asarray(B, dtype=float)
    r = _max_abs(Q + Q.T - B)
    return {"sbp": r, "passed": r <= RESIDUAL_TOL}


def energy(op: GlobalPeriodicOperator, U) -> float:
    return float(U @ (op.M @ U))
