"""Dual bases on the triangle and the centroid positivity weights.

DoFs are point values at the three vertices and at ``k - 1`` points per edge,
plus moments ``M_mu(u) = (1/|K|) int_K c_mu l^mu u``. With the multinomial
``c_mu`` the moments of a cell sum to its average.

Moment basis: ``psi_mu = l1 l2 l3 sum_nu X[nu, mu] l^nu`` where ``A X = I``
and ``A[mu', nu] = M_mu'(l1 l2 l3 l^nu)``. Boundary basis:
``phi_sigma = P_sigma - sum_mu M_mu(P_sigma) psi_mu`` with ``P_sigma`` the
product-form Lagrange polynomial of the boundary point.

Three variants are known by name:

* ``quadratic``: k = 2, edge midpoints, one average moment
* ``cubic``: k = 3, equispaced edge points, one average moment
* ``cubic-moment``: k = 3, Gauss-Lobatto edge points, the three degree-1 moments
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np
import sympy

from .. import _exact
from .bary import BaryPoly, check_barycentric

VARIANTS = {
    "quadratic": (2, "gl", "average"),
    "cubic": (3, "equispaced", "average"),
    "cubic-moment": (3, "gl", "full"),
}
EDGES = ((0, 1), (1, 2), (2, 0))
CENTROID = (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))


@lru_cache(maxsize=None)
def _gl_points_exact(k: int) -> tuple:
    x = sympy.Symbol("x")
    roots = sorted(sympy.solve(sympy.diff(sympy.legendre(k, x), x), x), key=lambda r: float(r))
    inner = [sympy.nsimplify(sympy.radsimp((1 + r) / 2)) for r in roots]
    pts = [sympy.Integer(0)] + inner + [sympy.Integer(1)]
    return tuple(Fraction(int(p.p), int(p.q)) if p.is_Rational else p for p in pts)


def gl_points(k: int, exact: bool = False):
    """The ``k + 1`` Gauss-Lobatto points of [0, 1], increasing."""
    if not 2 <= k <= 5:
        raise ValueError("Gauss-Lobatto points are provided for 2 <= k <= 5")
    if exact:
        return list(_gl_points_exact(k))
    inner = np.polynomial.legendre.Legendre.basis(k).deriv().roots()
    return [0.0] + sorted(float((1 + r) / 2) for r in inner.real) + [1.0]


def equispaced_points(k: int):
    return [Fraction(i, k) for i in range(k + 1)]


def simplify(x):
    """Canonical form of an exact number (Fractions pass through)."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    # every exact value here lies in Q(sqrt 5): expand, clear radical
    # denominators and expand again to reach the form a + b sqrt(5)
    s = sympy.expand(sympy.radsimp(sympy.expand(sympy.sympify(x))))
    if s.is_Rational:
        return Fraction(int(s.p), int(s.q))
    return s


def _exponents(total: int):
    """Multi-indices of ``|mu| = total`` in lexicographic (decreasing) order."""
    return [(a, b, total - a - b) for a in range(total, -1, -1) for b in range(total - a, -1, -1)]


def _multinomial(mu):
    return Fraction(factorial(sum(mu)), factorial(mu[0]) * factorial(mu[1]) * factorial(mu[2]))


@dataclass(frozen=True)
class BoundaryPoint:
    bary: tuple
    kind: str  # "vertex" or "edge"
    edge: int  # edge index for edge points, vertex index for vertices


@dataclass
class TriDualBasis:
    k: int
    variant: str
    points: list
    mus: list
    c_mu: list
    A: list
    X: list
    psi: list
    lagrange: list
    phi: list

    @property
    def n_boundary(self) -> int:
        return len(self.points)

    @property
    def size(self) -> int:
        return len(self.points) + len(self.mus)

    def moment(self, i: int, poly: BaryPoly):
        mu = self.mus[i]
        return self.c_mu[i] * (poly * BaryPoly.monomial(mu)).mean()

    def functionals(self, poly: BaryPoly) -> list:
        """All DoFs of ``poly``: boundary point values, then moments."""
        return [poly.at(p.bary) for p in self.points] + [self.moment(i, poly) for i in range(len(self.mus))]

    def basis(self) -> list:
        return self.phi + self.psi

    def biorthogonality(self) -> np.ndarray:
        """Matrix ``theta_l(basis_q)``; the identity for a dual basis."""
        return np.array([[float(v) for v in self.functionals(b)] for b in self.basis()]).T

    def eval(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        return np.stack([b(lam) for b in self.float_basis()])

    def float_basis(self) -> list:
        cache = getattr(self, "_float_cache", None)
        if cache is None:
            cache = [b.map(float) for b in self.basis()]
            object.__setattr__(self, "_float_cache", cache)
        return cache


def _lagrange(point: BoundaryPoint, nodes, k):
    lam = point.bary
    if point.kind == "vertex":
        i = point.edge
        poly = BaryPoly.lam(i)
        for s in range(1, k):
            poly = poly * (BaryPoly.lam(i) - nodes[s])
    else:
        i, j = EDGES[point.edge]
        own = next(s for s in range(1, k) if lam[i] == nodes[s])
        poly = BaryPoly.lam(i) * BaryPoly.lam(j)
        for s in range(1, k):
            if s != own:
                poly = poly * (BaryPoly.lam(i) - nodes[s])
    norm = simplify(poly.at(lam))
    return poly.map(lambda c: simplify(c / norm))


def boundary_points(k: int, nodes) -> list:
    pts = []
    for i in range(3):
        b = [0, 0, 0]
        b[i] = 1
        pts.append(BoundaryPoint(tuple(Fraction(x) for x in b), "vertex", i))
    for e, (i, j) in enumerate(EDGES):
        for l in range(1, k):
            b = [Fraction(0)] * 3
            b[i], b[j] = nodes[k - l], nodes[l]
            pts.append(BoundaryPoint(tuple(b), "edge", e))
    return pts


def moment_matrix(k: int, moments: str = "full", scale: str = "mean"):
    """Exact moment matrix ``A[mu', nu] = M_mu'(l1 l2 l3 l^nu)``.

    ``scale="mean"`` uses the normalized moments of this module.
    ``scale="factorial"`` returns ``(p+a'+1)! (q+b'+1)! (r+c'+1)! / (2k)!``,
    the same matrix without its ``2 / (2k+1)`` factor (and without ``c_mu``);
    its solutions are those of the normalized system times ``2 / (2k + 1)``.
    """
    mus = _exponents(k - 2) if moments == "full" else [(0, 0, 0)]
    c_mu = [_multinomial(m) for m in mus] if moments == "full" else [Fraction(1)]
    bubble = BaryPoly.monomial((1, 1, 1))
    A = []
    for mu, c in zip(mus, c_mu):
        row = []
        for nu in mus:
            if scale == "mean":
                row.append(c * (bubble * BaryPoly.monomial(nu) * BaryPoly.monomial(mu)).mean())
            elif scale == "factorial":
                row.append(Fraction(factorial(nu[0] + mu[0] + 1) * factorial(nu[1] + mu[1] + 1)
                                    * factorial(nu[2] + mu[2] + 1), factorial(2 * k)))
            else:
                raise ValueError(f"unknown scale {scale!r}")
        A.append(row)
    return mus, c_mu, A


def solve_exact(A, b):
    """Exact solution of ``A x = b`` (raises ``ZeroDivisionError`` if singular)."""
    inv = _exact.inverse(A)
    return [sum((inv[i][j] * b[j] for j in range(len(b))), Fraction(0)) for i in range(len(b))]


def cyclic_solutions(A):
    """Solve ``A X = e_0`` once and get the other unit right-hand sides by rotation.

    Valid for circulant ``A`` (the three degree-1 moments); checked by the caller
    through the residual.
    """
    x = solve_exact(A, [Fraction(1)] + [Fraction(0)] * (len(A) - 1))
    n = len(x)
    return [[x[(i - m) % n] for i in range(n)] for m in range(n)]


@lru_cache(maxsize=None)
def build_dual_basis(variant: str = "quadratic", exact: bool = True) -> TriDualBasis:
    """Cached: callers treat the returned basis as read-only."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    k, node_kind, moments = VARIANTS[variant]
    if node_kind == "gl":
        nodes = gl_points(k, exact=exact)
    else:
        nodes = equispaced_points(k)
    if not exact:
        nodes = [float(x) for x in nodes]
    mus, c_mu, A = moment_matrix(k, moments)
    X = _exact.inverse(A)
    bubble = BaryPoly.monomial((1, 1, 1))
    psi = []
    for m in range(len(mus)):
        poly = BaryPoly()
        for n_idx, nu in enumerate(mus):
            poly = poly + BaryPoly.monomial(nu, X[n_idx][m])
        psi.append(bubble * poly)
    if not exact:
        psi = [p.to_float() for p in psi]
    pts = boundary_points(k, nodes)
    lag = [_lagrange(p, nodes, k) if exact else _lagrange_float(p, nodes, k) for p in pts]
    basis = TriDualBasis(k, variant, pts, mus, c_mu, A, X, psi, lag, [])
    phi = []
    for P in lag:
        poly = P
        for m in range(len(mus)):
            coeff = basis.moment(m, P)
            coeff = simplify(coeff) if exact else coeff
            poly = poly - psi[m] * coeff
        phi.append(poly.map(simplify) if exact else poly)
    basis.phi = phi
    return basis


def _lagrange_float(point, nodes, k):
    lam = point.bary
    if point.kind == "vertex":
        i = point.edge
        poly = BaryPoly.lam(i, 1.0)
        for s in range(1, k):
            poly = poly * (BaryPoly.lam(i, 1.0) - nodes[s])
    else:
        i, j = EDGES[point.edge]
        own = int(np.argmin([abs(float(lam[i]) - nodes[s]) for s in range(1, k)])) + 1
        poly = BaryPoly.lam(i, 1.0) * BaryPoly.lam(j, 1.0)
        for s in range(1, k):
            if s != own:
                poly = poly * (BaryPoly.lam(i, 1.0) - nodes[s])
    return poly / poly.at([float(x) for x in lam])


# --------------------------------------------------------------------------
# centroid identities


@dataclass
class CentroidWeights:
    variant: str
    omega_K: object  # coefficient of the average in u_h(centroid)
    phi_centroid: list  # boundary coefficients in u_h(centroid)
    alpha_K: object
    alphas: list

    @property
    def total(self):
        return self.alpha_K + sum(self.alphas)


def centroid_weights(variant: str) -> CentroidWeights:
    """Invert ``u_h(x_K) = sum_sigma phi_sigma(x_K) u_sigma + omega_K ubar``.

    Requires every ``psi_mu`` to take the same value ``omega_K`` at the
    centroid; the moments then collapse to the average.
    """
    basis = build_dual_basis(variant, exact=True)
    psi_c = [simplify(p.at(CENTROID)) for p in basis.psi]
    if any(simplify(v - psi_c[0]) != 0 for v in psi_c):
        raise ValueError("moment basis functions differ at the centroid")
    omega = psi_c[0]
    phi_c = [simplify(p.at(CENTROID)) for p in basis.phi]
    alpha_K = simplify(1 / omega)
    alphas = [simplify(-v / omega) for v in phi_c]
    return CentroidWeights(variant, omega, phi_c, alpha_K, alphas)


def boundary_lagrange_centroid(k: int = 3) -> list:
    """Values of the Gauss-Lobatto Lagrange polynomials ``P_sigma`` at the centroid."""
    if k != 3:
        raise ValueError("only k = 3 is supported")
    basis = build_dual_basis("cubic-moment", exact=True)
    return [(p.bary, simplify(P.at(CENTROID))) for p, P in zip(basis.points, basis.lagrange)]


def quadratic_basis_eval(lam) -> np.ndarray:
    """Closed-form quadratic basis ``(phi_1..3, phi_4..6, psi_K)`` at barycentric points."""
    lam = check_barycentric(lam)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    psi = 60.0 * l1 * l2 * l3
    return np.stack([
        (2 * l1 - 1) * l1, (2 * l2 - 1) * l2, (2 * l3 - 1) * l3,
        4 * l1 * l2 - psi / 3, 4 * l2 * l3 - psi / 3, 4 * l3 * l1 - psi / 3,
        psi,
    ])


def omega_factorial_scale() -> Fraction:
    """Centroid value of the first cubic moment function built from the unnormalized table.

    With ``A = moment_matrix(3, "full", "factorial")`` and ``A X = e_0``, the
    function ``l1 l2 l3 sum_nu X_nu l^nu`` equals ``sum(X) / 81`` at the centroid.
    Positive, like the normalized value 20/9; the two differ by the scale of the table.
    """
    X = cyclic_solutions(moment_matrix(3, "full", "factorial")[2])[0]
    return simplify(sum(X) / 81)
