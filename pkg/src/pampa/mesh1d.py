"""One-dimensional meshes and the PAMPA degree-of-freedom layout.

A cell ``j`` is the interval ``[x_j, x_{j+1}]``. Point values live on the
nodes and are shared by the two cells meeting there; each cell also owns
``k - 1`` moments ``int_I m_l(x) u(x) dx`` with ``m_l = ((x - x_j)/dx)^l``.

On a periodic mesh the last node is the periodic image of the first, so
there are ``n_cells`` distinct point values; otherwise ``n_cells + 1``.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Mesh1D:
    nodes: np.ndarray
    periodic: bool = True

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if self.periodic and nodes.size - 1 < 3:
            raise ValueError("periodic meshes need at least 3 cells")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    @property
    def n_points(self) -> int:
        """Number of distinct point-value slots."""
        return self.n_cells if self.periodic else self.n_cells + 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def period(self) -> float:
        return self.nodes[-1] - self.nodes[0]

    def cell_length(self, j: int) -> float:
        return float(self.nodes[j + 1] - self.nodes[j])

    @property
    def left_point(self) -> np.ndarray:
        """Point slot of the left end of every cell."""
        return np.arange(self.n_cells)

    @property
    def right_point(self) -> np.ndarray:
        """Point slot of the right end of every cell."""
        idx = np.arange(1, self.n_cells + 1)
        return idx % self.n_cells if self.periodic else idx

    @property
    def point_coordinates(self) -> np.ndarray:
        return self.nodes[: self.n_points]

    def left(self, j: int) -> int:
        """Cell to the left of cell ``j`` (-1 at a non-periodic boundary)."""
        if j > 0:
            return j - 1
        return self.n_cells - 1 if self.periodic else -1

    def right(self, j: int) -> int:
        """Cell to the right of cell ``j`` (-1 at a non-periodic boundary)."""
        if j < self.n_cells - 1:
            return j + 1
        return 0 if self.periodic else -1


def make_uniform(a: float, b: float, n_cells: int, periodic: bool = True) -> Mesh1D:
    if n_cells < 1:
        raise ValueError("n_cells must be positive")
    if not b > a:
        raise ValueError("need b > a")
    return Mesh1D(np.linspace(a, b, n_cells + 1), periodic)


def make_random(a: float, b: float, n_cells: int, jitter: float, seed: int,
                periodic: bool = True) -> Mesh1D:
    """Uniform mesh whose interior nodes are moved by up to ``jitter * dx``.

    Displacements are drawn uniformly in ``[-jitter, jitter] * dx`` with a
    seeded generator; the end points never move.
    """
    if not 0.0 <= jitter < 0.5:
        raise ValueError("jitter must lie in [0, 0.5)")
    base = make_uniform(a, b, n_cells, periodic)
    if jitter == 0.0:
        return base
    dx = (b - a) / n_cells
    rng = np.random.default_rng(seed)
    nodes = np.array(base.nodes)
    nodes[1:-1] += rng.uniform(-jitter, jitter, n_cells - 1) * dx
    return Mesh1D(nodes, periodic)


@dataclass
class Solution1D:
    """Continuous point values plus per-cell moments in integral form.

    ``cell_moments[j, l]`` stores ``int_{I_j} m_l u dx`` so for ``k = 2`` the
    single moment is ``dx * average``.
    """

    k: int
    point_values: np.ndarray
    cell_moments: np.ndarray
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("order k must be at least 2")
        self.point_values = np.asarray(self.point_values, dtype=float)
        self.cell_moments = np.asarray(self.cell_moments, dtype=float).reshape(-1, self.k - 1)

    @property
    def n_cells(self) -> int:
        return self.cell_moments.shape[0]

    def average(self, j, mesh: Mesh1D):
        return self.cell_moments[j, 0] / mesh.lengths[j]

    def averages(self, mesh: Mesh1D) -> np.ndarray:
        return self.cell_moments[:, 0] / mesh.lengths

    def reference_moments(self, mesh: Mesh1D) -> np.ndarray:
        """Moments on the reference cell, ``int_0^1 xi^l u dxi``."""
        return self.cell_moments / mesh.lengths[:, None]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.point_values, self.cell_moments.ravel()])

    @classmethod
    def from_vector(cls, k: int, mesh: Mesh1D, vec: np.ndarray) -> "Solution1D":
        npts = mesh.n_points
        return cls(k, vec[:npts].copy(), vec[npts:].reshape(mesh.n_cells, k - 1).copy())

    def copy(self) -> "Solution1D":
        return Solution1D(self.k, self.point_values.copy(), self.cell_moments.copy())


def cell_local_dofs(mesh: Mesh1D, u: Solution1D) -> np.ndarray:
    """Per-cell reference DoF table ``(left, moments..., right)``, shape (n_cells, k+1)."""
    local = np.empty((mesh.n_cells, u.k + 1))
    local[:, 0] = u.point_values[mesh.left_point]
    local[:, 1:-1] = u.reference_moments(mesh)
    local[:, -1] = u.point_values[mesh.right_point]
    return local
