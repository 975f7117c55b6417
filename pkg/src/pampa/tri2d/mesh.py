"""Conforming triangle meshes with shared point-value slots.

Every vertex and every edge owns one point-value slot (the edge slot sits at
the midpoint); each triangle owns its average. Periodic meshes identify
vertices on opposite sides, so the per-triangle geometry is stored
separately (``tri_coords``) from the vertex table.
"""

from dataclasses import dataclass, field

import numpy as np

LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


class MeshError(ValueError):
    pass


@dataclass
class TriMesh:
    vertices: np.ndarray  # (NV, 2)
    triangles: np.ndarray  # (NT, 3), counterclockwise
    tri_coords: np.ndarray = None  # (NT, 3, 2) unwrapped corner coordinates
    periodic: bool = False
    edges: np.ndarray = field(init=False)  # (NE, 2) vertex pairs
    tri_edges: np.ndarray = field(init=False)  # (NT, 3) edge of each local edge
    edge_tris: list = field(init=False)  # incident triangles per edge

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshError("vertices must be an (NV, 2) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3 or len(self.triangles) == 0:
            raise MeshError("triangles must be a nonempty (NT, 3) array")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise MeshError("triangle references a missing vertex")
        if self.tri_coords is None:
            self.tri_coords = self.vertices[self.triangles]
        self.tri_coords = np.asarray(self.tri_coords, dtype=float)
        if np.any(self.areas <= 0):
            bad = int(np.argmax(self.areas <= 0))
            raise MeshError(f"triangle {bad} is degenerate or clockwise")
        self._build_edges()

    def _build_edges(self):
        index = {}
        edges, edge_tris, directions = [], [], []
        tri_edges = np.empty((len(self.triangles), 3), dtype=np.int64)
        for t, tri in enumerate(self.triangles):
            for le, (a, b) in enumerate(LOCAL_EDGES):
                va, vb = int(tri[a]), int(tri[b])
                if va == vb:
                    raise MeshError(f"triangle {t} repeats a vertex")
                key = (min(va, vb), max(va, vb))
                e = index.get(key)
                if e is None:
                    e = index[key] = len(edges)
                    edges.append(key)
                    edge_tris.append([])
                    directions.append([])
                edge_tris[e].append(t)
                directions[e].append((va, vb))
                tri_edges[t, le] = e
        for e, tris in enumerate(edge_tris):
            if len(tris) > 2:
                raise MeshError(f"edge {edges[e]} is shared by {len(tris)} triangles")
            # neighbours must traverse a shared edge in opposite directions
            if len(tris) == 2 and directions[e][0] != directions[e][1][::-1]:
                raise MeshError(f"edge {edges[e]} has inconsistent orientation")
        self.edges = np.array(edges, dtype=np.int64)
        self.tri_edges = tri_edges
        self.edge_tris = edge_tris

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_points(self) -> int:
        return self.n_vertices + self.n_edges

    @property
    def areas(self) -> np.ndarray:
        p = self.tri_coords
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def perimeters(self) -> np.ndarray:
        p = self.tri_coords
        return sum(np.linalg.norm(p[:, b] - p[:, a], axis=1) for a, b in LOCAL_EDGES)

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.array([e for e, t in enumerate(self.edge_tris) if len(t) == 1], dtype=np.int64)

    def local_slots(self) -> np.ndarray:
        """(NT, 6) global point slots in local order (v0, v1, v2, m01, m12, m20)."""
        return np.hstack([self.triangles, self.n_vertices + self.tri_edges])

    def local_points(self) -> np.ndarray:
        """(NT, 6, 2) coordinates of the local point DoFs."""
        p = self.tri_coords
        mids = np.stack([(p[:, a] + p[:, b]) / 2 for a, b in LOCAL_EDGES], axis=1)
        return np.concatenate([p, mids], axis=1)

    def slot_coordinates(self) -> np.ndarray:
        """One coordinate per point slot, taken from the first triangle using it."""
        out = np.full((self.n_points, 2), np.nan)
        slots, pts = self.local_slots().ravel(), self.local_points().reshape(-1, 2)
        first = np.unique(slots, return_index=True)[1]
        out[slots[first]] = pts[first]
        return out

    def boundary_slots(self) -> np.ndarray:
        be = self.boundary_edges
        if be.size == 0:
            return np.array([], dtype=np.int64)
        verts = np.unique(self.edges[be].ravel())
        return np.concatenate([verts, self.n_vertices + be])


def make_structured(x0: float, x1: float, y0: float, y1: float, n: int, *,
                    periodic: bool = False, jitter: float = 0.0, seed: int = 0) -> TriMesh:
    """``n x n`` squares, each cut into two counterclockwise triangles.

    ``jitter`` moves interior vertices by up to ``jitter * h`` in each
    direction (non-periodic only); values below 0.25 keep every area positive.
    """
    if n < 1 or (periodic and n < 3):
        raise MeshError("need n >= 1 (n >= 3 when periodic)")
    if not (x1 > x0 and y1 > y0):
        raise MeshError("empty domain")
    if periodic and jitter:
        raise MeshError("jitter is only supported on non-periodic meshes")
    if not 0 <= jitter < 0.25:
        raise MeshError("jitter must lie in [0, 0.25)")
    xs, ys = np.linspace(x0, x1, n + 1), np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    coords = np.stack([X, Y], axis=-1)  # (n+1, n+1, 2)
    if jitter:
        rng = np.random.default_rng(seed)
        h = np.array([(x1 - x0) / n, (y1 - y0) / n])
        shift = rng.uniform(-jitter, jitter, size=(n - 1, n - 1, 2)) * h
        coords[1:-1, 1:-1] += shift
    m = n if periodic else n + 1
    vid = lambda i, j: (i % m) * m + (j % m)  # noqa: E731
    vertices = coords[:m, :m].reshape(-1, 2)
    tris, tcoords = [], []
    for i in range(n):
        for j in range(n):
            a, b, c, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            for corner in ((a, b, c), (a, c, d)):
                tris.append([vid(*p) for p in corner])
                tcoords.append([coords[p] for p in corner])
    return TriMesh(vertices, np.array(tris), np.array(tcoords), periodic=periodic)


def read_mesh(path) -> TriMesh:
    """Read ``NV NT``, then NV lines ``x y``, then NT lines ``i j k`` (0-based)."""
    with open(path) as fh:
        tokens = fh.read().split()
    try:
        nv, nt = int(tokens[0]), int(tokens[1])
        body = tokens[2:]
        if len(body) != 2 * nv + 3 * nt:
            raise MeshError(f"expected {2 * nv + 3 * nt} numbers after the header, found {len(body)}")
        vertices = np.array(body[:2 * nv], dtype=float).reshape(nv, 2)
        triangles = np.array([int(t) for t in body[2 * nv:]], dtype=np.int64).reshape(nt, 3)
    except (IndexError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"malformed mesh file: {exc}") from exc
    return TriMesh(vertices, triangles)


def write_mesh(mesh: TriMesh, path) -> None:
    if mesh.periodic:
        raise MeshError("the text format cannot describe periodic identification")
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
