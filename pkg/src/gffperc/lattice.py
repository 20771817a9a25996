"""Discretization of the rectangle (0, L) x (0, 1) by a square lattice.

The vertex set consists of the points of delta*Z^2 that lie strictly inside
the open rectangle, so x-coordinates run over delta, 2*delta, ..., and never
touch 0 or L.  The outermost rows and columns of this point set form the
boundary frame (every such vertex has a lattice neighbour outside the
rectangle); everything else is interior.

Design notes:
  - The frame is split into four boundary arcs named after the sides they
    cover.  Walking LEFT -> BOTTOM -> RIGHT -> TOP traverses the frame
    counter-clockwise.  Each arc is half-open: it contains the corner it
    starts from and stops short of the next corner.  Corner ``b`` is the
    frame vertex nearest the origin, and the corners in counter-clockwise
    order are a (top-left), b (bottom-left), c (bottom-right), d (top-right).
  - Vertex ids are row-major contiguous integers (row = y level), which keeps
    union-find and masking cache friendly.
  - Everything is immutable after construction and may be shared freely
    across worker processes.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

# Mesh guard: delta may not exceed a third of the shorter rectangle side.
_MESH_RATIO = 3.0
_INTEGRALITY_RTOL = 1e-9


class Arc(IntEnum):
    """Boundary arc selector.

    The four frame arcs partition the boundary.  INNER_LEFT and INNER_RIGHT
    are the interior vertices adjacent to the LEFT and RIGHT arcs; they act
    as source/target sets for events that cannot use the frame itself.
    """

    LEFT = 0
    BOTTOM = 1
    RIGHT = 2
    TOP = 3
    INNER_LEFT = 4
    INNER_RIGHT = 5


def _span_count(length: float, delta: float) -> int:
    """Number of lattice levels k*delta strictly inside (0, length)."""
    ratio = length / delta
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= _INTEGRALITY_RTOL * max(1.0, nearest):
        return int(nearest) - 1
    return int(np.floor(ratio))


class LatticeRect:
    """Rectangle lattice with arcs, corners and the nearest-neighbour edges.

    Attributes
    ----------
    L, delta : float
        Rectangle width and mesh.  The height is fixed at 1.
    nx, ny : int
        Number of lattice columns/rows strictly inside the rectangle
        (boundary frame included).
    arc_label : (n_vertices,) int8 array
        Arc value for frame vertices, -1 for interior vertices.
    edges : (n_edges, 2) int32 array
        Unordered nearest-neighbour pairs, horizontal edges first, then
        vertical, both in row-major order.
    """

    def __init__(self, L: float, delta: float):
        if not (L > 0.0 and delta > 0.0):
            raise ValueError("L and delta must be positive")
        if delta > min(L, 1.0) / _MESH_RATIO * (1.0 + 1e-12):
            raise ValueError(
                f"delta={delta} too coarse: need delta <= min(L, 1)/{_MESH_RATIO:g}"
            )
        self.L = float(L)
        self.delta = float(delta)
        self.nx = _span_count(L, delta)
        self.ny = _span_count(1.0, delta)
        # The mesh guard forces at least 3 levels per side, so >= 2 survive.
        assert self.nx >= 2 and self.ny >= 2

        nx, ny = self.nx, self.ny
        self.n_vertices = nx * ny

        cols = np.arange(1, nx + 1)
        rows = np.arange(1, ny + 1)
        ii, jj = np.meshgrid(cols, rows)  # shape (ny, nx), row-major ids
        self._ii = ii.ravel()
        self._jj = jj.ravel()

        self.arc_label = self._build_arc_labels()
        self.boundary_mask = self.arc_label >= 0
        self.interior_mask = ~self.boundary_mask
        self.interior_ids = np.flatnonzero(self.interior_mask).astype(np.int32)
        self.interior_index = np.full(self.n_vertices, -1, dtype=np.int32)
        self.interior_index[self.interior_ids] = np.arange(
            len(self.interior_ids), dtype=np.int32
        )
        self.n_interior = len(self.interior_ids)
        self.interior_shape = (max(ny - 2, 0), max(nx - 2, 0))

        self.a_id = self.vertex_id(1, ny)
        self.b_id = self.vertex_id(1, 1)
        self.c_id = self.vertex_id(nx, 1)
        self.d_id = self.vertex_id(nx, ny)

        self.edges = self._build_edges()
        self.n_edges = len(self.edges)
        self.edge_interior_mask = (
            self.interior_mask[self.edges[:, 0]] & self.interior_mask[self.edges[:, 1]]
        )

        for arr in (
            self._ii,
            self._jj,
            self.arc_label,
            self.boundary_mask,
            self.interior_mask,
            self.interior_ids,
            self.interior_index,
            self.edges,
            self.edge_interior_mask,
        ):
            arr.flags.writeable = False

    # -- construction helpers -------------------------------------------------

    def _build_arc_labels(self) -> np.ndarray:
        nx, ny = self.nx, self.ny
        ii = self._ii
        jj = self._jj
        label = np.full(self.n_vertices, -1, dtype=np.int8)
        # Half-open arcs: each one owns its starting corner.
        label[(ii == 1) & (jj >= 2)] = Arc.LEFT  # [a, b)
        label[(jj == 1) & (ii <= nx - 1)] = Arc.BOTTOM  # [b, c)
        label[(ii == nx) & (jj <= ny - 1)] = Arc.RIGHT  # [c, d)
        label[(jj == ny) & (ii >= 2)] = Arc.TOP  # [d, a)
        return label

    def _build_edges(self) -> np.ndarray:
        nx, ny = self.nx, self.ny
        ids = np.arange(self.n_vertices, dtype=np.int32).reshape(ny, nx)
        horiz = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
        vert = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
        return np.concatenate([horiz, vert], axis=0)

    # -- vertex geometry -------------------------------------------------------

    def vertex_id(self, i: int, j: int) -> int:
        """Row-major id of the vertex at (i*delta, j*delta), 1-based i, j."""
        if not (1 <= i <= self.nx and 1 <= j <= self.ny):
            raise ValueError(f"grid coordinates ({i}, {j}) outside lattice")
        return (j - 1) * self.nx + (i - 1)

    def grid_coords(self, v: int) -> tuple[int, int]:
        """Inverse of vertex_id."""
        return int(self._ii[v]), int(self._jj[v])

    def coords(self, v: int) -> tuple[float, float]:
        """Physical coordinates (x, y) of a vertex id."""
        return self._ii[v] * self.delta, self._jj[v] * self.delta

    def coords_array(self) -> np.ndarray:
        """(n_vertices, 2) physical coordinates."""
        return np.stack([self._ii * self.delta, self._jj * self.delta], axis=1)

    def corners(self) -> tuple[int, int, int, int]:
        return self.a_id, self.b_id, self.c_id, self.d_id

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"LatticeRect(L={self.L}, delta={self.delta}, grid={self.nx}x{self.ny}, "
            f"interior={self.n_interior})"
        )


def build_lattice(L: float, delta: float) -> LatticeRect:
    """Build the lattice for the rectangle (0, L) x (0, 1) with mesh delta.

    Rejects non-positive inputs and meshes coarser than min(L, 1)/3.
    """
    return LatticeRect(L, delta)


def arc_vertices(lat: LatticeRect, which: Arc) -> np.ndarray:
    """Vertex ids of the requested arc, ordered counter-clockwise.

    Frame arcs are half-open as described in the module docstring.  The inner
    arcs consist of the interior vertices having at least one neighbour on the
    corresponding frame arc, ordered parallel to that arc.
    """
    nx, ny = lat.nx, lat.ny
    which = Arc(which)
    if which == Arc.LEFT:
        # from a downward, excluding b
        return np.array([lat.vertex_id(1, j) for j in range(ny, 1, -1)], dtype=np.int32)
    if which == Arc.BOTTOM:
        # from b rightward, excluding c
        return np.array([lat.vertex_id(i, 1) for i in range(1, nx)], dtype=np.int32)
    if which == Arc.RIGHT:
        # from c upward, excluding d
        return np.array([lat.vertex_id(nx, j) for j in range(1, ny)], dtype=np.int32)
    if which == Arc.TOP:
        # from d leftward, excluding a
        return np.array([lat.vertex_id(i, ny) for i in range(nx, 1, -1)], dtype=np.int32)
    if which in (Arc.INNER_LEFT, Arc.INNER_RIGHT):
        frame = Arc.LEFT if which == Arc.INNER_LEFT else Arc.RIGHT
        frame_set = set(arc_vertices(lat, frame).tolist())
        members = []
        for v in lat.interior_ids:
            i, j = lat.grid_coords(int(v))
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ni, nj = i + di, j + dj
                if 1 <= ni <= nx and 1 <= nj <= ny:
                    if lat.vertex_id(ni, nj) in frame_set:
                        members.append(int(v))
                        break
        members.sort(key=lambda v: lat.grid_coords(v)[1])
        if which == Arc.INNER_LEFT:
            members.reverse()  # top to bottom, mirroring LEFT
        return np.array(members, dtype=np.int32)
    raise ValueError(f"unknown arc selector {which!r}")
