"""Crossing events, first-passage sets, pivotal edges and the level line.

Four crossing events share one entry point.  The discrete events ask for a
vertex path whose field values satisfy a sign rule (weak on the frame arcs,
strict between the inner arcs) and are decided by breadth-first search.  The
metric events ask for a path of open edges and are decided by union-find with
two virtual terminals spliced onto the source and target arcs; the
zero-boundary variant only walks interior-interior edges because every
boundary-incident edge is closed under zero boundary data.

A deliberately independent flood-fill implementation of the same decisions is
kept solely so the fast paths can be checked against it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gff import Field
from .lattice import Arc, LatticeRect, arc_vertices
from .metric import EdgeStates


class CrossingMode(Enum):
    """Sign rule plus source/target arcs for a left-right crossing."""

    DISCRETE_ALT = "discrete_alt"  # values >= 0, LEFT -> RIGHT
    DISCRETE_ZERO = "discrete_zero"  # values > 0, INNER_LEFT -> INNER_RIGHT
    METRIC_ALT = "metric_alt"  # open edges, LEFT -> RIGHT
    METRIC_ZERO = "metric_zero"  # open interior edges, INNER_LEFT -> INNER_RIGHT


_DISCRETE_MODES = (CrossingMode.DISCRETE_ALT, CrossingMode.DISCRETE_ZERO)
_METRIC_MODES = (CrossingMode.METRIC_ALT, CrossingMode.METRIC_ZERO)


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    def __init__(self, n: int):
        self.parents = list(range(n))
        self.ranks = [0] * n

    def find(self, i: int) -> int:
        parents = self.parents
        root = i
        while parents[root] != root:
            root = parents[root]
        while parents[i] != root:
            parents[i], i = root, parents[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.ranks[ri] < self.ranks[rj]:
            ri, rj = rj, ri
        self.parents[rj] = ri
        if self.ranks[ri] == self.ranks[rj]:
            self.ranks[ri] += 1

    def connected(self, i: int, j: int) -> bool:
        return self.find(i) == self.find(j)


# -- shared helpers ------------------------------------------------------------


def _field_values(lat: LatticeRect, field) -> np.ndarray:
    values = field.values if isinstance(field, Field) else np.asarray(field, dtype=float)
    if values.shape != (lat.n_vertices,):
        raise ValueError("field does not match lattice")
    return values


def _open_mask(lat: LatticeRect, edges) -> np.ndarray:
    mask = edges.open_mask if isinstance(edges, EdgeStates) else np.asarray(edges, dtype=bool)
    if mask.shape != (lat.n_edges,):
        raise ValueError("edge states do not match lattice")
    return mask


def _discrete_spec(lat: LatticeRect, mode: CrossingMode, values: np.ndarray):
    if mode == CrossingMode.DISCRETE_ALT:
        return values >= 0.0, Arc.LEFT, Arc.RIGHT
    return values > 0.0, Arc.INNER_LEFT, Arc.INNER_RIGHT


def _metric_spec(lat: LatticeRect, mode: CrossingMode):
    """(usable edge mask, source arc, target arc) for a metric mode."""
    if mode == CrossingMode.METRIC_ALT:
        return np.ones(lat.n_edges, dtype=bool), Arc.LEFT, Arc.RIGHT
    src = arc_vertices(lat, Arc.INNER_LEFT)
    tgt = arc_vertices(lat, Arc.INNER_RIGHT)
    if np.intersect1d(src, tgt).size:
        raise ValueError(
            "inner arcs overlap on this lattice; the zero-boundary metric "
            "event is not defined by edge states alone"
        )
    return lat.edge_interior_mask, Arc.INNER_LEFT, Arc.INNER_RIGHT


def _bfs_reach(allowed: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Breadth-first reachable set on the grid; boolean (ny, nx) arrays."""
    reached = seeds & allowed
    frontier = reached.copy()
    while frontier.any():
        grow = np.zeros_like(frontier)
        grow[1:, :] |= frontier[:-1, :]
        grow[:-1, :] |= frontier[1:, :]
        grow[:, 1:] |= frontier[:, :-1]
        grow[:, :-1] |= frontier[:, 1:]
        frontier = grow & allowed & ~reached
        reached |= frontier
    return reached


def _arc_seed_grid(lat: LatticeRect, which: Arc) -> np.ndarray:
    seeds = np.zeros(lat.n_vertices, dtype=bool)
    seeds[arc_vertices(lat, which)] = True
    return seeds.reshape(lat.ny, lat.nx)


def _metric_union_find(lat: LatticeRect, open_mask, usable, src_arc, tgt_arc):
    """Union-find over usable open edges with terminals on the two arcs.

    Returns (uf, source terminal id, target terminal id).
    """
    n = lat.n_vertices
    uf = UnionFind(n + 2)
    src_t, tgt_t = n, n + 1
    for v in arc_vertices(lat, src_arc):
        uf.union(src_t, int(v))
    for v in arc_vertices(lat, tgt_arc):
        uf.union(tgt_t, int(v))
    edges = lat.edges
    for e in np.flatnonzero(open_mask & usable):
        uf.union(int(edges[e, 0]), int(edges[e, 1]))
    return uf, src_t, tgt_t


# -- crossing decisions ---------------------------------------------------------


def crossing(lat: LatticeRect, field_or_edges, mode: CrossingMode) -> bool:
    """Decide the left-right crossing event for the given mode.

    Discrete modes take a Field (or raw vertex values); metric modes take
    EdgeStates (or a raw open mask).
    """
    mode = CrossingMode(mode)
    if mode in _DISCRETE_MODES:
        if isinstance(field_or_edges, EdgeStates):
            raise TypeError("discrete modes need vertex values, got edge states")
        values = _field_values(lat, field_or_edges)
        allowed, src, tgt = _discrete_spec(lat, mode, values)
        reached = _bfs_reach(allowed.reshape(lat.ny, lat.nx), _arc_seed_grid(lat, src))
        return bool((reached & _arc_seed_grid(lat, tgt)).any())

    if isinstance(field_or_edges, Field):
        raise TypeError("metric modes need edge states, got a field")
    open_mask = _open_mask(lat, field_or_edges)
    usable, src, tgt = _metric_spec(lat, mode)
    uf, src_t, tgt_t = _metric_union_find(lat, open_mask, usable, src, tgt)
    return uf.connected(src_t, tgt_t)


def flood_fill_crossing(lat: LatticeRect, field_or_edges, mode: CrossingMode) -> bool:
    """Reference decision via an explicit queue flood fill.

    Independent of both the vectorized search and the union-find; exists to
    cross-check them and for nothing else.
    """
    mode = CrossingMode(mode)
    if mode in _DISCRETE_MODES:
        values = _field_values(lat, field_or_edges)
        allowed, src, tgt = _discrete_spec(lat, mode, values)
        neighbours = _vertex_adjacency(lat)
    else:
        open_mask = _open_mask(lat, field_or_edges)
        usable, src, tgt = _metric_spec(lat, mode)
        allowed = np.ones(lat.n_vertices, dtype=bool)
        neighbours = [[] for _ in range(lat.n_vertices)]
        for e in np.flatnonzero(open_mask & usable):
            u, v = (int(x) for x in lat.edges[e])
            neighbours[u].append(v)
            neighbours[v].append(u)

    targets = set(int(v) for v in arc_vertices(lat, tgt) if allowed[v])
    seen = np.zeros(lat.n_vertices, dtype=bool)
    queue = [int(v) for v in arc_vertices(lat, src) if allowed[v]]
    for v in queue:
        seen[v] = True
    while queue:
        v = queue.pop()
        if v in targets:
            return True
        for w in neighbours[v]:
            if allowed[w] and not seen[w]:
                seen[w] = True
                queue.append(w)
    return False


def _vertex_adjacency(lat: LatticeRect) -> list[list[int]]:
    neighbours: list[list[int]] = [[] for _ in range(lat.n_vertices)]
    for u, v in lat.edges:
        neighbours[int(u)].append(int(v))
        neighbours[int(v)].append(int(u))
    return neighbours


# -- first-passage sets ----------------------------------------------------------


@dataclass
class FirstPassageSets:
    """Vertex masks of the sign clusters hooked onto each frame arc.

    ``pos_left``/``pos_right`` are the unions of connected components of the
    weakly-positive set meeting LEFT/RIGHT; ``neg_bottom``/``neg_top`` the
    weakly-negative components meeting BOTTOM/TOP.
    """

    pos_left: np.ndarray
    pos_right: np.ndarray
    neg_bottom: np.ndarray
    neg_top: np.ndarray


def first_passage_sets(lat: LatticeRect, field) -> FirstPassageSets:
    values = _field_values(lat, field)
    pos = (values >= 0.0).reshape(lat.ny, lat.nx)
    neg = (values <= 0.0).reshape(lat.ny, lat.nx)
    return FirstPassageSets(
        pos_left=_bfs_reach(pos, _arc_seed_grid(lat, Arc.LEFT)).ravel(),
        pos_right=_bfs_reach(pos, _arc_seed_grid(lat, Arc.RIGHT)).ravel(),
        neg_bottom=_bfs_reach(neg, _arc_seed_grid(lat, Arc.BOTTOM)).ravel(),
        neg_top=_bfs_reach(neg, _arc_seed_grid(lat, Arc.TOP)).ravel(),
    )


@dataclass
class MetricFirstPassageSets:
    """Edge masks of the open components hooked onto LEFT and RIGHT."""

    pos_left: np.ndarray
    pos_right: np.ndarray


def metric_first_passage_sets(lat: LatticeRect, edges) -> MetricFirstPassageSets:
    """Open-edge components meeting each vertical frame arc.

    The open set encodes where the interpolated field is non-negative, so
    these are the metric analogues of the positive first-passage sets.  The
    negative analogues are obtained by passing edge states sampled from the
    negated field.
    """
    open_mask = _open_mask(lat, edges)
    uf = UnionFind(lat.n_vertices)
    open_ids = np.flatnonzero(open_mask)
    for e in open_ids:
        uf.union(int(lat.edges[e, 0]), int(lat.edges[e, 1]))
    left_roots = {uf.find(int(v)) for v in arc_vertices(lat, Arc.LEFT)}
    right_roots = {uf.find(int(v)) for v in arc_vertices(lat, Arc.RIGHT)}
    left = np.zeros(lat.n_edges, dtype=bool)
    right = np.zeros(lat.n_edges, dtype=bool)
    for e in open_ids:
        root = uf.find(int(lat.edges[e, 0]))
        left[e] = root in left_roots
        right[e] = root in right_roots
    return MetricFirstPassageSets(pos_left=left, pos_right=right)


# -- pivotal edges ----------------------------------------------------------------


def closed_pivotal_exists(lat: LatticeRect, edges) -> tuple[bool, list[int]]:
    """Detect closed edges whose opening would create a left-right crossing.

    If the open configuration already crosses, no closed edge is pivotal and
    the scan is skipped.  Otherwise a closed edge is pivotal exactly when its
    endpoints lie in the two components hooked onto LEFT and RIGHT; the
    classification never depends on the state of the candidate edge itself.
    """
    open_mask = _open_mask(lat, edges)
    usable, src, tgt = _metric_spec(lat, CrossingMode.METRIC_ALT)
    uf, left_t, right_t = _metric_union_find(lat, open_mask, usable, src, tgt)
    left_root = uf.find(left_t)
    right_root = uf.find(right_t)
    if left_root == right_root:
        return False, []
    pivotal = []
    for e in np.flatnonzero(~open_mask):
        ru = uf.find(int(lat.edges[e, 0]))
        rv = uf.find(int(lat.edges[e, 1]))
        if (ru == left_root and rv == right_root) or (ru == right_root and rv == left_root):
            pivotal.append(int(e))
    return bool(pivotal), pivotal


# -- level line --------------------------------------------------------------------


@dataclass
class LevelLinePath:
    """Deterministic interface walk on the dual lattice.

    ``points`` are physical coordinates, starting at (0, 3*delta/2) on the
    left rectangle side; every traversed dual edge keeps weakly-positive
    vertices on its left and negative vertices on its right.  ``terminal``
    is RIGHT when the walk leaves through the gap next to corner c and TOP
    when it leaves next to corner a.
    """

    points: np.ndarray  # (k, 2) float64
    terminal: Arc
    steps: int


# Headings and, per heading, the grid offsets (from the dual cell index) of the
# front-left and front-right primal vertices relative to the move direction.
_EAST, _NORTH, _WEST, _SOUTH = 0, 1, 2, 3
_STEP = {_EAST: (1, 0), _NORTH: (0, 1), _WEST: (-1, 0), _SOUTH: (0, -1)}
_FRONT = {
    _EAST: ((1, 1), (1, 0)),
    _NORTH: ((0, 1), (1, 1)),
    _WEST: ((0, 0), (0, 1)),
    _SOUTH: ((1, 0), (0, 0)),
}
_LEFT_OF = {_EAST: _NORTH, _NORTH: _WEST, _WEST: _SOUTH, _SOUTH: _EAST}
_RIGHT_OF = {v: k for k, v in _LEFT_OF.items()}


def trace_level_line(lat: LatticeRect, field: Field) -> LevelLinePath:
    """Trace the interface started between the first two left-arc vertices.

    Requires alternating boundary data: the walk needs the frame to split
    into a weakly-positive and a negative part so that it is forced to leave
    through one of the two admissible corner gaps.  At each dual vertex the
    unique sign-respecting move is taken; when both turns respect the signs
    (opposite diagonals), the left turn wins.
    """
    if field.bc is None or field.bc.kind != "alternating":
        raise ValueError("level line tracing needs an alternating-boundary field")
    values = _field_values(lat, field)
    sign = (values >= 0.0).reshape(lat.ny, lat.nx)
    nx, ny = lat.nx, lat.ny

    def positive(ix: int, iy: int) -> bool | None:
        # Grid coordinates are 1-based; None marks a vertex outside the grid.
        if 1 <= ix <= nx and 1 <= iy <= ny:
            return bool(sign[iy - 1, ix - 1])
        return None

    # Dual vertex (cx + 1/2, cy + 1/2) is stored as cell index (cx, cy).
    cx, cy = 0, 1
    heading = _EAST
    pts = [(0.0, 1.5), (0.5, 1.5)]
    max_steps = 4 * lat.n_edges
    steps = 0
    while True:
        (fl_dx, fl_dy), (fr_dx, fr_dy) = _FRONT[heading]
        front_left = positive(cx + fl_dx, cy + fl_dy)
        front_right = positive(cx + fr_dx, cy + fr_dy)
        if front_left is None or front_right is None:
            break
        if not front_left:
            heading = _LEFT_OF[heading]
        elif front_right:
            heading = _RIGHT_OF[heading]
        # else: straight ahead
        dx, dy = _STEP[heading]
        cx, cy = cx + dx, cy + dy
        pts.append((cx + 0.5, cy + 0.5))
        steps += 1
        assert steps <= max_steps, "level line failed to terminate"

    if (cx, cy) == (nx - 1, 0) and heading == _SOUTH:
        terminal = Arc.RIGHT
    elif (cx, cy) == (1, ny) and heading == _NORTH:
        terminal = Arc.TOP
    else:  # pragma: no cover - impossible under alternating boundary data
        raise AssertionError(
            f"level line left the grid at cell ({cx}, {cy}) heading {heading}"
        )
    points = np.array(pts) * lat.delta
    return LevelLinePath(points=points, terminal=terminal, steps=steps)


# -- CSV export ---------------------------------------------------------------------


def export_level_line_csv(path_obj: LevelLinePath, file_path: str) -> None:
    """Dual-vertex coordinates, one point per row."""
    with open(file_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in path_obj.points:
            writer.writerow([f"{x:.10g}", f"{y:.10g}"])


def export_masks_csv(lat: LatticeRect, masks: dict[str, np.ndarray], file_path: str) -> None:
    """Vertex table with one 0/1 column per named mask."""
    names = list(masks)
    coords = lat.coords_array()
    with open(file_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "x", "y", *names])
        for v in range(lat.n_vertices):
            row = [v, f"{coords[v, 0]:.10g}", f"{coords[v, 1]:.10g}"]
            row += [int(bool(masks[name][v])) for name in names]
            writer.writerow(row)
