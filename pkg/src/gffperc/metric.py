"""Metric-graph layer: edge percolation states and the interpolated Green's
function.

Each lattice edge carries an interval of length 2 on which the field
interpolates its endpoint values through an independent Brownian bridge with
variance 2 at time 1.  The bridge never has to be sampled: the only quantity
events depend on is whether the field stays non-negative on the whole
interval, and for endpoint values x, y > 0 that happens with probability
1 - exp(-x*y/2).  A non-positive endpoint closes the edge outright (a bridge
started at 0 dips below immediately).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gff import Field, GreenMatrix
from .lattice import LatticeRect


@dataclass
class EdgeStates:
    """Open/closed bit per lattice edge; 1 means the interpolated field is
    non-negative on the whole edge interval."""

    open_mask: np.ndarray  # (n_edges,) bool
    lat: LatticeRect


@dataclass(frozen=True)
class EdgePoint:
    """Point on an edge interval: edge id plus the fractional position r in
    [0, 1] measured from the edge's first stored endpoint."""

    edge: int
    r: float

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("edge position must lie in [0, 1]")


def edge_open_probability(phi_u: float, phi_v: float) -> float:
    """Probability that the bridge over one edge stays non-negative.

    Zero if an endpoint is negative or zero; otherwise 1 - exp(-phi_u*phi_v/2)
    for the unit lattice edge.
    """
    if np.isnan(phi_u) or np.isnan(phi_v):
        raise ValueError("edge endpoint value is NaN")
    if min(phi_u, phi_v) < 0.0 or phi_u * phi_v == 0.0:
        return 0.0
    return float(-np.expm1(-0.5 * phi_u * phi_v))


def edge_open_probabilities(lat: LatticeRect, values: np.ndarray) -> np.ndarray:
    """Vectorized ``edge_open_probability`` over all edges of the lattice."""
    pu = values[lat.edges[:, 0]]
    pv = values[lat.edges[:, 1]]
    if np.isnan(pu).any() or np.isnan(pv).any():
        raise ValueError("edge endpoint value is NaN")
    p = -np.expm1(-0.5 * pu * pv)
    p[(pu <= 0.0) | (pv <= 0.0)] = 0.0
    return p


def sample_edge_states(lat: LatticeRect, field: Field, rng_seed) -> EdgeStates:
    """Independent per-edge open indicators given the vertex field.

    Boundary-incident edges participate with the boundary values the field
    carries, so under zero boundary data they are closed always.
    """
    if field.values.shape != (lat.n_vertices,):
        raise ValueError("field does not match lattice")
    p = edge_open_probabilities(lat, field.values)
    rng = np.random.default_rng(rng_seed)
    return EdgeStates(open_mask=rng.random(lat.n_edges) < p, lat=lat)


def metric_green(lat: LatticeRect, G: GreenMatrix, w1: EdgePoint, w2: EdgePoint) -> float:
    """Green's function between two points of the metric graph.

    Bilinear interpolation of the vertex Green values, plus the self-edge
    term 4*(min(r1, r2) - r1*r2) when both points share an edge.  Boundary
    vertices contribute Green value zero.
    """
    if G.lat is not lat:
        raise ValueError("Green matrix was built on a different lattice")
    u1, v1 = (int(x) for x in lat.edges[w1.edge])
    u2, v2 = (int(x) for x in lat.edges[w2.edge])
    r1, r2 = w1.r, w2.r
    out = (
        (1 - r1) * (1 - r2) * G.value(u1, u2)
        + r1 * r2 * G.value(v1, v2)
        + (1 - r1) * r2 * G.value(u1, v2)
        + r1 * (1 - r2) * G.value(v1, u2)
    )
    if w1.edge == w2.edge:
        out += 4.0 * (min(r1, r2) - r1 * r2)
    return float(out)
