"""Level-set percolation of a Gaussian free field on a rectangle.

The package builds the discrete field on a square-lattice approximation of
(0, L) x (0, 1), couples it with an edge-percolation model derived from
Brownian excursions on the metric graph, and exposes crossing events, level
lines, pivotal-edge scans and the conformal machinery describing the fine-mesh
limit of the crossing probability.
"""

from .gff import (
    BoundaryCondition,
    Field,
    GreenMatrix,
    ZERO_BC,
    alternating_bc,
    boundary_values,
    dirichlet_green_dense,
    green_center_diagonal,
    harmonic_extension,
    load_field,
    sample_with_boundary,
    sample_zero_boundary,
    sample_zero_boundary_batch,
    save_field,
    sine_transform_2d,
)
from .harness import (
    EVENTS,
    Estimate,
    ExperimentConfig,
    LAMBDA0,
    config_from_mapping,
    estimate_event,
    parse_config_file,
    run_selftest,
    sweep,
    wilson_interval,
)
from .lattice import Arc, LatticeRect, arc_vertices, build_lattice
from .limits import (
    ConformalImages,
    CoordinateChangedPath,
    DiffusionPath,
    bm_line_hitting_cdf,
    conformal_images,
    coordinate_change_path,
    cross_ratio,
    crossing_limit,
    elliptic_k_complete,
    modulus_for_aspect,
    simulate_sle_diffusion,
    sle_hitting_mc,
    sle_hitting_probability,
)
from .metric import (
    EdgePoint,
    EdgeStates,
    edge_open_probabilities,
    edge_open_probability,
    metric_green,
    sample_edge_states,
)
from .percolation import (
    CrossingMode,
    FirstPassageSets,
    LevelLinePath,
    MetricFirstPassageSets,
    closed_pivotal_exists,
    crossing,
    export_level_line_csv,
    export_masks_csv,
    first_passage_sets,
    flood_fill_crossing,
    metric_first_passage_sets,
    trace_level_line,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "BoundaryCondition",
    "ConformalImages",
    "CoordinateChangedPath",
    "CrossingMode",
    "DiffusionPath",
    "EVENTS",
    "EdgePoint",
    "EdgeStates",
    "Estimate",
    "ExperimentConfig",
    "Field",
    "FirstPassageSets",
    "GreenMatrix",
    "LAMBDA0",
    "LatticeRect",
    "LevelLinePath",
    "MetricFirstPassageSets",
    "ZERO_BC",
    "alternating_bc",
    "arc_vertices",
    "bm_line_hitting_cdf",
    "boundary_values",
    "build_lattice",
    "closed_pivotal_exists",
    "config_from_mapping",
    "conformal_images",
    "coordinate_change_path",
    "cross_ratio",
    "crossing",
    "crossing_limit",
    "dirichlet_green_dense",
    "edge_open_probabilities",
    "edge_open_probability",
    "elliptic_k_complete",
    "estimate_event",
    "export_level_line_csv",
    "export_masks_csv",
    "first_passage_sets",
    "flood_fill_crossing",
    "green_center_diagonal",
    "harmonic_extension",
    "load_field",
    "metric_first_passage_sets",
    "metric_green",
    "modulus_for_aspect",
    "parse_config_file",
    "run_selftest",
    "sample_edge_states",
    "sample_with_boundary",
    "sample_zero_boundary",
    "sample_zero_boundary_batch",
    "save_field",
    "simulate_sle_diffusion",
    "sine_transform_2d",
    "sle_hitting_mc",
    "sle_hitting_probability",
    "sweep",
    "trace_level_line",
    "wilson_interval",
]
