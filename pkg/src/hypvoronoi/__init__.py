"""Voronoi percolation in the hyperbolic plane: sampling, crossings, couplings, tilings."""
from .coupling import CoupledSample, CouplingSpec, build_coupling, continuity_scale, verify_domination
from .experiments import (
    VERSION as __version__,
    ExperimentRecord,
    PcEstimate,
    estimate_crossing,
    estimate_local_prob,
    estimate_pc,
    local_prob_analytic,
    sweep,
    wilson_interval,
)
from .geometry import (
    Circle,
    DiskIsometry,
    DomainError,
    Geodesic,
    HypDisk,
    Rect,
    density,
    hyp_area,
    hyp_distance,
)
from .percolation import (
    CrossingResult,
    DilatedRegion,
    MarginError,
    cluster,
    cluster_labels,
    cross,
    crossing_duality,
    local_event,
)
from .pointprocess import (
    MarkedConfiguration,
    SimulationParams,
    mark,
    sample_configuration,
    sample_euclid_ppp,
    sample_hyp_ppp,
    sample_ppp,
)
from .render import RenderOptions, render_tiling, render_voronoi
from .tiling import (
    ClosedEventGeometry,
    Tiling,
    closed_event,
    generate_tiling,
    six_rectangles,
    validate_separation,
    white_blocking_check,
)
from .voronoi import DegenerateInputError, VoronoiComplex, euclid_adjacent, hyp_adjacent, voronoi_complex
