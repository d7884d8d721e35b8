"""Tile-based response and channel modelling for intelligent reflecting surfaces."""

from irs_tiles.geometry import (
    AnglePair,
    AngleTriple,
    DegenerateGeometryError,
    WaveSpec,
    c_factor,
    polarization_basis,
    propagation_direction,
)
from irs_tiles.response import (
    DiscreteLattice,
    TileSpec,
    TransmissionMode,
    continuous_tile_response,
    discrete_tile_response,
    g_tilde,
    mode_from_directions,
    peak_bound,
    quadrature_oracle,
    quantize_phase,
    response_db,
    unit_cell_response,
)
from irs_tiles.codebook import (
    Codebook,
    IrsLayout,
    build_grid_codebook,
    mode_peak_direction,
    tile_translated_response,
)
from irs_tiles.channel import (
    ArrayGeometry,
    ChannelScenario,
    ConfigurationError,
    DirectPath,
    IncidentPath,
    ModeSelection,
    OutgoingPath,
    apply_channel,
    assemble_G,
    end_to_end_matrix,
    link_budget_ratio,
    required_irs_area,
    steering_vector,
)
from irs_tiles.optimizer import (
    Objective,
    OptimizationResult,
    SearchBudgetExceeded,
    evaluate_objective,
    exhaustive_search,
    greedy_search,
)

__version__ = "0.1.0"
