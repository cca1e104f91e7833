"""Simulation and control of polarization-rotating metasurface links."""

from .channel import (
    LinkReport,
    LinkScenario,
    Ray,
    bypass_fraction_from_geometry,
    capacity,
    free_space_path_loss,
    mismatch_loss,
    range_extension,
    received_power,
)
from .controller import SweepConfig, SweepTrace, coarse_to_fine_sweep, exhaustive_sweep, optimize_link
from .estimator import RotationEstimate, estimate_rotation, find_alignment, find_extreme_biases
from .jones import (
    JonesOperator,
    PolarizationState,
    apply,
    cascade,
    intensity,
    rotate_operator,
    rotation_matrix,
)
from .metasurface import (
    BiasSetting,
    RotationTable,
    ScatteringMatrix,
    SurfaceMode,
    SurfaceModel,
    bfs_operator,
    bias_to_rotation,
    phase_shifter_bandwidth,
    port_waves,
    qwp_operator,
    rotator_operator,
    surface_operator,
    transmission_efficiency,
)

__version__ = "0.1.0"
