"""Range-only localization of sensor networks with three anchors.

Sensors express their position as a signed barycentric combination of three
neighbors, recovered from distances alone. A diagonal gain matrix designed
cluster by cluster makes the resulting linear iteration converge even when
sensors lie outside their neighbors' triangles.
"""
from .eigen import eigenvalues, spectral_radius
from .errors import *  # noqa: F401,F403
from .geometry import (
    BarycentricMagnitudes,
    Point2,
    SignedBarycentric,
    TriangleDistances,
    areal_from_coordinates,
    barycentric_magnitudes,
    signed_area,
    squared_area_cm,
)
from .network import (
    ClusterPartition,
    LocalizationSystem,
    NetworkTopology,
    RangeTable,
    assemble_system,
    cluster_submatrix,
    resolve_network,
    validate_sequential_partition,
)
from .pipeline import LocalizationReport, localize
from .preconditioner import (
    ClusterGains,
    GlobalPreconditioner,
    assemble_global,
    design_cluster_gains,
    design_preconditioner,
    iteration_radius,
)
from .scenario import GenerationConfig, Scenario, generate, load, loads, measure, save, dumps
from .signs import (
    QuadDistances,
    enumerate_feasible_patterns,
    resolve_ambiguous,
    resolve_sign_pattern,
    resolve_with_branch,
    resolve_zero_case,
)
from .solver import IterationTrace, direct_solve, run, step

__version__ = "0.1.0"
