"""End-to-end localization of a scenario: signs, assembly, gains, iteration."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import spectral_radius
from .errors import ParseError
from .network import (
    ClusterPartition,
    LocalizationSystem,
    cluster_rows,
    assemble_system,
    resolve_network,
    validate_sequential_partition,
)
from .preconditioner import GlobalPreconditioner, design_preconditioner, iteration_radius
from .scenario import Scenario
from .signs import Resolution
from .solver import MAX_ITER, IterationTrace, anchor_spread, run


@dataclass
class LocalizationReport:
    system: LocalizationSystem
    resolutions: dict[int, Resolution]
    K: GlobalPreconditioner
    trace: IterationTrace
    rho_C: float
    rho_iteration: float

    @property
    def spread(self) -> float:
        return anchor_spread(self.system)

    @property
    def error_vs_direct(self) -> float:
        """Largest per-sensor distance between the final estimate and the direct solve."""
        d = self.trace.estimate - self.trace.solution
        return float(np.max(np.hypot(d[:, 0], d[:, 1])))

    def error_vs_truth(self, scenario: Scenario) -> float:
        d = self.trace.estimate - scenario.truth(self.system.sensor_ids)
        return float(np.max(np.hypot(d[:, 0], d[:, 1])))


def sensor_radius(sys: LocalizationSystem, part: ClusterPartition) -> float:
    """rho(C) from the diagonal cluster blocks (C is block lower-triangular)."""
    return max(
        spectral_radius(sys.C[np.ix_(rows, rows)])
        for rows in (cluster_rows(sys, part, s) for s in range(1, len(part)))
    )


def build_system(scenario: Scenario) -> tuple[LocalizationSystem, dict[int, Resolution]]:
    if not validate_sequential_partition(scenario.topology, scenario.partition):
        raise ParseError("cluster partition is not sequential for the given triplets")
    res = resolve_network(scenario.topology)
    signed = {l: r.barycentric for l, r in res.items()}
    sys = assemble_system(scenario.topology, scenario.anchor_coords(), signed, scenario.partition)
    return sys, res


def localize(
    scenario: Scenario,
    tol: float | None = None,
    max_iter: int = MAX_ITER,
    search: str = "first",
    stride: int | None = None,
) -> LocalizationReport:
    sys, res = build_system(scenario)
    K = design_preconditioner(sys, scenario.partition, search)
    trace = run(sys, K, tol=tol, max_iter=max_iter, stride=stride)
    return LocalizationReport(
        sys,
        res,
        K,
        trace,
        sensor_radius(sys, scenario.partition),
        iteration_radius(K, sys, scenario.partition),
    )
