"""Cluster-wise design of the diagonal gain matrix K.

For a cluster block L_s of I - C, gains k'_1, k'_2, ... are fixed one at a
time so that diag(k'_1..k'_j) times the j-th leading principal submatrix of
L_s keeps its spectrum in the open right half-plane. A final common factor
eps then shrinks that spectrum into the disk |z - 1| < 1, which makes
I - K_s L_s Schur. With sensors ordered cluster-major, I - K(I - C) is block
lower-triangular and inherits the property block by block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import (
    MAX_ORDER,
    all_in_open_rhp,
    all_in_unit_disk_at_one,
    eigenvalues,
    spectral_radius,
)
from .errors import DesignFailure, NotSchur
from .network import ClusterPartition, LocalizationSystem, cluster_rows, cluster_submatrix

SHRINK = 0.5
MAX_SHRINK_STEPS = 40
SAFETY = 0.9
# Candidates whose spectrum grazes the imaginary axis (|Re| at rounding level)
# would force a vanishing shrink factor; require a small relative margin.
RHP_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class ClusterGains:
    cluster: int
    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if not (np.all(np.isfinite(g)) and np.all(g != 0)):
            raise ValueError("gains must be finite and nonzero")
        object.__setattr__(self, "gains", g)


@dataclass(frozen=True, eq=False)
class GlobalPreconditioner:
    """Diagonal of K in system (cluster-major) order."""

    gains: np.ndarray

    @classmethod
    def identity(cls, n: int) -> GlobalPreconditioner:
        return cls(np.ones(n))

    def iteration_matrix(self, sys: LocalizationSystem) -> np.ndarray:
        n = sys.n_sensors
        return np.eye(n) - self.gains[:, None] * (np.eye(n) - sys.C)


def _candidates():
    for t in range(MAX_SHRINK_STEPS + 1):
        for c in (1.0, -1.0):
            yield c * SHRINK**t


def _clearly_in_rhp(spectrum) -> bool:
    scale = max(1.0, float(np.max(np.abs(spectrum))))
    return all_in_open_rhp(spectrum) and bool(np.all(spectrum.real > RHP_MARGIN * scale))


def _angle_margin(spectrum) -> float:
    # Scale-free distance from the imaginary axis: min Re(l) / |l|.
    return float(np.min(spectrum.real / np.maximum(np.abs(spectrum), 1e-300)))


def design_cluster_gains(L: np.ndarray, cluster: int = 0, search: str = "first") -> ClusterGains:
    """Diagonal gains K_s with rho(I - K_s L_s) < 1.

    ``search="first"`` takes the first candidate gain (1, -1, 1/2, -1/2, ...)
    that keeps the leading block in the open right half-plane, then the
    largest passing shrink factor. ``search="best"`` scans the same
    candidates and keeps the one with the widest angle to the imaginary
    axis, then the shrink factor giving the smallest spectral radius.
    """
    if search not in ("first", "best"):
        raise ValueError(f"unknown search {search!r}")
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if L.ndim != 2 or L.shape[1] != n or n < 1:
        raise ValueError(f"expected a nonempty square block, got shape {L.shape}")

    if n == 1:
        ell = L[0, 0]
        if ell == 0:
            raise DesignFailure("singular 1x1 cluster block", cluster)
        return ClusterGains(cluster, np.array([SAFETY / ell]))

    k = np.zeros(n)
    for j in range(n):
        lead = L[: j + 1, : j + 1]
        best, best_margin = None, -np.inf
        for cand in _candidates():
            k[j] = cand
            sp = eigenvalues(k[: j + 1, None] * lead)
            if not _clearly_in_rhp(sp):
                continue
            if search == "first":
                best = cand
                break
            margin = _angle_margin(sp)
            if margin > best_margin:
                best, best_margin = cand, margin
        if best is None:
            raise DesignFailure(
                f"no gain found for member {j} of cluster {cluster} within the search budget",
                cluster,
            )
        k[j] = best

    KL = k[:, None] * L
    eps, best_rho = None, np.inf
    trial = 1.0
    for _ in range(MAX_SHRINK_STEPS * 2):
        sp = eigenvalues(SAFETY * trial * KL)
        if all_in_unit_disk_at_one(eigenvalues(trial * KL)):
            rho = float(np.max(np.abs(1.0 - sp)))
            if search == "first":
                eps = trial
                break
            if rho < best_rho:
                eps, best_rho = trial, rho
        trial *= SHRINK
    if eps is None:
        raise DesignFailure(f"no shrink factor found for cluster {cluster}", cluster)
    gains = SAFETY * eps * k
    if not all_in_unit_disk_at_one(eigenvalues(gains[:, None] * L)):
        raise DesignFailure(f"designed gains of cluster {cluster} fail verification", cluster)
    return ClusterGains(cluster, gains)


def assemble_global(
    gains: list[ClusterGains], part: ClusterPartition, sys: LocalizationSystem
) -> GlobalPreconditioner:
    k = np.full(sys.n_sensors, np.nan)
    by_cluster = {g.cluster: g for g in gains}
    for s in range(1, len(part)):
        if s not in by_cluster:
            raise ValueError(f"no gains for cluster {s}")
        rows = cluster_rows(sys, part, s)
        if len(rows) != len(by_cluster[s].gains):
            raise ValueError(f"cluster {s} has {len(rows)} sensors but {len(by_cluster[s].gains)} gains")
        k[rows] = by_cluster[s].gains
    if np.any(np.isnan(k)):
        raise ValueError("partition does not cover every sensor")
    K = GlobalPreconditioner(k)
    rho = iteration_radius(K, sys, part)
    if not rho < 1.0:
        raise NotSchur(f"rho(I - K(I - C)) = {rho:.6g} >= 1")
    return K


def iteration_radius(
    K: GlobalPreconditioner, sys: LocalizationSystem, part: ClusterPartition | None = None
) -> float:
    """Spectral radius of I - K(I - C)."""
    if sys.n_sensors <= MAX_ORDER or part is None:
        return spectral_radius(K.iteration_matrix(sys))
    # Too large for one dense solve: use the block lower-triangular structure.
    T = K.iteration_matrix(sys)
    return max(
        spectral_radius(T[np.ix_(rows, rows)])
        for rows in (cluster_rows(sys, part, s) for s in range(1, len(part)))
    )


def design_preconditioner(
    sys: LocalizationSystem, part: ClusterPartition, search: str = "first"
) -> GlobalPreconditioner:
    gains = [
        design_cluster_gains(cluster_submatrix(sys, part, s), s, search)
        for s in range(1, len(part))
    ]
    return assemble_global(gains, part, sys)
