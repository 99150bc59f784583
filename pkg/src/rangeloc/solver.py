"""Pre-conditioned fixed-point iteration and the direct-solve reference.

Each round every sensor moves toward the combination of its neighbors'
current estimates:

    z_i <- z_i - k_i * (z_i - sum_j a_ij z_j)

All sensors read the estimates of the previous round (synchronous rounds).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import Diverged, SingularSystem
from .network import ClusterPartition, LocalizationSystem, cluster_rows
from .preconditioner import GlobalPreconditioner

MAX_ITER = 100_000
DIVERGENCE_GUARD = 1e12
# Rounds of step-size history used to estimate the contraction ratio.
RATE_WINDOW = 5


def anchor_spread(sys: LocalizationSystem) -> float:
    pa = sys.anchor_positions
    return float(max(np.linalg.norm(pa[a] - pa[b]) for a in range(3) for b in range(a + 1, 3)))


def default_start(sys: LocalizationSystem) -> np.ndarray:
    """Every sensor starts at the anchor centroid."""
    return np.tile(sys.anchor_positions.mean(axis=0), (sys.n_sensors, 1))


def _gains(K) -> np.ndarray:
    return np.asarray(K.gains if isinstance(K, GlobalPreconditioner) else K, dtype=float)


class _Stepper:
    """Node-local update with a fixed three-term summation order per sensor."""

    def __init__(self, sys: LocalizationSystem, K):
        self.cols, self.weights, self.n_a = sys.neighbor_table()
        self.k = _gains(K)[:, None]
        self.pa = np.asarray(sys.anchor_positions, dtype=float)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        stacked = np.vstack([self.pa, z])
        nb = stacked[self.cols]  # (n, 3, 2)
        w = self.weights
        target = w[:, 0, None] * nb[:, 0] + w[:, 1, None] * nb[:, 1] + w[:, 2, None] * nb[:, 2]
        return z - self.k * (z - target)


def step(z, K, sys: LocalizationSystem) -> np.ndarray:
    """One synchronous round: z' = (I - K(I - C)) z + K B p_a."""
    z = np.asarray(z, dtype=float)
    if z.shape != (sys.n_sensors, 2):
        raise ValueError(f"estimate has shape {z.shape}, expected ({sys.n_sensors}, 2)")
    return _Stepper(sys, K)(z)


def direct_solve(sys: LocalizationSystem) -> np.ndarray:
    """Solve (I - C) p_s = B p_a by LU with partial pivoting."""
    n = sys.n_sensors
    A = np.eye(n) - sys.C
    rhs = sys.B @ sys.anchor_positions
    with warnings.catch_warnings():
        # A zero pivot is reported as SingularSystem below.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() <= 1e-12 * max(1.0, np.abs(A).max()):
        raise SingularSystem(f"zero pivot ({pivots.min():.3e}): configuration is not localizable")
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    return x


def solve_by_clusters(sys: LocalizationSystem, part: ClusterPartition) -> np.ndarray:
    """Forward substitution over clusters, valid when C is block lower-triangular."""
    x = np.zeros((sys.n_sensors, 2))
    rhs = sys.B @ sys.anchor_positions
    done: list[int] = []
    for s in range(1, len(part)):
        rows = cluster_rows(sys, part, s)
        A = np.eye(len(rows)) - sys.C[np.ix_(rows, rows)]
        b = rhs[rows] + (sys.C[np.ix_(rows, done)] @ x[done] if done else 0.0)
        x[rows] = np.linalg.solve(A, b)
        done += rows
    return x


@dataclass
class IterationTrace:
    residuals: np.ndarray
    snapshots: list[tuple[int, np.ndarray]]
    reason: str
    iterations: int
    estimate: np.ndarray
    solution: np.ndarray = field(repr=False)

    @property
    def converged(self) -> bool:
        return self.reason == "converged"


def _tail_small(deltas: list[float], tol: float, floor: float) -> bool:
    delta = deltas[-1]
    # At the rounding floor successive steps are noise, not a contraction.
    if delta <= floor:
        return True
    recent = deltas[-RATE_WINDOW - 1:]
    if len(recent) < 2:
        return False
    q = max(b / a if a > 0 else np.inf for a, b in zip(recent, recent[1:]))
    return q < 1.0 and delta * q / (1.0 - q) < tol


def run(
    sys: LocalizationSystem,
    K,
    z0=None,
    tol: float | None = None,
    max_iter: int = MAX_ITER,
    stride: int | None = None,
) -> IterationTrace:
    """Iterate until successive estimates differ by less than ``tol`` (max-norm).

    A small step alone does not bound the distance to the fixed point when
    the contraction ratio q is close to one, so the run also requires the
    geometric tail bound delta * q / (1 - q) to be below ``tol``, with q the
    largest recent ratio of successive steps.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    spread = anchor_spread(sys)
    if tol is None:
        tol = 1e-9 * spread
    if tol <= 0:
        raise ValueError("tol must be positive")
    if stride is None:
        stride = 1 if sys.n_sensors <= 50 else 10
    z = default_start(sys) if z0 is None else np.array(z0, dtype=float)
    if z.shape != (sys.n_sensors, 2):
        raise ValueError(f"start has shape {z.shape}, expected ({sys.n_sensors}, 2)")

    solution = direct_solve(sys)
    e0 = np.linalg.norm(z - solution)
    norm = e0 if e0 > 0 else 1.0
    residuals = [e0 / norm]
    snapshots = [(0, z.copy())]
    guard = DIVERGENCE_GUARD * max(spread, np.abs(sys.anchor_positions).max())
    advance = _Stepper(sys, K)
    floor = 1e3 * np.finfo(float).eps * max(spread, np.abs(sys.anchor_positions).max())

    reason = "max_iter"
    t = 0
    deltas: list[float] = []
    while t < max_iter:
        z_next = advance(z)
        t += 1
        delta = float(np.abs(z_next - z).max())
        deltas.append(delta)
        z = z_next
        if not np.all(np.isfinite(z)) or np.abs(z).max() > guard:
            raise Diverged(f"estimates left the overflow guard at round {t}")
        residuals.append(np.linalg.norm(z - solution) / norm)
        if t % stride == 0:
            snapshots.append((t, z.copy()))
        if delta < tol and _tail_small(deltas, tol, floor):
            reason = "converged"
            break
    if snapshots[-1][0] != t:
        snapshots.append((t, z.copy()))
    return IterationTrace(np.array(residuals), snapshots, reason, t, z, solution)
