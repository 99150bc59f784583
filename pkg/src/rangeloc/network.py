"""Network topology, system assembly and cluster bookkeeping.

Stacking every sensor's areal coordinates gives p_s = C p_s + B p_a, where
the three columns of B weight the anchors and C (zero diagonal) weights
sensors. Sensors are ordered cluster-major, id-minor, so that a sequential
cluster partition makes C block lower-triangular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import IndexOutOfRange, MissingCoefficient, SignResolutionError
from .geometry import TAU_SUM, Point2, SignedBarycentric
from .signs import QuadDistances, Resolution, resolve_with_branch


class RangeTable:
    """Symmetric table of measured distances keyed by unordered node pairs."""

    def __init__(self, entries: Mapping[tuple[int, int], float] | Iterable = ()):
        self._d: dict[tuple[int, int], float] = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for (u, v), d in items:
            self[u, v] = d

    @staticmethod
    def _key(u: int, v: int) -> tuple[int, int]:
        if u == v:
            raise ValueError(f"no range between node {u} and itself")
        return (u, v) if u < v else (v, u)

    def __setitem__(self, pair: tuple[int, int], d: float) -> None:
        d = float(d)
        if not (math.isfinite(d) and d > 0):
            raise ValueError(f"range {pair} must be finite and positive, got {d}")
        self._d[self._key(*pair)] = d

    def __getitem__(self, pair: tuple[int, int]) -> float:
        return self._d[self._key(*pair)]

    def __contains__(self, pair) -> bool:
        u, v = pair
        return u != v and self._key(u, v) in self._d

    def __len__(self) -> int:
        return len(self._d)

    def __eq__(self, other) -> bool:
        return isinstance(other, RangeTable) and self._d == other._d

    def items(self):
        return sorted(self._d.items())

    def __repr__(self) -> str:
        return f"RangeTable({len(self)} pairs)"


def required_pairs(l: int, triplet: tuple[int, int, int]) -> list[tuple[int, int]]:
    i, j, k = triplet
    return [(l, i), (l, j), (l, k), (i, j), (i, k), (j, k)]


@dataclass(frozen=True)
class NetworkTopology:
    anchors: tuple[int, ...]
    triplets: Mapping[int, tuple[int, int, int]]
    ranges: RangeTable = field(compare=True)

    def __post_init__(self):
        if len(self.anchors) < 3:
            raise ValueError("a network needs at least three anchors")
        if len(set(self.anchors)) != len(self.anchors):
            raise ValueError("duplicate anchor ids")
        nodes = set(self.anchors) | set(self.triplets)
        for l, trip in self.triplets.items():
            if l in self.anchors:
                raise ValueError(f"anchor {l} must not have a neighbor triplet")
            if len(trip) != 3 or len(set(trip)) != 3 or l in trip:
                raise ValueError(f"sensor {l} needs three distinct neighbors other than itself")
            for u in trip:
                if u not in nodes:
                    raise ValueError(f"sensor {l} references unknown node {u}")
            for pair in required_pairs(l, trip):
                if pair not in self.ranges:
                    raise ValueError(f"range {pair} needed by sensor {l} is missing")

    @property
    def sensors(self) -> tuple[int, ...]:
        return tuple(sorted(self.triplets))

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.anchors) | set(self.triplets)))

    def quad(self, l: int) -> QuadDistances:
        i, j, k = self.triplets[l]
        r = self.ranges
        return QuadDistances(r[l, i], r[l, j], r[l, k], r[i, j], r[i, k], r[j, k])


@dataclass(frozen=True)
class ClusterPartition:
    """Ordered clusters G_0..G_m; G_0 holds the anchors."""

    clusters: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for c in self.clusters:
            if seen & set(c):
                raise ValueError(f"clusters overlap on {sorted(seen & set(c))}")
            seen |= set(c)

    def __len__(self) -> int:
        return len(self.clusters)

    def index_of(self) -> dict[int, int]:
        return {u: s for s, c in enumerate(self.clusters) for u in c}

    def sensor_order(self) -> tuple[int, ...]:
        return tuple(u for c in self.clusters[1:] for u in sorted(c))


def validate_sequential_partition(topo: NetworkTopology, part: ClusterPartition) -> bool:
    """True iff every sensor's neighbors lie in its own or an earlier cluster."""
    where = part.index_of()
    if set(where) != set(topo.nodes) or set(part.clusters[0]) != set(topo.anchors):
        return False
    for l, trip in topo.triplets.items():
        if any(where[u] > where[l] for u in trip):
            return False
    return True


@dataclass(frozen=True, eq=False)
class LocalizationSystem:
    B: np.ndarray
    C: np.ndarray
    anchor_positions: np.ndarray
    anchor_ids: tuple[int, int, int]
    sensor_ids: tuple[int, ...]

    @property
    def n_sensors(self) -> int:
        return len(self.sensor_ids)

    def index(self, node: int) -> int:
        return self.sensor_ids.index(node)

    def neighbor_table(self):
        """Per-sensor (column, weight) lists into the stacked [anchors; sensors] vector."""
        n_a = len(self.anchor_ids)
        cols = np.zeros((self.n_sensors, 3), dtype=int)
        weights = np.zeros((self.n_sensors, 3))
        full = np.hstack([self.B, self.C])
        for r in range(self.n_sensors):
            nz = np.flatnonzero(full[r])
            if len(nz) > 3:
                raise ValueError(f"row {r} has {len(nz)} nonzeros")
            cols[r, : len(nz)] = nz
            weights[r, : len(nz)] = full[r, nz]
        return cols, weights, n_a

    def coefficients(self, node: int) -> dict[int, float]:
        r = self.index(node)
        ids = self.anchor_ids + self.sensor_ids
        row = np.concatenate([self.B[r], self.C[r]])
        return {ids[c]: float(row[c]) for c in np.flatnonzero(row)}


def assemble_system(
    topo: NetworkTopology,
    anchor_coords: Mapping[int, Point2] | Iterable[Point2],
    signed: Mapping[int, SignedBarycentric],
    partition: ClusterPartition | None = None,
) -> LocalizationSystem:
    anchor_ids = tuple(topo.anchors)
    if len(anchor_ids) != 3:
        raise ValueError(f"the system partition needs exactly 3 anchors, got {len(anchor_ids)}")
    if isinstance(anchor_coords, Mapping):
        pa = np.array([tuple(anchor_coords[a]) for a in anchor_ids], dtype=float)
    else:
        pa = np.array([tuple(p) for p in anchor_coords], dtype=float)
    if pa.shape != (3, 2):
        raise ValueError("need coordinates for exactly three anchors")

    order = partition.sensor_order() if partition is not None else topo.sensors
    if set(order) != set(topo.sensors):
        raise ValueError("partition does not cover the sensors of the topology")
    col = {a: c for c, a in enumerate(anchor_ids)}
    row = {s: r for r, s in enumerate(order)}
    B = np.zeros((len(order), 3))
    C = np.zeros((len(order), len(order)))
    for l in order:
        if l not in signed:
            raise MissingCoefficient(f"sensor {l} has no resolved coefficients")
        bc = signed[l]
        trip = bc.neighbors if bc.neighbors is not None else topo.triplets[l]
        if tuple(trip) != tuple(topo.triplets[l]):
            raise ValueError(f"sensor {l}: coefficients refer to {trip}, not {topo.triplets[l]}")
        for u, a in zip(trip, bc.coeffs):
            if u in col:
                B[row[l], col[u]] = a
            else:
                C[row[l], row[u]] = a
    sums = B.sum(axis=1) + C.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > TAU_SUM * np.maximum(1.0, np.abs(B).sum(1) + np.abs(C).sum(1))):
        raise ValueError("a row of [B C] does not sum to one")
    return LocalizationSystem(B, C, pa, anchor_ids, tuple(order))


def resolve_network(topo: NetworkTopology) -> dict[int, Resolution]:
    """Run sign resolution for every sensor; failures name the sensor."""
    out = {}
    for l in topo.sensors:
        try:
            out[l] = resolve_with_branch(topo.quad(l), tuple(topo.triplets[l]))
        except Exception as exc:  # noqa: BLE001 - re-raised with the sensor attached
            raise SignResolutionError(l, exc) from exc
    return out


def cluster_submatrix(sys: LocalizationSystem, part: ClusterPartition, s: int) -> np.ndarray:
    """Block of I - C on the rows and columns of cluster ``s`` (system order)."""
    if not 1 <= s < len(part):
        raise IndexOutOfRange(f"cluster index {s} outside 1..{len(part) - 1}")
    idx = cluster_rows(sys, part, s)
    return np.eye(len(idx)) - sys.C[np.ix_(idx, idx)]


def cluster_rows(sys: LocalizationSystem, part: ClusterPartition, s: int) -> list[int]:
    members = set(part.clusters[s])
    return [r for r, u in enumerate(sys.sensor_ids) if u in members]
