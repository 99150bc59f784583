"""Synthetic networks with sequentially localizable clusters, and their files.

Node ids are 0-based; ids 0, 1, 2 are the anchors. Sensors of cluster s pick
their neighbor triplets among the anchors, the sensors of earlier clusters and
the other sensors of cluster s, so the partition is sequential by construction.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import spectral_radius
from .errors import DesignFailure, GenerationFailure, ParseError, VersionMismatch
from .geometry import Point2, areal_from_coordinates, distance, signed_area
from .network import (
    ClusterPartition,
    NetworkTopology,
    RangeTable,
    required_pairs,
    validate_sequential_partition,
)
from .preconditioner import design_cluster_gains
from .signs import TAU_AMB

FORMAT_VERSION = 1
AREA_MARGIN = 1e-3
AMBIGUITY_MARGIN = 10 * TAU_AMB
FORCED_KINDS = ("parallelogram", "parallel+", "parallel-")
# Reject clusters whose designed iteration would barely contract.
MAX_DESIGNED_RADIUS = 0.995


@dataclass(frozen=True)
class GenerationConfig:
    clusters: tuple[int, ...] = (3, 3, 3)
    spread: float = 1.0
    outside_frac: float = 0.5
    seed: int = 0
    noise: float = 0.0
    # Place one exact ambiguous point per cluster (parallelogram apex or a
    # point on the parallel through a neighbor).
    ambiguous: bool = False
    # Require every sensor to lie strictly inside its triplet's triangle.
    contain: bool = False
    max_coeff: float = 10.0
    candidates: int = 6
    max_tries: int = 200

    def __post_init__(self):
        if not self.clusters or any(int(c) < 1 for c in self.clusters):
            raise ValueError(f"cluster sizes must be >= 1, got {self.clusters}")
        if not 0.0 <= self.outside_frac <= 1.0:
            raise ValueError("outside_frac must lie in [0, 1]")
        if self.spread <= 0 or self.noise < 0:
            raise ValueError("spread must be positive and noise nonnegative")


@dataclass(frozen=True)
class Scenario:
    positions: tuple[Point2, ...]
    topology: NetworkTopology
    partition: ClusterPartition
    seed: int = 0
    noise: float = 0.0
    forced: dict = field(default_factory=dict, compare=False)

    @property
    def anchors(self) -> tuple[int, ...]:
        return self.topology.anchors

    def anchor_coords(self) -> dict[int, Point2]:
        return {a: self.positions[a] for a in self.anchors}

    def truth(self, order) -> np.ndarray:
        return np.array([tuple(self.positions[u]) for u in order], dtype=float)

    def spread(self) -> float:
        pa = [self.positions[a] for a in self.anchors]
        return max(distance(p, q) for p, q in itertools.combinations(pa, 2))

    def outside_hull(self) -> list[int]:
        hull = [self.positions[a] for a in self.anchors[:3]]
        return [l for l in self.topology.sensors if not _inside(self.positions[l], hull)]


def _inside(p: Point2, tri) -> bool:
    a, b, c = tri
    s = signed_area(a, b, c)
    return all(x * s > 0 for x in (signed_area(p, b, c), signed_area(p, c, a), signed_area(p, a, b)))


class _Retry(Exception):
    pass


def _triplet_ok(pos, l, trip, cfg: GenerationConfig, allow_ambiguous=False) -> bool:
    p_l = pos[l]
    p_i, p_j, p_k = (pos[u] for u in trip)
    margin = AREA_MARGIN * cfg.spread**2
    areas = (
        signed_area(p_i, p_j, p_k),
        signed_area(p_l, p_j, p_k),
        signed_area(p_l, p_k, p_i),
        signed_area(p_l, p_i, p_j),
    )
    if min(abs(a) for a in areas) < margin:
        return False
    a = areal_from_coordinates(p_l, p_i, p_j, p_k).coeffs
    if max(abs(x) for x in a) > cfg.max_coeff:
        return False
    if cfg.contain and min(a) <= 0:
        return False
    if not allow_ambiguous:
        m = [abs(x) for x in a]
        for u in range(3):
            if abs(m[u] - 1) <= AMBIGUITY_MARGIN and abs(m[(u + 1) % 3] - m[(u + 2) % 3]) <= AMBIGUITY_MARGIN:
                return False
    return True


def _sample_point(rng, hull, inside: bool, spread: float) -> Point2:
    xs = [p.x for p in hull]
    ys = [p.y for p in hull]
    pad = 0.0 if inside else 0.6 * spread
    for _ in range(10_000):
        p = Point2(
            float(rng.uniform(min(xs) - pad, max(xs) + pad)),
            float(rng.uniform(min(ys) - pad, max(ys) + pad)),
        )
        if _inside(p, hull) == inside:
            return p
    raise _Retry()


def _forced_point(kind: str, rng, p_i: Point2, p_j: Point2, p_k: Point2) -> Point2:
    if kind == "parallelogram":
        return p_j + p_k - p_i
    t = float(rng.uniform(0.3, 0.8))
    if kind == "parallel-":
        t = -t
    return p_i + (p_j - p_k).scaled(t)


def _nearest(pos, l, pool, count):
    return sorted(pool, key=lambda u: (distance(pos[l], pos[u]), u))[:count]


def _choose_triplet(rng, pos, l, pool, cfg):
    near = _nearest(pos, l, pool, cfg.candidates)
    combos = list(itertools.combinations(near, 3))
    for c in rng.permutation(len(combos)):
        trip = tuple(int(u) for u in combos[c])
        if _triplet_ok(pos, l, trip, cfg):
            return trip
    return None


def _attempt(rng, cfg: GenerationConfig):
    spread = cfg.spread
    while True:
        anchors = [Point2(*map(float, rng.uniform(0, spread, 2))) for _ in range(3)]
        if abs(signed_area(*anchors)) >= 0.2 * spread**2:
            break
    n_sensors = sum(cfg.clusters)
    n_out = math.ceil(cfg.outside_frac * n_sensors - 1e-12)
    outside = np.zeros(n_sensors, dtype=bool)
    outside[rng.permutation(n_sensors)[:n_out]] = True

    pos: list[Point2] = list(anchors)
    clusters = [(0, 1, 2)]
    triplets: dict[int, tuple[int, int, int]] = {}
    forced: dict[int, str] = {}
    next_id = 3
    for s, size in enumerate(cfg.clusters, start=1):
        ids = list(range(next_id, next_id + size))
        earlier = [u for c in clusters for u in c]
        for _ in range(50):
            local_pos = list(pos) + [
                _sample_point(rng, anchors, not outside[u - 3], spread) for u in ids
            ]
            local_trip: dict[int, tuple[int, int, int]] = {}
            local_forced: dict[int, str] = {}
            ok = True
            for n, l in enumerate(ids):
                if cfg.ambiguous and n == 0:
                    kind = FORCED_KINDS[(s - 1) % len(FORCED_KINDS)]
                    trip = _force(rng, local_pos, l, earlier, kind, cfg)
                    if trip is None:
                        ok = False
                        break
                    local_forced[l] = kind
                else:
                    pool = earlier + [u for u in ids if u != l]
                    trip = _choose_triplet(rng, local_pos, l, pool, cfg)
                    if trip is None:
                        ok = False
                        break
                local_trip[l] = trip
            if ok and _block_well_posed(local_pos, ids, local_trip):
                break
        else:
            raise _Retry()
        pos = local_pos
        triplets.update(local_trip)
        forced.update(local_forced)
        clusters.append(tuple(ids))
        next_id += size
    return pos, clusters, triplets, forced, n_out


def _force(rng, pos, l, earlier, kind, cfg):
    near = _nearest(pos, l, earlier, cfg.candidates)
    combos = list(itertools.combinations(near, 3))
    for c in rng.permutation(len(combos)):
        trip = tuple(int(u) for u in combos[c])
        saved = pos[l]
        pos[l] = _forced_point(kind, rng, *(pos[u] for u in trip))
        if _triplet_ok(pos, l, trip, cfg, allow_ambiguous=True):
            return trip
        pos[l] = saved
    return None


def _block_well_posed(pos, ids, trip) -> bool:
    # The cluster block of I - C must be comfortably invertible.
    row = {u: r for r, u in enumerate(ids)}
    L = np.eye(len(ids))
    for l in ids:
        a = areal_from_coordinates(pos[l], *(pos[u] for u in trip[l])).coeffs
        for u, w in zip(trip[l], a):
            if u in row:
                L[row[l], row[u]] -= w
    if not np.linalg.cond(L) < 1e8:
        return False
    try:
        k = design_cluster_gains(L).gains
    except DesignFailure:
        return False
    return spectral_radius(np.eye(len(ids)) - k[:, None] * L) <= MAX_DESIGNED_RADIUS


def generate(config: GenerationConfig) -> Scenario:
    """Deterministic (in ``config.seed``) sequentially localizable scenario."""
    rng = np.random.default_rng(config.seed)
    for _ in range(config.max_tries):
        try:
            pos, clusters, triplets, forced, n_out = _attempt(rng, config)
        except _Retry:
            continue
        positions = tuple(pos)
        draft = Scenario(
            positions,
            _topology(positions, triplets, RangeTable(), exact=True),
            ClusterPartition(tuple(clusters)),
            config.seed,
            config.noise,
            forced,
        )
        if len(draft.outside_hull()) < n_out:
            continue
        ranges = measure(draft, config.noise)
        scn = Scenario(
            positions,
            NetworkTopology((0, 1, 2), triplets, ranges),
            draft.partition,
            config.seed,
            config.noise,
            forced,
        )
        assert validate_sequential_partition(scn.topology, scn.partition)
        return scn
    raise GenerationFailure(
        f"could not generate clusters {config.clusters} within {config.max_tries} attempts"
    )


def _pairs(anchors, triplets):
    pairs = set(itertools.combinations(sorted(anchors), 2))
    for l, trip in triplets.items():
        for u, v in required_pairs(l, trip):
            pairs.add((min(u, v), max(u, v)))
    return sorted(pairs)


def _topology(positions, triplets, ranges, exact=False) -> NetworkTopology:
    if exact:
        ranges = RangeTable(
            {(u, v): distance(positions[u], positions[v]) for u, v in _pairs((0, 1, 2), triplets)}
        )
    return NetworkTopology((0, 1, 2), triplets, ranges)


def measure(s: Scenario, sigma: float | None = None, rng=None) -> RangeTable:
    """Ranges for the anchor pairs and every pair a triplet needs.

    Noise is zero-mean Gaussian with standard deviation ``sigma``; results are
    clamped to stay strictly positive.
    """
    sigma = s.noise if sigma is None else sigma
    if rng is None:
        rng = np.random.default_rng([s.seed & (2**63 - 1), 1])
    floor = 1e-12 * s.spread()
    table = RangeTable()
    for u, v in _pairs(s.anchors, s.topology.triplets):
        d = distance(s.positions[u], s.positions[v])
        if sigma > 0:
            d = max(d + float(rng.normal(0.0, sigma)), floor)
        table[u, v] = d
    return table


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def dumps(s: Scenario) -> str:
    lines = [
        "[meta]",
        f"version={FORMAT_VERSION}",
        f"seed={s.seed}",
        f"noise={_fmt(s.noise)}",
        "[nodes]",
    ]
    anchors = set(s.anchors)
    for u, p in enumerate(s.positions):
        role = "anchor" if u in anchors else "sensor"
        lines.append(f"{u} {role} {_fmt(p.x)} {_fmt(p.y)}")
    lines.append("[triplets]")
    for l in s.topology.sensors:
        lines.append(" ".join(str(v) for v in (l, *s.topology.triplets[l])))
    lines.append("[clusters]")
    for idx, c in enumerate(s.partition.clusters):
        lines.append(" ".join(str(v) for v in (idx, *c)))
    lines.append("[ranges]")
    for (u, v), d in s.topology.ranges.items():
        lines.append(f"{u} {v} {_fmt(d)}")
    lines.append("[end]")
    return "\n".join(lines) + "\n"


def save(s: Scenario, path) -> None:
    Path(path).write_text(dumps(s), encoding="utf-8")


_SECTIONS = ("meta", "nodes", "triplets", "clusters", "ranges", "end")


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"{what}: expected an integer, got {tok!r}", line) from None


def _float(tok: str, line: int, what: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ParseError(f"{what}: expected a number, got {tok!r}", line) from None
    if not math.isfinite(x):
        raise ParseError(f"{what}: non-finite value {tok!r}", line)
    return x


def loads(text: str) -> Scenario:
    section = None
    seen: list[str] = []
    meta: dict[str, str] = {}
    nodes: dict[int, tuple[str, Point2]] = {}
    triplets: dict[int, tuple[int, int, int]] = {}
    clusters: dict[int, tuple[int, ...]] = {}
    ranges: dict[tuple[int, int], float] = {}
    range_lines: dict[tuple[int, int], int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            if name not in _SECTIONS:
                raise ParseError(f"unknown section [{name}]", no)
            if name in seen:
                raise ParseError(f"duplicate section [{name}]", no)
            expected = _SECTIONS[len(seen)]
            if name != expected:
                raise ParseError(f"expected section [{expected}], found [{name}]", no)
            seen.append(name)
            section = name
            continue
        tok = line.split()
        if section is None:
            raise ParseError("content before the [meta] section", no)
        if section == "meta":
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"meta: expected key=value, got {line!r}", no)
            meta[key.strip()] = value.strip()
            if key.strip() == "version" and value.strip() != str(FORMAT_VERSION):
                raise VersionMismatch(f"unsupported format version {value.strip()!r}", no)
        elif section == "nodes":
            if len(tok) != 4:
                raise ParseError(f"nodes: expected 'id role x y', got {line!r}", no)
            u = _int(tok[0], no, "node id")
            if tok[1] not in ("anchor", "sensor"):
                raise ParseError(f"node {u}: role must be anchor or sensor, got {tok[1]!r}", no)
            if u in nodes:
                raise ParseError(f"duplicate node id {u}", no)
            nodes[u] = (tok[1], Point2(_float(tok[2], no, "x"), _float(tok[3], no, "y")))
        elif section == "triplets":
            if len(tok) != 4:
                raise ParseError(f"triplets: expected 'id i j k', got {line!r}", no)
            l, i, j, k = (_int(t, no, "triplet") for t in tok)
            for u in (l, i, j, k):
                if u not in nodes:
                    raise ParseError(f"triplet references unknown node id {u}", no)
            triplets[l] = (i, j, k)
        elif section == "clusters":
            if len(tok) < 2:
                raise ParseError(f"clusters: expected 'index id...', got {line!r}", no)
            idx = _int(tok[0], no, "cluster index")
            members = tuple(_int(t, no, "cluster member") for t in tok[1:])
            for u in members:
                if u not in nodes:
                    raise ParseError(f"cluster {idx} references unknown node id {u}", no)
            if idx != len(clusters):
                raise ParseError(f"cluster index {idx} out of order", no)
            clusters[idx] = members
        elif section == "ranges":
            if len(tok) != 3:
                raise ParseError(f"ranges: expected 'u v d', got {line!r}", no)
            u, v = _int(tok[0], no, "range node"), _int(tok[1], no, "range node")
            for w in (u, v):
                if w not in nodes:
                    raise ParseError(f"range references unknown node id {w}", no)
            d = _float(tok[2], no, "distance")
            if u == v or d <= 0:
                raise ParseError(f"invalid range {u} {v} {tok[2]}", no)
            ranges[(u, v)] = d
            range_lines[(u, v)] = no
        else:
            raise ParseError(f"unexpected content after [end]: {line!r}", no)

    if seen != list(_SECTIONS):
        missing = [s for s in _SECTIONS if s not in seen]
        raise ParseError(f"truncated file: missing section(s) {', '.join(missing)}")
    if "version" not in meta:
        raise ParseError("meta: missing version")
    seed = _int(meta.get("seed", "0"), None, "meta seed")
    noise = _float(meta.get("noise", "0"), None, "noise")
    ids = sorted(nodes)
    if ids != list(range(len(ids))):
        raise ParseError("node ids must be 0..n-1")
    anchors = tuple(u for u in ids if nodes[u][0] == "anchor")
    try:
        topo = NetworkTopology(anchors, triplets, RangeTable(ranges))
        part = ClusterPartition(tuple(clusters[i] for i in range(len(clusters))))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return Scenario(tuple(nodes[u][1] for u in ids), topo, part, seed, noise)


def load(path) -> Scenario:
    return loads(Path(path).read_text(encoding="utf-8"))
