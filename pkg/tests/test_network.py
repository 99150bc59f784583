import numpy as np
import pytest

from rangeloc import (
    ClusterPartition,
    GenerationConfig,
    NetworkTopology,
    Point2,
    RangeTable,
    SignedBarycentric,
    assemble_system,
    cluster_submatrix,
    generate,
    validate_sequential_partition,
)
from rangeloc.errors import IndexOutOfRange, MissingCoefficient, SignResolutionError
from rangeloc.geometry import distance
from rangeloc.network import resolve_network
from rangeloc.pipeline import build_system

ANCHORS = {0: Point2(0, 0), 1: Point2(1, 0), 2: Point2(0, 1)}


def _topology(positions, triplets):
    ranges = {}
    for l, trip in triplets.items():
        for u in (l, *trip):
            for v in (l, *trip):
                if u < v:
                    ranges[u, v] = distance(positions[u], positions[v])
    return NetworkTopology((0, 1, 2), triplets, RangeTable(ranges))


def test_range_table_symmetric_and_validated():
    t = RangeTable({(3, 1): 2.0})
    assert t[1, 3] == t[3, 1] == 2.0
    assert (1, 3) in t and (3, 1) in t and (1, 2) not in t
    with pytest.raises(ValueError):
        t[1, 2] = 0.0
    with pytest.raises(ValueError):
        t[1, 2] = float("nan")
    with pytest.raises(ValueError):
        t[4, 4] = 1.0


def test_topology_validation():
    pos = {**ANCHORS, 3: Point2(0.2, 0.2)}
    topo = _topology(pos, {3: (0, 1, 2)})
    assert topo.sensors == (3,)
    with pytest.raises(ValueError):
        NetworkTopology((0, 1), {}, RangeTable())
    with pytest.raises(ValueError):
        NetworkTopology((0, 1, 2), {3: (0, 1, 1)}, topo.ranges)
    with pytest.raises(ValueError):
        NetworkTopology((0, 1, 2), {3: (0, 1, 9)}, topo.ranges)
    with pytest.raises(ValueError, match="missing"):
        NetworkTopology((0, 1, 2), {3: (0, 1, 2)}, RangeTable({(0, 1): 1.0}))


def test_single_sensor_system():
    pos = {**ANCHORS, 3: Point2(0.25, 0.25)}
    topo = _topology(pos, {3: (0, 1, 2)})
    sys = assemble_system(topo, ANCHORS, {3: SignedBarycentric((0.5, 0.25, 0.25), (0, 1, 2))})
    assert sys.C.shape == (1, 1) and sys.C[0, 0] == 0.0
    assert np.array_equal(sys.B, [[0.5, 0.25, 0.25]])


def test_two_sensor_chain_sparsity():
    pos = {**ANCHORS, 4: Point2(0.3, 0.3), 5: Point2(0.8, 0.6)}
    topo = _topology(pos, {4: (0, 1, 2), 5: (1, 2, 4)})
    signed = {l: r.barycentric for l, r in resolve_network(topo).items()}
    sys = assemble_system(topo, ANCHORS, signed)
    r4, r5 = sys.index(4), sys.index(5)
    assert np.count_nonzero(sys.C) == 1 and sys.C[r5, r4] != 0
    assert sys.coefficients(5) == pytest.approx(dict(zip((1, 2, 4), signed[5].coeffs)))
    assert np.allclose(sys.B.sum(1) + sys.C.sum(1), 1.0, atol=1e-9)


def test_missing_coefficient():
    pos = {**ANCHORS, 3: Point2(0.25, 0.25)}
    topo = _topology(pos, {3: (0, 1, 2)})
    with pytest.raises(MissingCoefficient):
        assemble_system(topo, ANCHORS, {})


def test_sign_failure_names_sensor():
    pos = {**ANCHORS, 3: Point2(0.25, 0.25), 4: Point2(2, 2), 5: Point2(3, 3)}
    # Sensor 3 relies on collinear 0, 4, 5.
    topo = _topology(pos, {4: (0, 1, 2), 5: (0, 1, 2), 3: (0, 4, 5)})
    with pytest.raises(SignResolutionError) as info:
        resolve_network(topo)
    assert info.value.node == 3


def test_sequential_partition():
    pos = {**ANCHORS, 3: Point2(0.2, 0.2), 4: Point2(0.6, 0.5)}
    topo = _topology(pos, {3: (0, 1, 2), 4: (0, 1, 3)})
    assert validate_sequential_partition(topo, ClusterPartition(((0, 1, 2), (3, 4))))
    assert validate_sequential_partition(topo, ClusterPartition(((0, 1, 2), (3,), (4,))))
    assert not validate_sequential_partition(topo, ClusterPartition(((0, 1, 2), (4,), (3,))))
    assert not validate_sequential_partition(topo, ClusterPartition(((0, 1, 2), (3,))))


def test_partition_overlap_rejected():
    with pytest.raises(ValueError):
        ClusterPartition(((0, 1, 2), (3, 4), (4, 5)))


def test_cluster_submatrix():
    pos = {**ANCHORS, 3: Point2(0.2, 0.2), 4: Point2(0.6, 0.5), 5: Point2(1.2, 1.1)}
    topo = _topology(pos, {3: (0, 1, 2), 4: (0, 1, 2), 5: (1, 4, 2)})
    part = ClusterPartition(((0, 1, 2), (3,), (4, 5)))
    signed = {l: r.barycentric for l, r in resolve_network(topo).items()}
    sys = assemble_system(topo, ANCHORS, signed, part)
    assert np.array_equal(cluster_submatrix(sys, part, 1), [[1.0]])
    L2 = cluster_submatrix(sys, part, 2)
    a54 = sys.coefficients(5)[4]
    assert L2[1, 0] == -a54 and L2[0, 1] == 0.0
    with pytest.raises(IndexOutOfRange):
        cluster_submatrix(sys, part, 0)
    with pytest.raises(IndexOutOfRange):
        cluster_submatrix(sys, part, 3)


def test_generated_system_structure():
    s = generate(GenerationConfig(clusters=(3, 3, 3), seed=4))
    sys, res = build_system(s)
    part = s.partition
    assert validate_sequential_partition(s.topology, part)
    assert np.all(np.diag(sys.C) == 0)
    full = np.hstack([sys.B, sys.C])
    assert np.all(np.count_nonzero(full, axis=1) <= 3)
    assert np.allclose(full.sum(1), 1.0, atol=1e-9)
    # Block lower-triangular C and a block diagonal built from the L_s.
    n = 0
    I_C = np.eye(sys.n_sensors) - sys.C
    for s_idx in range(1, len(part)):
        size = len(part.clusters[s_idx])
        assert np.all(sys.C[n:n + size, n + size:] == 0)
        assert np.array_equal(cluster_submatrix(sys, part, s_idx), I_C[n:n + size, n:n + size])
        n += size
    # Round trip of the coefficients.
    for l, r in res.items():
        got = sys.coefficients(l)
        assert [got.get(u, 0.0) for u in s.topology.triplets[l]] == list(r.barycentric.coeffs)
    # Ground truth is a fixed point of p = C p + B p_a.
    truth = s.truth(sys.sensor_ids)
    assert np.max(np.abs((np.eye(sys.n_sensors) - sys.C) @ truth - sys.B @ sys.anchor_positions)) < 1e-9
