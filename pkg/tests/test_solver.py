import math

import numpy as np
import pytest

from rangeloc import (
    ClusterPartition,
    GenerationConfig,
    GlobalPreconditioner,
    LocalizationSystem,
    Point2,
    design_preconditioner,
    direct_solve,
    generate,
    run,
    step,
)
from rangeloc.errors import Diverged, SingularSystem
from rangeloc.pipeline import build_system
from rangeloc.preconditioner import iteration_radius
from rangeloc.scenario import Scenario, measure
from rangeloc.network import NetworkTopology
from rangeloc.solver import solve_by_clusters

PA = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def _single(k=1.0):
    sys = LocalizationSystem(np.array([[0.5, 0.25, 0.25]]), np.zeros((1, 1)), PA, (0, 1, 2), (3,))
    return sys, GlobalPreconditioner(np.array([k]))


def test_single_sensor_step():
    sys, K = _single(1.0)
    for z in ([[5.0, -3.0]], [[0.0, 0.0]]):
        assert np.allclose(step(np.array(z), K, sys), [[0.25, 0.25]])
    sys, K = _single(0.5)
    assert np.allclose(step(np.array([[1.0, 1.0]]), K, sys), [[0.625, 0.625]])


def test_step_shape_checked():
    sys, K = _single()
    with pytest.raises(ValueError):
        step(np.zeros((2, 2)), K, sys)


def test_direct_solve_single():
    sys, _ = _single()
    assert np.allclose(direct_solve(sys), [[0.25, 0.25]])


def test_singular_system():
    C = np.array([[0.0, 1.0], [1.0, 0.0]])
    B = np.zeros((2, 3))
    sys = LocalizationSystem(B, C, PA, (0, 1, 2), (3, 4))
    with pytest.raises(SingularSystem):
        direct_solve(sys)


def test_run_single_sensor_one_round():
    sys, K = _single(1.0)
    tr = run(sys, K, z0=np.array([[9.0, 9.0]]))
    assert tr.converged
    assert np.allclose(tr.snapshots[1][1], [[0.25, 0.25]])
    assert tr.residuals[0] == 1.0 and tr.residuals[1] == 0.0


def test_run_from_exact_solution():
    s = generate(GenerationConfig(seed=5))
    sys, _ = build_system(s)
    K = design_preconditioner(sys, s.partition)
    tr = run(sys, K, z0=direct_solve(sys))
    assert tr.converged and tr.iterations <= 1
    # Zero up to rounding in one round.
    assert np.all(np.abs(tr.estimate - tr.solution) <= 1e-15 * (1 + np.abs(tr.solution).max()))


def test_run_argument_checks():
    sys, K = _single()
    with pytest.raises(ValueError):
        run(sys, K, max_iter=0)
    with pytest.raises(ValueError):
        run(sys, K, tol=0.0)
    with pytest.raises(ValueError):
        run(sys, K, z0=np.zeros((3, 2)))


def test_max_iter_reason():
    s = generate(GenerationConfig(seed=0))
    sys, _ = build_system(s)
    K = design_preconditioner(sys, s.partition)
    tr = run(sys, K, max_iter=1)
    assert tr.reason == "max_iter" and tr.iterations == 1 and not tr.converged


def test_diverged_with_bad_gain():
    sys, _ = _single()
    with pytest.raises(Diverged):
        run(sys, GlobalPreconditioner(np.array([3.0])), max_iter=10_000)


def test_generated_scenarios_converge_to_direct_and_truth():
    for seed in range(8):
        s = generate(GenerationConfig(clusters=(3, 3, 3), seed=seed))
        sys, _ = build_system(s)
        truth = s.truth(sys.sensor_ids)
        direct = direct_solve(sys)
        assert np.max(np.abs(direct - truth)) <= 1e-9
        resid = (np.eye(sys.n_sensors) - sys.C) @ direct - sys.B @ sys.anchor_positions
        assert np.max(np.abs(resid)) <= 1e-9
        assert np.allclose(solve_by_clusters(sys, s.partition), direct, atol=1e-12)
        K = design_preconditioner(sys, s.partition)
        tr = run(sys, K)
        assert tr.converged
        tol = 1e-9 * s.spread()
        assert np.max(np.abs(tr.estimate - direct)) <= tol * (1 + np.linalg.norm(direct))
        assert np.max(np.abs(tr.estimate - direct)) <= 1e-6


def test_residuals_normalized_and_nonnegative():
    s = generate(GenerationConfig(seed=2))
    sys, _ = build_system(s)
    tr = run(sys, design_preconditioner(sys, s.partition))
    assert tr.residuals[0] == 1.0
    assert np.all(tr.residuals >= 0)
    assert len(tr.residuals) == tr.iterations + 1


def test_snapshot_stride():
    s = generate(GenerationConfig(seed=2))
    sys, _ = build_system(s)
    tr = run(sys, design_preconditioner(sys, s.partition), stride=5)
    ts = [t for t, _ in tr.snapshots]
    assert ts[0] == 0 and ts[-1] == tr.iterations
    assert all(t % 5 == 0 for t in ts[:-1])


def test_step_is_affine_combination_preserving():
    s = generate(GenerationConfig(seed=6))
    sys, _ = build_system(s)
    K = design_preconditioner(sys, s.partition)
    rng = np.random.default_rng(0)
    z1, z2 = rng.normal(size=(2, sys.n_sensors, 2))
    for alpha in (0.3, -1.5, 2.0):
        lhs = step(alpha * z1 + (1 - alpha) * z2, K, sys)
        rhs = alpha * step(z1, K, sys) + (1 - alpha) * step(z2, K, sys)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.abs(lhs).max())


def _moved(s: Scenario, f) -> Scenario:
    positions = tuple(f(p) for p in s.positions)
    draft = Scenario(positions, s.topology, s.partition, s.seed, s.noise)
    topo = NetworkTopology(s.anchors, s.topology.triplets, measure(draft))
    return Scenario(positions, topo, s.partition, s.seed, s.noise)


def test_translation_equivariance():
    s = generate(GenerationConfig(seed=9))
    v = np.array([3.5, -1.25])
    moved = _moved(s, lambda p: Point2(p.x + v[0], p.y + v[1]))
    a, _ = build_system(s)
    b, _ = build_system(moved)
    assert np.allclose(direct_solve(b), direct_solve(a) + v, atol=1e-9)
    ta = run(a, design_preconditioner(a, s.partition))
    tb = run(b, design_preconditioner(b, moved.partition))
    assert np.allclose(tb.estimate, ta.estimate + v, atol=1e-9)


def test_rotation_equivariance():
    s = generate(GenerationConfig(seed=10))
    c, sn = math.cos(0.4), math.sin(0.4)
    R = np.array([[c, -sn], [sn, c]])
    moved = _moved(s, lambda p: Point2(c * p.x - sn * p.y, sn * p.x + c * p.y))
    a, _ = build_system(s)
    b, _ = build_system(moved)
    assert np.allclose(direct_solve(b), direct_solve(a) @ R.T, atol=1e-9)


def test_synchronous_round_matches_matrix_form():
    s = generate(GenerationConfig(seed=11))
    sys, _ = build_system(s)
    K = design_preconditioner(sys, s.partition)
    z = np.random.default_rng(1).normal(size=(sys.n_sensors, 2))
    T = K.iteration_matrix(sys)
    expected = T @ z + K.gains[:, None] * (sys.B @ sys.anchor_positions)
    assert np.allclose(step(z, K, sys), expected, atol=1e-12)


def test_rate_bound_on_long_runs():
    for seed in (0, 1, 7):
        s = generate(GenerationConfig(seed=seed))
        sys, _ = build_system(s)
        K = design_preconditioner(sys, s.partition)
        rho = iteration_radius(K, sys, s.partition)
        tr = run(sys, K)
        res = tr.residuals
        tail = res[len(res) - len(res) // 3 - 1:]
        assert (tail[-1] / tail[0]) ** (1 / (len(tail) - 1)) <= rho + 0.05


def test_plain_iteration_when_coefficients_positive():
    s = generate(GenerationConfig(seed=3, outside_frac=0.0, contain=True))
    sys, _ = build_system(s)
    tr = run(sys, GlobalPreconditioner.identity(sys.n_sensors))
    assert tr.converged


def test_partition_unused_for_single_block():
    sys, K = _single()
    part = ClusterPartition(((0, 1, 2), (3,)))
    assert np.allclose(solve_by_clusters(sys, part), direct_solve(sys))


def test_slow_contraction_stops_close_to_solution():
    # Rate 0.9995: a small step alone would stop ~2000 x tol away.
    sys, K = _single(5e-4)
    tr = run(sys, K)
    assert tr.converged
    tol = 1e-9 * np.sqrt(2)
    err = np.max(np.abs(tr.estimate - tr.solution))
    assert err <= tol * (1 + np.linalg.norm(tr.solution))
