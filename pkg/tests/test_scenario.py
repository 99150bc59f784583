import math

import numpy as np
import pytest

from rangeloc import (
    GenerationConfig,
    areal_from_coordinates,
    generate,
    resolve_sign_pattern,
    signed_area,
    validate_sequential_partition,
)
from rangeloc.errors import GenerationFailure, ParseError, VersionMismatch
from rangeloc.geometry import distance
from rangeloc.scenario import dumps, load, loads, measure, save


def test_default_is_twelve_nodes():
    s = generate(GenerationConfig(seed=42))
    assert len(s.positions) == 12
    assert s.anchors == (0, 1, 2)
    assert [len(c) for c in s.partition.clusters] == [3, 3, 3, 3]


def test_deterministic_and_byte_identical():
    cfg = GenerationConfig(clusters=(2, 4, 3), seed=17, outside_frac=0.3)
    a, b = generate(cfg), generate(cfg)
    assert a == b
    assert dumps(a) == dumps(b)
    assert dumps(generate(GenerationConfig(seed=18))) != dumps(generate(GenerationConfig(seed=17)))


def test_config_validation():
    for bad in ((), (0,), (3, -1)):
        with pytest.raises(ValueError):
            GenerationConfig(clusters=bad)
    with pytest.raises(ValueError):
        GenerationConfig(outside_frac=1.5)
    with pytest.raises(ValueError):
        GenerationConfig(noise=-0.1)


def test_over_constrained_config_fails():
    with pytest.raises(GenerationFailure):
        generate(GenerationConfig(clusters=(3, 3), max_coeff=0.5, max_tries=3))


@pytest.mark.parametrize("seed", range(10))
def test_generated_invariants(seed):
    s = generate(GenerationConfig(clusters=(3, 2, 4), seed=seed))
    assert validate_sequential_partition(s.topology, s.partition)
    spread = s.spread()
    for l, (i, j, k) in s.topology.triplets.items():
        p = s.positions
        assert abs(signed_area(p[i], p[j], p[k])) >= 1e-3 * spread**2
    for (u, v), d in s.topology.ranges.items():
        assert d == distance(s.positions[u], s.positions[v])


@pytest.mark.parametrize("frac", [0.0, 0.25, 0.5, 1.0])
def test_outside_fraction_met(frac):
    s = generate(GenerationConfig(clusters=(4, 4), seed=3, outside_frac=frac))
    assert len(s.outside_hull()) >= math.ceil(frac * 8 - 1e-12)


def test_contained_triplets_give_positive_coefficients():
    for seed in range(10):
        s = generate(GenerationConfig(seed=seed, outside_frac=0.0, contain=True))
        for l, trip in s.topology.triplets.items():
            a = areal_from_coordinates(s.positions[l], *(s.positions[u] for u in trip))
            assert min(a.coeffs) > 0


def test_noiseless_signs_match_oracle():
    total = 0
    for seed in range(200):
        s = generate(GenerationConfig(seed=seed))
        for l, trip in s.topology.triplets.items():
            a = areal_from_coordinates(s.positions[l], *(s.positions[u] for u in trip))
            got = resolve_sign_pattern(s.topology.quad(l))
            assert got.signs == tuple(1 if x > 0 else -1 for x in a.coeffs)
            total += 1
    assert total == 1800


def test_ambiguous_flag_places_forced_nodes():
    s = generate(GenerationConfig(seed=3, ambiguous=True))
    assert len(s.forced) == 3
    assert set(s.forced.values()) == {"parallelogram", "parallel+", "parallel-"}


def test_measure_exact_and_symmetric():
    s = generate(GenerationConfig(seed=1))
    t = measure(s, 0.0)
    for (u, v), d in t.items():
        assert d == distance(s.positions[u], s.positions[v])
        assert t[v, u] == d


def test_measure_noise_within_five_sigma():
    s = generate(GenerationConfig(seed=1))
    rng = np.random.default_rng(0)
    sigma = 0.01
    worst = 0.0
    samples = 0
    while samples < 10_000:
        for (u, v), d in measure(s, sigma, rng).items():
            worst = max(worst, abs(d - distance(s.positions[u], s.positions[v])))
            samples += 1
    assert worst <= 5 * sigma


def test_measure_deterministic_in_seed():
    s = generate(GenerationConfig(seed=1, noise=0.01))
    assert list(measure(s).items()) == list(measure(s).items())


def test_round_trip_text_and_file(tmp_path):
    for seed in range(5):
        s = generate(GenerationConfig(clusters=(3, 1, 2), seed=seed, noise=0.001 * seed))
        assert loads(dumps(s)) == s
        path = tmp_path / f"s{seed}.scn"
        save(s, path)
        assert load(path) == s


def test_format_layout():
    text = dumps(generate(GenerationConfig(seed=2)))
    heads = [line for line in text.splitlines() if line.startswith("[")]
    assert heads == ["[meta]", "[nodes]", "[triplets]", "[clusters]", "[ranges]", "[end]"]
    assert "version=1" in text


def test_truncated_file():
    text = dumps(generate(GenerationConfig(seed=2)))
    with pytest.raises(ParseError, match="truncated"):
        loads(text[: text.index("[ranges]")])


def test_unknown_id_in_clusters_named():
    text = dumps(generate(GenerationConfig(seed=2)))
    bad = text.replace("[clusters]\n0 0 1 2\n", "[clusters]\n0 0 1 2 99\n")
    with pytest.raises(ParseError, match="99") as info:
        loads(bad)
    assert info.value.line is not None


def test_version_mismatch():
    text = dumps(generate(GenerationConfig(seed=2))).replace("version=1", "version=7")
    with pytest.raises(VersionMismatch):
        loads(text)


@pytest.mark.parametrize(
    "old, new",
    [
        ("[nodes]", "[nodez]"),
        (" anchor ", " beacon "),
        ("[end]\n", "[end]\nextra\n"),
    ],
)
def test_malformed_inputs(old, new):
    text = dumps(generate(GenerationConfig(seed=2)))
    with pytest.raises(ParseError):
        loads(text.replace(old, new, 1))


def test_non_finite_coordinate_rejected():
    text = dumps(generate(GenerationConfig(seed=2)))
    lines = text.splitlines()
    n = lines.index("[nodes]") + 1
    u, role, _, y = lines[n].split()
    lines[n] = f"{u} {role} nan {y}"
    with pytest.raises(ParseError, match="non-finite"):
        loads("\n".join(lines) + "\n")
