import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_instance, transform_instance
from crowdcast import (
    GroupConfig, GroupDetector, group_members, kernel, long_term_distance,
    scaled_threshold,
)


def tracks_at_offset(offset, n=8):
    target = np.zeros((n, 2))
    neighbor = np.tile([offset, 0.0], (n, 1))
    return target, neighbor


def test_long_term_distance_hand_sums():
    t, n = tracks_at_offset(1.0)
    assert long_term_distance(t, n) == pytest.approx(8.0)   # 8 frames x 1.0
    t3, n3 = tracks_at_offset(3.0)
    assert long_term_distance(t3, n3) == pytest.approx(24.0)  # 8 frames x 3.0


def test_long_term_distance_coincident_tracks():
    t, _ = tracks_at_offset(0.0)
    assert long_term_distance(t, t) == 0.0


def test_long_term_distance_length_mismatch():
    with pytest.raises(ValueError):
        long_term_distance(np.zeros((8, 2)), np.zeros((7, 2)))


def test_kernel_threshold_and_boundary():
    cfg = GroupConfig(distance_threshold=20.0)
    t, n = tracks_at_offset(1.0)      # sum 8
    assert kernel(t, n, cfg) == 1
    t, n = tracks_at_offset(3.0)      # sum 24
    assert kernel(t, n, cfg) == 0
    t, n = tracks_at_offset(2.5)      # sum exactly 20 -> boundary is a member
    assert long_term_distance(t, n) == 20.0
    assert kernel(t, n, cfg) == 1


def test_group_members_no_neighbors():
    inst = make_instance(np.random.default_rng(0), n_neighbors=0)
    gs = group_members(inst, GroupConfig())
    assert gs.member_ids == frozenset()
    assert gs.distances == {}


def test_group_members_splits_by_offset():
    from crowdcast import PredictionInstance
    target = np.zeros((8, 2))
    inst = PredictionInstance("t", target, {
        "near": np.tile([1.0, 0.0], (8, 1)),   # sum 8 <= 20
        "far": np.tile([3.0, 0.0], (8, 1)),    # sum 24 > 20
    })
    gs = group_members(inst, GroupConfig(20.0))
    assert gs.member_ids == frozenset({"near"})
    assert gs.distances["near"] == pytest.approx(8.0)
    assert gs.distances["far"] == pytest.approx(24.0)


def test_group_members_disabled_is_empty():
    from crowdcast import PredictionInstance
    inst = PredictionInstance("t", np.zeros((8, 2)), {"near": np.tile([1.0, 0.0], (8, 1))})
    gs = group_members(inst, GroupConfig(20.0, enabled=False))
    assert gs.member_ids == frozenset()
    assert gs.distances["near"] == pytest.approx(8.0)   # distances still reported


def test_rigid_motion_invariance(rng):
    cfg = GroupConfig(20.0)
    for _ in range(20):
        inst = make_instance(rng, n_neighbors=4)
        angle = rng.uniform(0, 2 * np.pi)
        shift = rng.uniform(-50, 50, size=2)
        moved = transform_instance(inst, angle, shift)
        base = group_members(inst, cfg)
        got = group_members(moved, cfg)
        assert got.member_ids == base.member_ids
        for a in base.distances:
            assert got.distances[a] == pytest.approx(base.distances[a], abs=1e-9)


@given(st.integers(2, 12), st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_kernel_symmetry(n_steps, seed):
    gen = np.random.default_rng(seed)
    a = gen.uniform(-10, 10, size=(n_steps, 2))
    b = gen.uniform(-10, 10, size=(n_steps, 2))
    cfg = GroupConfig(float(gen.uniform(0.5, 50)))
    assert kernel(a, b, cfg) == kernel(b, a, cfg)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_threshold_monotonicity(seed):
    gen = np.random.default_rng(seed)
    inst = make_instance(gen, n_neighbors=5)
    small = group_members(inst, GroupConfig(5.0)).member_ids
    large = group_members(inst, GroupConfig(25.0)).member_ids
    assert small <= large


def test_oracle_equivalence_1000_instances():
    gen = np.random.default_rng(99)
    cfg = GroupConfig(20.0)
    for _ in range(1000):
        inst = make_instance(gen, n_neighbors=int(gen.integers(0, 5)), n_future=1)
        got = group_members(inst, cfg)
        # brute force straight off the kernel definition
        expected = set()
        for a, pts in inst.neighbors.items():
            s = 0.0
            for t in range(inst.observed.shape[0]):
                dx = pts[t][0] - inst.observed[t][0]
                dy = pts[t][1] - inst.observed[t][1]
                s += (dx * dx + dy * dy) ** 0.5
            if s <= cfg.distance_threshold:
                expected.add(a)
        assert got.member_ids == expected


def test_scaled_threshold():
    assert scaled_threshold(8) == 20.0
    assert scaled_threshold(5) == pytest.approx(12.5)
    assert scaled_threshold(4) == pytest.approx(10.0)


def test_group_detector_estimator(rng):
    det = GroupDetector(distance_threshold=20.0)
    insts = [make_instance(rng) for _ in range(3)]
    sets = det.fit(insts).transform(insts)
    assert len(sets) == 3
    assert det.get_params()["distance_threshold"] == 20.0
