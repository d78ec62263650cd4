import math

import numpy as np
import pytest

from crowdcast import PredictionInstance


def make_instance(rng: np.random.Generator, n_past=8, n_future=12, n_neighbors=3,
                  spread=10.0, with_future=True) -> PredictionInstance:
    """Random walking instance: target and neighbours drift with noise."""
    def walk():
        start = rng.uniform(-spread, spread, size=2)
        heading = rng.uniform(0, 2 * math.pi)
        speed = rng.uniform(0.05, 0.3)
        step = speed * np.array([math.cos(heading), math.sin(heading)])
        pts = start + np.outer(np.arange(n_past + n_future), step)
        return pts + rng.normal(0, 0.02, pts.shape)

    target = walk()
    neighbors = {f"n{i}": walk()[:n_past] for i in range(n_neighbors)}
    return PredictionInstance(
        target_id="target",
        observed=target[:n_past],
        neighbors=neighbors,
        future_truth=target[n_past:] if with_future else None,
    )


def rigid_transform(points: np.ndarray, angle: float, translation) -> np.ndarray:
    rot = np.array([[math.cos(angle), -math.sin(angle)],
                    [math.sin(angle), math.cos(angle)]])
    return points @ rot.T + np.asarray(translation)


def transform_instance(inst: PredictionInstance, angle: float, translation) -> PredictionInstance:
    return PredictionInstance(
        target_id=inst.target_id,
        observed=rigid_transform(np.asarray(inst.observed), angle, translation),
        neighbors={a: rigid_transform(np.asarray(p), angle, translation) for a, p in inst.neighbors.items()},
        future_truth=None if inst.future_truth is None
        else rigid_transform(np.asarray(inst.future_truth), angle, translation),
        scene_id=inst.scene_id,
        window_start=inst.window_start,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
