"""Group detection via the long-term distance kernel.

A neighbour belongs to the target's group when the sum of its per-frame
Euclidean distances to the target over the whole observed window stays at or
below a threshold.  The kernel only looks at relative positions, so it is
invariant to rigid motions of the scene.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .scene import PredictionInstance
from .validation import as_points, check_positive

DEFAULT_DISTANCE_THRESHOLD = 20.0  # scene units summed over an 8-frame window


def scaled_threshold(n_past: int, base: float = DEFAULT_DISTANCE_THRESHOLD, base_n_past: int = 8) -> float:
    """Scale the long-term distance threshold to a different window length.

    The kernel sums un-normalized per-frame distances, so the threshold's
    meaning depends on how many frames are summed.
    """
    return base * n_past / base_n_past


@dataclass(frozen=True)
class GroupConfig:
    distance_threshold: float = DEFAULT_DISTANCE_THRESHOLD
    enabled: bool = True

    def __post_init__(self):
        check_positive(self.distance_threshold, "distance_threshold")


@dataclass(frozen=True)
class GroupSet:
    """Group classification of one instance's neighbours.

    ``distances`` always records every neighbour's long-term distance;
    ``member_ids`` is empty when grouping is disabled.
    """

    target_id: str
    member_ids: frozenset[str]
    distances: dict[str, float] = field(default_factory=dict)


def long_term_distance(target_track, neighbor_track) -> float:
    """Sum of per-frame Euclidean distances between two equal-length tracks."""
    t = as_points(target_track, name="target_track")
    n = as_points(neighbor_track, t.shape[0], "neighbor_track")
    return float(np.linalg.norm(n - t, axis=1).sum())


def kernel(target_track, neighbor_track, cfg: GroupConfig) -> int:
    """1 iff the long-term distance is <= the threshold (boundary included)."""
    return int(long_term_distance(target_track, neighbor_track) <= cfg.distance_threshold)


def group_members(inst: PredictionInstance, cfg: GroupConfig) -> GroupSet:
    """Classify every neighbour of the instance.

    With ``cfg.enabled`` false the member set is empty (ablation mode) while
    distances are still recorded for reporting.
    """
    distances = {a: long_term_distance(inst.observed, p) for a, p in inst.neighbors.items()}
    if cfg.enabled:
        members = frozenset(a for a, d in distances.items() if d <= cfg.distance_threshold)
    else:
        members = frozenset()
    return GroupSet(inst.target_id, members, distances)


class GroupDetector(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping instances to their GroupSets."""

    def __init__(self, distance_threshold: float = DEFAULT_DISTANCE_THRESHOLD, enabled: bool = True):
        self.distance_threshold = distance_threshold
        self.enabled = enabled

    def _config(self) -> GroupConfig:
        return GroupConfig(self.distance_threshold, self.enabled)

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> list[GroupSet]:
        cfg = self._config()
        return [group_members(inst, cfg) for inst in X]
