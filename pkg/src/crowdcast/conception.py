"""Field-of-view perception features over non-group ("unrelated") neighbours.

The cone of width ``fov_degrees`` about the target's moving direction is
split at the heading line into Right and Left halves; everything outside the
cone is Rear.  Per partition the module averages, at the last observed frame:

  dis   Euclidean distance neighbour-target
  dir   absolute heading difference, wrapped to [0, pi]   (front only)
  vel   neighbour's own displacement magnitude over the window (front only)

Rear neighbours contribute distance only.  The seven factors are concatenated
right-left-rear into a single perception vector.  Units: dis in scene units,
dir in radians, vel in scene units per observation window (no time division).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .grouping import GroupConfig, GroupSet, group_members
from .scene import PredictionInstance
from .validation import as_points

RIGHT, LEFT, REAR = "right", "left", "rear"
SLOTS = ("dis_right", "dir_right", "vel_right", "dis_left", "dir_left", "vel_left", "dis_rear")
PARTITION_SLOTS = {RIGHT: (0, 1, 2), LEFT: (3, 4, 5), REAR: (6,)}


@dataclass(frozen=True)
class ConceptionConfig:
    fov_degrees: float = 180.0
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.fov_degrees <= 360.0:
            raise ValueError(f"fov_degrees must be in (0, 360], got {self.fov_degrees}")

    @property
    def half_fov(self) -> float:
        return math.radians(self.fov_degrees) / 2.0


@dataclass(frozen=True)
class PartitionAssignment:
    agent_id: str
    partition: str         # right / left / rear
    angle: float           # neighbour bearing relative to heading, (-pi, pi]


@dataclass(frozen=True)
class ConceptionVector:
    """The 7 perception factors plus per-partition neighbour counts."""

    values: tuple[float, ...]          # (dis_r, dir_r, vel_r, dis_l, dir_l, vel_l, dis_rear)
    counts: tuple[int, int, int]       # neighbours in right / left / rear

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    @classmethod
    def zero(cls) -> "ConceptionVector":
        return cls((0.0,) * 7, (0, 0, 0))


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def moving_direction(track) -> float:
    """Heading of the last step of a track, in radians (-pi, pi].

    Falls back to the most recent non-zero step when the last displacement is
    exactly zero, and to 0 for a fully stationary track.
    """
    pts = as_points(track, name="track")
    if pts.shape[0] < 2:
        raise ValueError("moving_direction needs at least 2 points")
    for t in range(pts.shape[0] - 1, 0, -1):
        dx, dy = pts[t] - pts[t - 1]
        if dx != 0.0 or dy != 0.0:
            return math.atan2(dy, dx)
    return 0.0


def assign_partition(target_pos, target_heading: float, neighbor_pos, cfg: ConceptionConfig) -> PartitionAssignment:
    """Classify one neighbour position into right / left / rear.

    The bearing is measured from the target's heading; |bearing| <= fov/2 is
    the front cone, split Left (bearing > 0) / Right (bearing <= 0, so a
    neighbour dead ahead counts Right).  A neighbour coincident with the
    target is Rear with bearing recorded as 0.
    """
    dx = float(neighbor_pos[0]) - float(target_pos[0])
    dy = float(neighbor_pos[1]) - float(target_pos[1])
    if dx == 0.0 and dy == 0.0:
        return PartitionAssignment("", REAR, 0.0)
    phi = wrap_angle(math.atan2(dy, dx) - target_heading)
    if abs(phi) <= cfg.half_fov:
        return PartitionAssignment("", LEFT if phi > 0.0 else RIGHT, phi)
    return PartitionAssignment("", REAR, phi)


def partition_assignments(inst: PredictionInstance, groups: GroupSet, cfg: ConceptionConfig) -> list[PartitionAssignment]:
    """Partition labels for every non-group neighbour, at the last observed frame."""
    heading = moving_direction(inst.observed)
    target_pos = inst.observed[-1]
    out = []
    for agent_id, track in inst.neighbors.items():
        if agent_id in groups.member_ids:
            continue
        a = assign_partition(target_pos, heading, track[-1], cfg)
        out.append(PartitionAssignment(agent_id, a.partition, a.angle))
    return out


def conception_vector(inst: PredictionInstance, groups: GroupSet, cfg: ConceptionConfig) -> ConceptionVector:
    """Average the per-partition factors over eligible (non-group) neighbours.

    Empty partitions contribute zeros; with ``cfg.enabled`` false the whole
    vector is zero (ablation mode).
    """
    if not cfg.enabled:
        return ConceptionVector.zero()
    assignments = partition_assignments(inst, groups, cfg)
    heading = moving_direction(inst.observed)
    target_pos = inst.observed[-1]
    buckets: dict[str, list[str]] = {RIGHT: [], LEFT: [], REAR: []}
    for a in assignments:
        buckets[a.partition].append(a.agent_id)

    values = [0.0] * 7
    counts = []
    for part in (RIGHT, LEFT, REAR):
        ids = buckets[part]
        counts.append(len(ids))
        if not ids:
            continue
        slots = PARTITION_SLOTS[part]
        tracks = [inst.neighbors[a] for a in ids]
        dis = float(np.mean([np.linalg.norm(tr[-1] - target_pos) for tr in tracks]))
        values[slots[0]] = dis
        if part == REAR:
            continue
        dirs = [abs(wrap_angle(moving_direction(tr) - heading)) for tr in tracks]
        values[slots[1]] = float(np.mean(dirs))
        vels = [float(np.linalg.norm(tr[0] - tr[-1])) for tr in tracks]
        values[slots[2]] = float(np.mean(vels))
    return ConceptionVector(tuple(values), tuple(counts))


class FovConception(BaseEstimator, TransformerMixin):
    """Transformer mapping instances to their perception vectors.

    Group detection runs internally so that group members are excluded; pass
    ``group_enabled=False`` to treat every neighbour as unrelated.
    """

    def __init__(self, fov_degrees: float = 180.0, enabled: bool = True,
                 distance_threshold: float = 20.0, group_enabled: bool = True):
        self.fov_degrees = fov_degrees
        self.enabled = enabled
        self.distance_threshold = distance_threshold
        self.group_enabled = group_enabled

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> list[ConceptionVector]:
        ccfg = ConceptionConfig(self.fov_degrees, self.enabled)
        gcfg = GroupConfig(self.distance_threshold, self.group_enabled)
        return [conception_vector(inst, group_members(inst, gcfg), ccfg) for inst in X]
