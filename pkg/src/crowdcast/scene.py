"""Scene ingestion, windowing, normalization and synthetic-scene generation.

A scene is a set of per-agent tracks sampled on a shared frame grid.  The
windowing step cuts it into prediction instances: one target agent's observed
past, the co-present neighbours' pasts, and (when available) the target's
ground-truth future.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .validation import as_points, check_positive, frozen

SYNTH_KINDS = ("constant-velocity", "group-pair", "crossing", "stationary-crowd")


class SceneParseError(ValueError):
    """Raised when a scene file cannot be parsed; carries the line number."""


@dataclass(frozen=True)
class AgentTrack:
    """One agent's time-stamped 2-D positions, sorted by frame id."""

    agent_id: str
    frames: tuple[int, ...]
    points: np.ndarray  # (len(frames), 2) float64

    def __post_init__(self):
        if list(self.frames) != sorted(set(self.frames)):
            raise ValueError(f"track {self.agent_id}: frame ids must be strictly increasing")
        object.__setattr__(self, "points", frozen(as_points(self.points, len(self.frames), f"track {self.agent_id}")))

    def position_at(self, frame: int) -> np.ndarray:
        return self.points[self.frames.index(frame)]


@dataclass(frozen=True)
class Scene:
    """A recording: shared frame grid plus one track per agent."""

    id: str
    frames: tuple[int, ...]
    tracks: dict[str, AgentTrack]
    interval_seconds: float = 0.4

    def __post_init__(self):
        if not self.tracks:
            raise ValueError(f"scene {self.id}: needs at least one track")
        if list(self.frames) != sorted(set(self.frames)):
            raise ValueError(f"scene {self.id}: frame ids must be strictly increasing")
        check_positive(self.interval_seconds, "interval_seconds")
        grid = set(self.frames)
        for track in self.tracks.values():
            if not set(track.frames) <= grid:
                raise ValueError(f"scene {self.id}: track {track.agent_id} has frames outside the scene grid")

    @property
    def n_agents(self) -> int:
        return len(self.tracks)


@dataclass(frozen=True)
class WindowConfig:
    """Observation/prediction window sizes, in sampled frames."""

    n_past: int = 8
    n_future: int = 12
    stride: int = 1

    def __post_init__(self):
        if self.n_past < 2:
            raise ValueError("n_past must be >= 2 (moving direction needs two frames)")
        check_positive(self.n_future, "n_future")
        check_positive(self.stride, "stride")


@dataclass(frozen=True)
class PredictionInstance:
    """One target agent's observation window plus co-present neighbours.

    ``origin_offset`` is the translation that has been added to every
    coordinate during normalization (None while un-normalized).  After
    normalization the target's last observed point is exactly (0, 0).
    """

    target_id: str
    observed: np.ndarray                 # (n_past, 2)
    neighbors: dict[str, np.ndarray]     # agent id -> (n_past, 2)
    future_truth: np.ndarray | None = None   # (n_future, 2)
    origin_offset: np.ndarray | None = None  # (2,)
    scene_id: str = ""
    window_start: int = 0
    # set by normalize_instance so denormalization is bit-exact
    raw_source: "PredictionInstance | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "observed", frozen(as_points(self.observed, name="observed")))
        n_p = self.observed.shape[0]
        object.__setattr__(
            self,
            "neighbors",
            {a: frozen(as_points(p, n_p, f"neighbor {a}")) for a, p in sorted(self.neighbors.items())},
        )
        if self.future_truth is not None:
            object.__setattr__(self, "future_truth", frozen(as_points(self.future_truth, name="future_truth")))
        if self.origin_offset is not None:
            off = np.asarray(self.origin_offset, dtype=np.float64).reshape(2)
            object.__setattr__(self, "origin_offset", frozen(off))

    @property
    def n_past(self) -> int:
        return self.observed.shape[0]

    @property
    def normalized(self) -> bool:
        return self.origin_offset is not None


def load_scene(path, scene_id: str | None = None, interval_seconds: float = 0.4, format: str = "frame-table") -> Scene:
    """Load a scene from a whitespace-separated ``frame_id agent_id x y`` table.

    Lines starting with '#' are ignored.  Raises SceneParseError naming the
    offending line, ValueError("empty scene ...") when no records remain.
    """
    if format != "frame-table":
        raise ValueError(f"unknown scene format: {format!r}")
    rows: dict[str, list[tuple[int, float, float]]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) != 4:
                raise SceneParseError(f"{path}: line {lineno}: expected 4 fields, got {len(fields)}")
            try:
                frame = int(float(fields[0]))
                x, y = float(fields[2]), float(fields[3])
            except ValueError as exc:
                raise SceneParseError(f"{path}: line {lineno}: {exc}") from None
            rows.setdefault(fields[1], []).append((frame, x, y))
    if not rows:
        raise ValueError(f"empty scene: no records in {path}")
    tracks = {}
    for agent_id, recs in rows.items():
        recs.sort(key=lambda r: r[0])
        frames = tuple(r[0] for r in recs)
        if len(set(frames)) != len(frames):
            raise SceneParseError(f"{path}: duplicate frame for agent {agent_id}")
        tracks[agent_id] = AgentTrack(agent_id, frames, np.array([(r[1], r[2]) for r in recs]))
    all_frames = tuple(sorted({f for t in tracks.values() for f in t.frames}))
    return Scene(scene_id or str(path), all_frames, dict(sorted(tracks.items())), interval_seconds)


def save_scene(scene: Scene, path, precision: int = 9) -> None:
    """Write a scene back out in the 4-column frame-table format.

    ``precision`` is the number of significant digits; use 17 for a
    bit-exact load/save round-trip.
    """
    fmt = f"%.{precision}g"
    with open(path, "w") as fh:
        for agent_id in sorted(scene.tracks):
            track = scene.tracks[agent_id]
            for frame, (x, y) in zip(track.frames, track.points):
                fh.write(f"{frame} {agent_id} {fmt % x} {fmt % y}\n")


def _frame_index(track: AgentTrack) -> dict[int, int]:
    return {f: i for i, f in enumerate(track.frames)}


def sample_windows(scene: Scene, cfg: WindowConfig) -> list[PredictionInstance]:
    """Cut a scene into un-normalized prediction instances.

    A window yields an instance for agent ``a`` when ``a`` is present at all
    n_past + n_future consecutive sampled frames; neighbours are the agents
    present for all n_past observed frames.  Agents with gaps are skipped,
    not interpolated.  Output is ordered by agent id, then window start.
    """
    frames = scene.frames
    total = cfg.n_past + cfg.n_future
    starts = range(0, max(len(frames) - total + 1, 0), cfg.stride)
    indices = {a: _frame_index(t) for a, t in scene.tracks.items()}
    out: list[PredictionInstance] = []
    for agent_id in sorted(scene.tracks):
        track = scene.tracks[agent_id]
        idx = indices[agent_id]
        for s in starts:
            window = frames[s:s + total]
            if any(f not in idx for f in window):
                continue
            observed_frames = window[:cfg.n_past]
            observed = track.points[[idx[f] for f in observed_frames]]
            future = track.points[[idx[f] for f in window[cfg.n_past:]]]
            neighbors = {}
            for other_id, other in scene.tracks.items():
                if other_id == agent_id:
                    continue
                oidx = indices[other_id]
                if all(f in oidx for f in observed_frames):
                    neighbors[other_id] = other.points[[oidx[f] for f in observed_frames]]
            out.append(PredictionInstance(
                target_id=agent_id, observed=observed, neighbors=neighbors,
                future_truth=future, scene_id=scene.id, window_start=s,
            ))
    return out


def instance_at(scene: Scene, target_id: str, window_start: int, cfg: WindowConfig,
                require_future: bool = False) -> PredictionInstance:
    """Build the instance for one (target, window start), future optional.

    Serving path: the observed window must be fully present; the future part
    is attached only when the scene still covers it.
    """
    if target_id not in scene.tracks:
        raise KeyError(f"unknown target agent: {target_id!r}")
    frames = scene.frames
    if window_start < 0 or window_start + cfg.n_past > len(frames):
        raise ValueError(f"window start {window_start} out of range for {len(frames)} frames")
    track = scene.tracks[target_id]
    idx = _frame_index(track)
    observed_frames = frames[window_start:window_start + cfg.n_past]
    if any(f not in idx for f in observed_frames):
        raise ValueError(f"target {target_id!r} is not present over the full observed window")
    observed = track.points[[idx[f] for f in observed_frames]]
    future = None
    future_frames = frames[window_start + cfg.n_past:window_start + cfg.n_past + cfg.n_future]
    if len(future_frames) == cfg.n_future and all(f in idx for f in future_frames):
        future = track.points[[idx[f] for f in future_frames]]
    if require_future and future is None:
        raise ValueError(f"target {target_id!r} has no complete future window at start {window_start}")
    neighbors = {}
    for other_id, other in scene.tracks.items():
        if other_id == target_id:
            continue
        oidx = _frame_index(other)
        if all(f in oidx for f in observed_frames):
            neighbors[other_id] = other.points[[oidx[f] for f in observed_frames]]
    return PredictionInstance(target_id=target_id, observed=observed, neighbors=neighbors,
                              future_truth=future, scene_id=scene.id, window_start=window_start)


def normalize_instance(inst: PredictionInstance) -> PredictionInstance:
    """Translate all coordinates so the target's last observed point is (0, 0).

    The applied translation is recorded in ``origin_offset``.  Already
    normalized instances pass through unchanged.
    """
    if inst.normalized:
        return inst
    offset = -inst.observed[-1]
    moved = replace(
        inst,
        observed=inst.observed + offset,
        neighbors={a: p + offset for a, p in inst.neighbors.items()},
        future_truth=None if inst.future_truth is None else inst.future_truth + offset,
        origin_offset=offset,
        raw_source=inst,
    )
    # guarantee the invariant exactly: x + (-x) == 0 in IEEE754
    assert moved.observed[-1, 0] == 0.0 and moved.observed[-1, 1] == 0.0
    return moved


def denormalize_instance(inst: PredictionInstance) -> PredictionInstance:
    """Invert normalize_instance; bit-exact when the source is still attached."""
    if not inst.normalized:
        return inst
    if inst.raw_source is not None:
        return inst.raw_source
    offset = inst.origin_offset
    return replace(
        inst,
        observed=inst.observed - offset,
        neighbors={a: p - offset for a, p in inst.neighbors.items()},
        future_truth=None if inst.future_truth is None else inst.future_truth - offset,
        origin_offset=None,
    )


def denormalize_points(points: np.ndarray, inst: PredictionInstance) -> np.ndarray:
    """Map model-frame points back into the instance's original scene frame."""
    if not inst.normalized:
        return np.array(points, dtype=np.float64)
    return np.asarray(points, dtype=np.float64) - inst.origin_offset


def synth_scene(kind: str, n_agents: int, n_frames: int, seed: int,
                interval_seconds: float = 0.4) -> Scene:
    """Generate a deterministic synthetic scene.

    Kinds:
      constant-velocity  straight lines, random headings and speeds
      group-pair         pairs walking side by side (offset <= 1 unit); the
                         first agent of each pair turns once around the first
                         quarter of the span and its partner mirrors the turn
                         a fifth of the span later
      crossing           two streams with intersecting headings
      stationary-crowd   jittered fixed positions
    """
    if kind not in SYNTH_KINDS:
        raise ValueError(f"unknown synthetic scene kind: {kind!r}")
    check_positive(n_agents, "n_agents")
    check_positive(n_frames, "n_frames")
    rng = np.random.default_rng(seed)
    frames = tuple(range(n_frames))
    tracks: dict[str, AgentTrack] = {}

    def add(agent_id, pts):
        tracks[agent_id] = AgentTrack(agent_id, frames, np.asarray(pts))

    if kind == "constant-velocity":
        for i in range(n_agents):
            heading = rng.uniform(0, 2 * math.pi)
            speed = rng.uniform(0.05, 0.25)
            start = rng.uniform(-10, 10, size=2)
            step = speed * np.array([math.cos(heading), math.sin(heading)])
            add(f"cv{i}", start + np.outer(np.arange(n_frames), step))
    elif kind == "group-pair":
        n_pairs = (n_agents + 1) // 2
        turn_frame_base = max(2, round(0.25 * n_frames))
        lag = max(2, round(0.2 * n_frames))
        for p in range(n_pairs):
            heading = rng.uniform(0, 2 * math.pi)
            speed = rng.uniform(0.05, 0.09)
            lateral = rng.uniform(0.25, 0.45)
            turn = rng.uniform(math.pi / 9, math.pi / 2) * rng.choice([-1.0, 1.0])
            leader_turn_frame = turn_frame_base + int(rng.integers(-1, 2))
            center = np.array([(p % 4) * 18.0 - 27.0, (p // 4) * 18.0 - 9.0]) + rng.uniform(-1, 1, size=2)
            for member in range(2):
                if 2 * p + member >= n_agents:
                    break
                turn_frame = leader_turn_frame + (lag if member else 0)
                side = lateral / 2 * (1 if member else -1)
                perp = np.array([-math.sin(heading), math.cos(heading)])
                pos = center + side * perp
                pts = [pos.copy()]
                h = heading
                for f in range(1, n_frames):
                    if f == turn_frame:
                        h += turn
                    pos = pos + speed * np.array([math.cos(h), math.sin(h)])
                    pts.append(pos.copy())
                add(f"pair{p}{'ab'[member]}", pts)
    elif kind == "crossing":
        base = rng.uniform(0, 2 * math.pi)
        headings = (base, base + math.pi / 2)
        for i in range(n_agents):
            h = headings[i % 2]
            speed = rng.uniform(0.08, 0.2)
            back = -speed * n_frames / 2
            offset = rng.uniform(-2, 2)
            perp = np.array([-math.sin(h), math.cos(h)])
            start = back * np.array([math.cos(h), math.sin(h)]) + offset * perp
            step = speed * np.array([math.cos(h), math.sin(h)])
            add(f"x{i}", start + np.outer(np.arange(n_frames), step))
    else:  # stationary-crowd
        for i in range(n_agents):
            base = rng.uniform(-5, 5, size=2)
            jitter = rng.normal(0, 0.01, size=(n_frames, 2))
            add(f"s{i}", base + jitter)

    return Scene(f"{kind}-{seed}", frames, dict(sorted(tracks.items())), interval_seconds)
