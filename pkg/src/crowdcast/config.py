"""Run configuration: JSON file -> validated settings -> forecaster/dataset."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .conception import ConceptionConfig
from .grouping import GroupConfig, scaled_threshold
from .model import TrajectoryForecaster
from .scene import Scene, WindowConfig, load_scene, sample_windows, synth_scene

# window parameters and sampling interval per dataset family
PRESETS = {
    "eth-ucy": {"n_past": 8, "n_future": 12, "interval_seconds": 0.4},
    "nba": {"n_past": 5, "n_future": 10, "interval_seconds": 0.4},
    "nuscenes": {"n_past": 4, "n_future": 12, "interval_seconds": 0.5},
}

_MODEL_KEYS = ("embed_dim", "model_dim", "encoder_layers", "decoder_layers", "heads",
               "n_modes", "ff_dim", "disable_group", "disable_conception")
_TRAINING_DEFAULTS = {"seed": 0, "epochs": 200, "batch_size": 1000, "learning_rate": 0.0002}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    window: WindowConfig = field(default_factory=WindowConfig)
    interval_seconds: float = 0.4
    preset: str | None = "eth-ucy"
    data: dict[str, str] = field(default_factory=dict)      # split name -> path or synth spec
    grouping: GroupConfig = field(default_factory=GroupConfig)
    conception: ConceptionConfig = field(default_factory=ConceptionConfig)
    model: dict = field(default_factory=dict)               # overrides for TrajectoryForecaster dims
    seed: int = 0
    epochs: int = 200
    batch_size: int = 1000
    learning_rate: float = 0.0002
    checkpoint: str = "model.ckpt"

    def forecaster(self, **overrides) -> TrajectoryForecaster:
        kwargs = dict(
            distance_threshold=self.grouping.distance_threshold,
            fov_degrees=self.conception.fov_degrees,
            n_past=self.window.n_past,
            n_future=self.window.n_future,
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            seed=self.seed,
        )
        kwargs.update(self.model)
        if not self.grouping.enabled:
            kwargs["disable_group"] = True
        if not self.conception.enabled:
            kwargs["disable_conception"] = True
        kwargs.update(overrides)
        return TrajectoryForecaster(**kwargs)

    def scenes(self, split: str) -> list[Scene]:
        if split not in self.data:
            raise ConfigError(f"data.{split}: no such split in config")
        return load_scene_source(self.data[split], self.interval_seconds)

    def instances(self, split: str):
        out = []
        for scene in self.scenes(split):
            out.extend(sample_windows(scene, self.window))
        return out


def load_scene_source(source: str, interval_seconds: float = 0.4) -> list[Scene]:
    """Load scenes from a file path or a ``synth:kind:agents:frames:seed[:count]`` spec."""
    if source.startswith("synth:"):
        parts = source.split(":")
        if len(parts) not in (5, 6):
            raise ConfigError(f"synthetic source {source!r} must be synth:kind:agents:frames:seed[:count]")
        _, kind, agents, frames, seed = parts[:5]
        count = int(parts[5]) if len(parts) == 6 else 1
        try:
            return [synth_scene(kind, int(agents), int(frames), int(seed) + i, interval_seconds)
                    for i in range(count)]
        except ValueError as exc:
            raise ConfigError(f"synthetic source {source!r}: {exc}") from None
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"dataset path does not exist: {path}")
    return [load_scene(path, interval_seconds=interval_seconds)]


def _reject_unknown(mapping: dict, allowed: set, path: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown field(s): {', '.join(sorted(path + '.' + u for u in unknown))}")


def _expect(mapping: dict, key: str, kind, path: str, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}{key}: required field is missing")
        return default
    value = mapping[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{path}{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"preset", "window", "interval_seconds", "data", "grouping", "conception",
             "model", "training", "checkpoint"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")

    preset = _expect(raw, "preset", str, "", default=None)
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    base = dict(PRESETS[preset]) if preset else dict(PRESETS["eth-ucy"])

    window_raw = _expect(raw, "window", dict, "", default={})
    _reject_unknown(window_raw, {"n_past", "n_future", "stride"}, "window")
    n_past = _expect(window_raw, "n_past", int, "window.", default=base["n_past"])
    n_future = _expect(window_raw, "n_future", int, "window.", default=base["n_future"])
    stride = _expect(window_raw, "stride", int, "window.", default=1)
    try:
        window = WindowConfig(n_past, n_future, stride)
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from None
    interval = _expect(raw, "interval_seconds", float, "", default=base["interval_seconds"])

    grouping_raw = _expect(raw, "grouping", dict, "", default={})
    _reject_unknown(grouping_raw, {"distance_threshold", "enabled"}, "grouping")
    threshold = _expect(grouping_raw, "distance_threshold", float, "grouping.",
                        default=scaled_threshold(n_past))
    group_enabled = _expect(grouping_raw, "enabled", bool, "grouping.", default=True)
    try:
        grouping = GroupConfig(threshold, group_enabled)
    except ValueError as exc:
        raise ConfigError(f"grouping: {exc}") from None

    conception_raw = _expect(raw, "conception", dict, "", default={})
    _reject_unknown(conception_raw, {"fov_degrees", "enabled"}, "conception")
    fov = _expect(conception_raw, "fov_degrees", float, "conception.", default=180.0)
    con_enabled = _expect(conception_raw, "enabled", bool, "conception.", default=True)
    try:
        conception = ConceptionConfig(fov, con_enabled)
    except ValueError as exc:
        raise ConfigError(f"conception: {exc}") from None

    model_raw = _expect(raw, "model", dict, "", default={})
    bad = set(model_raw) - set(_MODEL_KEYS)
    if bad:
        raise ConfigError(f"model: unknown field(s): {', '.join(sorted(bad))}")

    training_raw = _expect(raw, "training", dict, "", default={})
    bad = set(training_raw) - set(_TRAINING_DEFAULTS)
    if bad:
        raise ConfigError(f"training: unknown field(s): {', '.join(sorted(bad))}")
    training = dict(_TRAINING_DEFAULTS)
    for key in training_raw:
        kind = float if key == "learning_rate" else int
        training[key] = _expect(training_raw, key, kind, "training.")

    data_raw = _expect(raw, "data", dict, "", default={})
    for split, value in data_raw.items():
        if not isinstance(value, str):
            raise ConfigError(f"data.{split}: expected a path string")

    return RunConfig(
        window=window, interval_seconds=interval, preset=preset, data=dict(data_raw),
        grouping=grouping, conception=conception, model=dict(model_raw),
        checkpoint=_expect(raw, "checkpoint", str, "", default="model.ckpt"),
        **training,
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file does not exist: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON: {exc}") from None
    return parse_config(raw)
