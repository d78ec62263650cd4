"""Checkpoint container: named parameter tensors + Adam state + config hash."""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .tensor import Parameter

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def save_checkpoint(path, params: list[Parameter], config: dict, extra: dict | None = None) -> None:
    arrays = {}
    for p in params:
        if not p.name:
            raise CheckpointError("all parameters must be named to checkpoint")
        arrays[f"param:{p.name}"] = p.data
        arrays[f"adam_m:{p.name}"] = p.m
        arrays[f"adam_v:{p.name}"] = p.v
    meta = {
        "version": FORMAT_VERSION,
        "config": config,
        "config_hash": config_hash(config),
        "steps": {p.name: p.step for p in params},
        "extra": extra or {},
    }
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_checkpoint(path, expected_config_hash: str | None = None) -> dict:
    """Load the container; returns {"config", "params", "adam_m", "adam_v", "steps", "extra"}.

    Rejects files whose embedded config hash does not match ``expected_config_hash``.
    """
    with np.load(path) as blob:
        try:
            meta = json.loads(bytes(blob["meta"]).decode())
        except KeyError:
            raise CheckpointError(f"{path}: not a checkpoint (missing metadata)") from None
        if meta.get("version") != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {meta.get('version')}")
        stored_hash = meta["config_hash"]
        if config_hash(meta["config"]) != stored_hash:
            raise CheckpointError(f"{path}: corrupted metadata (config hash mismatch)")
        if expected_config_hash is not None and stored_hash != expected_config_hash:
            raise CheckpointError(
                f"{path}: checkpoint config hash {stored_hash[:12]}... does not match "
                f"expected {expected_config_hash[:12]}..."
            )
        out = {"config": meta["config"], "config_hash": stored_hash,
               "steps": meta["steps"], "extra": meta["extra"],
               "params": {}, "adam_m": {}, "adam_v": {}}
        for key in blob.files:
            if key == "meta":
                continue
            kind, name = key.split(":", 1)
            {"param": out["params"], "adam_m": out["adam_m"], "adam_v": out["adam_v"]}[kind][name] = blob[key]
    return out


def restore_parameters(params: list[Parameter], loaded: dict) -> None:
    """Copy loaded values/optimizer state into live parameters by name."""
    for p in params:
        if p.name not in loaded["params"]:
            raise CheckpointError(f"checkpoint is missing parameter {p.name!r}")
        saved = loaded["params"][p.name]
        if saved.shape != p.data.shape:
            raise CheckpointError(f"parameter {p.name!r}: shape {saved.shape} != {p.data.shape}")
        p.data = saved.astype(np.float64).copy()
        p.m = loaded["adam_m"][p.name].astype(np.float64).copy()
        p.v = loaded["adam_v"][p.name].astype(np.float64).copy()
        p.step = int(loaded["steps"][p.name])
        p.grad = None
