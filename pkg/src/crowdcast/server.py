"""JSON-over-HTTP serving: scene listing, instance listing, what-if prediction.

The server holds one immutable model snapshot plus the loaded scenes; every
request is pure against that snapshot, so identical requests produce
byte-identical responses.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .evaluation import RoleConstraintError, SceneEdit, analysis_reports, apply_edits
from .model import TrajectoryForecaster
from .scene import AgentTrack, Scene, WindowConfig, instance_at
from .conception import partition_assignments

DEFAULT_ADDR = "127.0.0.1:8477"
ADDR_ENV_VAR = "CROWDCAST_ADDR"


class EditBody(BaseModel):
    role: str = Field(pattern="^(neighbor|group-member)$")
    track: list[tuple[float, float]]
    agent_id: str | None = None


class PredictBody(BaseModel):
    target_id: str
    scene_id: str | None = None
    tracks: dict[str, list[tuple[float, float, float]]] | None = None  # agent -> [frame, x, y]
    window_start: int = 0
    edits: list[EditBody] = Field(default_factory=list)


@dataclass
class Snapshot:
    """Everything a server process serves from; read-only after startup."""

    model: TrajectoryForecaster
    scenes: dict[str, Scene]
    window: WindowConfig


def _scene_from_inline(tracks: dict, interval_seconds: float = 0.4) -> Scene:
    built = {}
    for agent_id, rows in tracks.items():
        rows = sorted(rows, key=lambda r: r[0])
        frames = tuple(int(r[0]) for r in rows)
        built[agent_id] = AgentTrack(agent_id, frames, np.array([(r[1], r[2]) for r in rows]))
    frames = tuple(sorted({f for t in built.values() for f in t.frames}))
    return Scene("inline", frames, dict(sorted(built.items())), interval_seconds)


def _points(arr) -> list[list[float]]:
    return np.asarray(arr, dtype=np.float64).tolist()


def list_instances(scene: Scene, window: WindowConfig) -> list[dict]:
    """All (target, window start) pairs with a complete observed window."""
    out = []
    frames = scene.frames
    for start in range(0, max(len(frames) - window.n_past + 1, 0), window.stride):
        obs_frames = frames[start:start + window.n_past]
        fut_frames = frames[start + window.n_past:start + window.n_past + window.n_future]
        for agent_id in sorted(scene.tracks):
            have = set(scene.tracks[agent_id].frames)
            if not all(f in have for f in obs_frames):
                continue
            has_future = len(fut_frames) == window.n_future and all(f in have for f in fut_frames)
            out.append({"target_id": agent_id, "window_start": start, "has_future": has_future})
    return out


def create_app(snapshot: Snapshot) -> FastAPI:
    app = FastAPI(title="crowdcast", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        path = ".".join(str(p) for p in first.get("loc", ()) if p != "body")
        return JSONResponse(status_code=400,
                            content={"error": f"malformed request: {first.get('msg', 'invalid')}",
                                     "field": path or "body"})

    @app.get("/health")
    def health():
        return {"status": "ok", "scenes": len(snapshot.scenes),
                "window": {"n_past": snapshot.window.n_past, "n_future": snapshot.window.n_future},
                "model": {"config_hash": snapshot.model.checkpoint_hash(),
                          "n_modes": snapshot.model.n_modes}}

    @app.get("/scenes")
    def scenes():
        return {"scenes": [
            {"id": scene.id, "agents": sorted(scene.tracks), "frames": len(scene.frames),
             "interval_seconds": scene.interval_seconds}
            for scene in snapshot.scenes.values()
        ]}

    @app.get("/scenes/{scene_id}/instances")
    def scene_instances(scene_id: str):
        scene = snapshot.scenes.get(scene_id)
        if scene is None:
            return JSONResponse(status_code=404, content={"error": f"unknown scene: {scene_id!r}"})
        return {"scene_id": scene_id, "instances": list_instances(scene, snapshot.window)}

    @app.get("/scenes/{scene_id}/tracks")
    def scene_tracks(scene_id: str):
        scene = snapshot.scenes.get(scene_id)
        if scene is None:
            return JSONResponse(status_code=404, content={"error": f"unknown scene: {scene_id!r}"})
        return {"scene_id": scene_id,
                "frames": list(scene.frames),
                "tracks": {a: {"frames": list(t.frames), "points": _points(t.points)}
                           for a, t in scene.tracks.items()}}

    @app.post("/predict")
    def predict(body: PredictBody):
        if body.tracks:
            scene = _scene_from_inline(body.tracks)
        elif body.scene_id is not None:
            scene = snapshot.scenes.get(body.scene_id)
            if scene is None:
                return JSONResponse(status_code=404, content={"error": f"unknown scene: {body.scene_id!r}"})
        else:
            return JSONResponse(status_code=400,
                                content={"error": "request needs scene_id or inline tracks",
                                         "field": "scene_id"})
        try:
            inst = instance_at(scene, body.target_id, body.window_start, snapshot.window)
        except KeyError as exc:
            return JSONResponse(status_code=404, content={"error": str(exc.args[0])})
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc), "field": "window_start"})

        edits = [SceneEdit(e.role, np.asarray(e.track, dtype=np.float64), e.agent_id or f"edit-{i}")
                 for i, e in enumerate(body.edits)]
        try:
            edited = apply_edits(inst, edits, snapshot.model.distance_threshold)
        except RoleConstraintError as exc:
            return JSONResponse(status_code=422, content={"error": str(exc),
                                                          "distance_threshold": snapshot.model.distance_threshold})
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc), "field": "edits"})

        pset = snapshot.model.forward(edited)
        contribution, attention = analysis_reports(snapshot.model, pset)
        norm = snapshot.model.encode([edited])[0].instance
        assignments = partition_assignments(norm, pset.groups, snapshot.model.conception_config())
        return {
            "target": {
                "scene_id": scene.id, "target_id": body.target_id,
                "window_start": body.window_start,
                "observed": _points(inst.observed),
                "future_truth": None if inst.future_truth is None else _points(inst.future_truth),
            },
            "candidates": [_points(c) for c in pset.trajectories],
            "linear_fit": _points(pset.linear_fit),
            "group": {
                "member_ids": sorted(pset.groups.member_ids),
                "distances": {a: float(d) for a, d in sorted(pset.groups.distances.items())},
                "distance_threshold": snapshot.model.distance_threshold,
            },
            "conception": {
                "values": list(pset.conception.values),
                "counts": list(pset.conception.counts),
                "partitions": {a.agent_id: {"partition": a.partition, "angle": a.angle}
                               for a in assignments},
            },
            "attention": attention.as_dict(),
            "contribution": contribution.as_dict(),
        }

    ui_dir = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def resolve_address(flag_value: str | None = None) -> tuple[str, int]:
    addr = flag_value or os.environ.get(ADDR_ENV_VAR) or DEFAULT_ADDR
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"listen address must be host:port, got {addr!r}")
    return host, int(port)


def serve(snapshot: Snapshot, addr: str | None = None):
    import uvicorn

    host, port = resolve_address(addr)
    uvicorn.run(create_app(snapshot), host=host, port=port, log_level="info")
