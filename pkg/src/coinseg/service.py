"""Local HTTP facade for interactive segmentation.

Sessions live in process memory. A session holds one uploaded image, the
prototype pixels clicked so far, the current engine config, and optionally
a gold mask for live scoring. Nothing persists across restarts and there
is no authentication; this binds to localhost for a single user.

Routes (JSON unless noted):

    POST   /sessions                      raw image bytes -> 201 {session_id,...}
    GET    /sessions/{id}                 state summary
    POST   /sessions/{id}/gold            raw mask PNG for scoring
    POST   /sessions/{id}/prototypes      {"row": r, "col": c}
    DELETE /sessions/{id}/prototypes/{k}  drop by index
    POST   /sessions/{id}/segment         partial config -> mask + stats
    GET    /sessions/{id}/export          prototypes + config, CLI-ready
    GET    /ui/...                        static UI files when configured

Handlers are async on a single event loop, so requests touching one
session are naturally serialized; responses depend only on session state.
The mask PNG in a segment response is byte-identical to what the command
line writes for the same image, prototypes, and config.
"""

from __future__ import annotations

import base64
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict

from .evalsweep import UndefinedClassError, balanced_accuracy, confusion
from .imagekit import RasterImage, decode_image, decode_mask, encode_mask_png
from .segmenter import SegmenterConfig, score_map, train

__all__ = ["create_app"]


@dataclass
class _Session:
    image: RasterImage
    prototypes: list = field(default_factory=list)
    config: SegmenterConfig = field(default_factory=SegmenterConfig)
    gold: np.ndarray | None = None
    last_mask: np.ndarray | None = None
    last_ba: float | None = None


class PrototypeIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    row: int
    col: int


class SegmentIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    selectivity: float | None = None
    threshold: float | None = None
    radius: int | None = None
    decay: float | None = None


def create_app(ui_dir=None) -> FastAPI:
    """Build the app. ui_dir, when given, is served read-only at /ui."""
    app = FastAPI(title="coinseg service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, _Session] = {}
    app.state.sessions = sessions

    def _get(sid: str) -> _Session:
        sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(status_code=404, detail=f"no session {sid!r}")
        return sess

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        data = await request.body()
        try:
            img = decode_image(data)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        sid = uuid.uuid4().hex[:16]
        sessions[sid] = _Session(image=img)
        return {
            "session_id": sid,
            "width": img.width,
            "height": img.height,
            "channels": img.channels,
            "config": sessions[sid].config.to_dict(),
        }

    @app.get("/sessions/{sid}")
    async def session_state(sid: str):
        sess = _get(sid)
        return {
            "session_id": sid,
            "width": sess.image.width,
            "height": sess.image.height,
            "channels": sess.image.channels,
            "prototypes": [list(p) for p in sess.prototypes],
            "config": sess.config.to_dict(),
            "has_gold": sess.gold is not None,
            "ba": sess.last_ba,
        }

    @app.post("/sessions/{sid}/gold")
    async def upload_gold(sid: str, request: Request):
        sess = _get(sid)
        data = await request.body()
        try:
            mask = decode_mask(data)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if mask.shape != (sess.image.height, sess.image.width):
            raise HTTPException(
                status_code=422,
                detail=f"gold is {mask.shape[1]}x{mask.shape[0]}, image is "
                       f"{sess.image.width}x{sess.image.height}",
            )
        sess.gold = mask
        return {"has_gold": True}

    @app.post("/sessions/{sid}/prototypes")
    async def add_prototype(sid: str, body: PrototypeIn):
        sess = _get(sid)
        img = sess.image
        if not (0 <= body.row < img.height and 0 <= body.col < img.width):
            raise HTTPException(
                status_code=422,
                detail=f"({body.row}, {body.col}) outside "
                       f"{img.height}x{img.width} image",
            )
        sess.prototypes.append((body.row, body.col))
        return {"prototypes": [list(p) for p in sess.prototypes]}

    @app.delete("/sessions/{sid}/prototypes/{index}")
    async def delete_prototype(sid: str, index: int):
        sess = _get(sid)
        if not (0 <= index < len(sess.prototypes)):
            raise HTTPException(
                status_code=422,
                detail=f"index {index} out of range for "
                       f"{len(sess.prototypes)} prototype(s)",
            )
        sess.prototypes.pop(index)
        return {"prototypes": [list(p) for p in sess.prototypes]}

    @app.post("/sessions/{sid}/segment")
    async def segment_session(sid: str, body: SegmentIn):
        sess = _get(sid)
        if not sess.prototypes:
            raise HTTPException(status_code=409, detail="no prototypes yet")
        overrides = {k: v for k, v in body.model_dump().items() if v is not None}
        try:
            cfg = SegmenterConfig.from_dict(overrides, base=sess.config)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        bank = train(sess.image, sess.prototypes, cfg)
        scores = score_map(bank, sess.image)
        mask = (scores >= cfg.threshold).astype(np.uint8)
        ba = None
        ba_note = None
        if sess.gold is not None:
            try:
                ba = balanced_accuracy(confusion(mask, sess.gold))
            except UndefinedClassError as exc:
                ba_note = str(exc)
        sess.config = cfg
        sess.last_mask = mask
        sess.last_ba = ba
        return {
            "mask_png": base64.b64encode(encode_mask_png(mask)).decode("ascii"),
            "width": sess.image.width,
            "height": sess.image.height,
            "score_stats": {
                "min": float(scores.min()),
                "max": float(scores.max()),
                "mean": float(scores.mean()),
            },
            "object_pixels": int(mask.sum()),
            "ba": ba,
            "ba_note": ba_note,
            "config": cfg.to_dict(),
            "prototypes": [list(p) for p in sess.prototypes],
        }

    @app.get("/sessions/{sid}/export")
    async def export_session(sid: str):
        sess = _get(sid)
        return {
            "prototypes": [list(p) for p in sess.prototypes],
            "config": sess.config.to_dict(),
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
