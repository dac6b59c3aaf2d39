"""Annotation HTTP service.

Session model: a client opens a session on an image, adds or removes point
prompts one at a time, and each mutation re-runs the full label pipeline
over all session prompts. Responses carry a monotonically increasing
revision plus the new label (run-length encoded) so the client can render
without a second round trip.

Concurrency: mutations on one session are serialized by a per-session
lock; clients may additionally send the revision they based a mutation on
and get a 409 with the current revision when it is stale. Distinct
sessions never affect each other.
"""

from __future__ import annotations

import base64
import binascii
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .backends import BackendKind, ReferenceBackend
from .core import BinaryMask, Prompt, PromptSet, RasterImage
from .encoding import EnergyConfig
from .errors import ContractError, CoordinateError, LabelForgeError, TransportError
from .io import (
    DatasetManifest,
    image_from_png_bytes,
    image_png_bytes,
    load_image,
    mask_png_bytes,
    mask_to_rle,
    save_mask,
    write_prompt_csv,
)
from .pipeline import GenerateResult, generate_label
from .postprocess import PostprocessConfig


class SessionBody(BaseModel):
    image_id: str | None = None
    png_base64: str | None = None


class PromptBody(BaseModel):
    x: int
    y: int
    kind: str = "centroid"
    revision: int | None = None


class Session:
    """Mutable per-image annotation state; guard all access with .lock."""

    def __init__(self, session_id: str, image_id: str, image: RasterImage):
        self.session_id = session_id
        self.image_id = image_id
        self.image = image
        self.prompts: list[Prompt] = []
        self.revision = 0
        self.last_result: GenerateResult | None = None
        self.finalized = False
        self.lock = threading.Lock()

    def prompt_set(self) -> PromptSet:
        return PromptSet(image_id=self.image_id, prompts=tuple(self.prompts))

    def current_label(self) -> BinaryMask:
        if self.last_result is not None:
            return self.last_result.label
        return BinaryMask(np.zeros((self.image.height, self.image.width), dtype=np.uint8))


def create_app(
    manifest: DatasetManifest | None = None,
    backend: BackendKind | None = None,
    energy_cfg: EnergyConfig | None = None,
    post_cfg: PostprocessConfig | None = None,
    out_dir: str | Path = "out",
    ui_dir: str | Path | None = None,
) -> FastAPI:
    backend = backend or ReferenceBackend()
    energy_cfg = energy_cfg or EnergyConfig()
    post_cfg = post_cfg or PostprocessConfig()
    out_path = Path(out_dir)

    app = FastAPI(title="labelforge annotation service")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(TransportError)
    async def _transport_error(request, exc: TransportError):
        detail = {"message": str(exc), "endpoint": exc.endpoint, "attempts": exc.attempts}
        return JSONResponse(status_code=502, content={"detail": detail})

    @app.exception_handler(ContractError)
    async def _contract_error(request, exc: ContractError):
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    @app.exception_handler(LabelForgeError)
    async def _validation_error(request, exc: LabelForgeError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def get_session(session_id: str) -> Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def mutation_response(session: Session, result: GenerateResult) -> dict:
        return {
            "revision": session.revision,
            "label": mask_to_rle(result.label),
            "clusters": result.cluster_summaries(),
        }

    def check_revision(session: Session, sent: int | None) -> None:
        if sent is not None and sent != session.revision:
            raise HTTPException(
                status_code=409,
                detail={
                    "message": f"revision {sent} is stale",
                    "revision": session.revision,
                },
            )

    @app.get("/v1/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/v1/images")
    def list_images():
        ids = manifest.ids() if manifest is not None else []
        return {"images": ids}

    @app.post("/v1/sessions", status_code=201)
    def open_session(body: SessionBody):
        if body.png_base64 is not None:
            try:
                png = base64.b64decode(body.png_base64, validate=True)
            except (binascii.Error, ValueError) as e:
                raise HTTPException(status_code=422, detail=f"invalid base64 PNG: {e}")
            image = image_from_png_bytes(png)
            token = uuid.uuid4().hex
            image_id = body.image_id or f"upload-{token[:8]}"
        elif body.image_id is not None:
            if manifest is None:
                raise HTTPException(
                    status_code=422,
                    detail="service has no manifest; open sessions with png_base64",
                )
            try:
                entry = manifest.image(body.image_id)
            except KeyError:
                raise HTTPException(
                    status_code=404, detail=f"unknown image_id {body.image_id!r}"
                )
            image = load_image(entry.image_path)
            token = uuid.uuid4().hex
            image_id = body.image_id
        else:
            raise HTTPException(status_code=422, detail="provide image_id or png_base64")

        session = Session(session_id=token, image_id=image_id, image=image)
        with registry_lock:
            sessions[token] = session
        return {
            "session_id": token,
            "image_id": image_id,
            "width": image.width,
            "height": image.height,
            "revision": 0,
        }

    @app.get("/v1/sessions/{session_id}")
    def session_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "image_id": session.image_id,
                "width": session.image.width,
                "height": session.image.height,
                "revision": session.revision,
                "prompts": [{"x": p.x, "y": p.y, "kind": p.kind} for p in session.prompts],
                "finalized": session.finalized,
            }

    @app.post("/v1/sessions/{session_id}/prompts")
    def add_prompt(session_id: str, body: PromptBody):
        session = get_session(session_id)
        with session.lock:
            check_revision(session, body.revision)
            try:
                prompt = Prompt(x=body.x, y=body.y, kind=body.kind)
                prompt.check_bounds(session.image.width, session.image.height)
                prompts = PromptSet(
                    image_id=session.image_id, prompts=(*session.prompts, prompt)
                )
            except CoordinateError as e:
                raise HTTPException(
                    status_code=422,
                    detail={"message": str(e), "x": body.x, "y": body.y},
                )
            except ValueError as e:
                raise HTTPException(status_code=422, detail=str(e))
            result = generate_label(session.image, prompts, backend, energy_cfg, post_cfg)
            # state changes only after the pipeline succeeded
            session.prompts.append(prompt)
            session.revision += 1
            session.last_result = result
            return mutation_response(session, result)

    @app.delete("/v1/sessions/{session_id}/prompts/last")
    def undo_prompt(session_id: str, revision: int | None = None):
        session = get_session(session_id)
        with session.lock:
            check_revision(session, revision)
            if not session.prompts:
                raise HTTPException(status_code=422, detail="no prompts to undo")
            prompts = PromptSet(
                image_id=session.image_id, prompts=tuple(session.prompts[:-1])
            )
            result = generate_label(session.image, prompts, backend, energy_cfg, post_cfg)
            session.prompts.pop()
            session.revision += 1
            session.last_result = result
            return mutation_response(session, result)

    @app.get("/v1/sessions/{session_id}/label.png")
    def label_png(session_id: str):
        session = get_session(session_id)
        with session.lock:
            payload = mask_png_bytes(session.current_label())
        return Response(content=payload, media_type="image/png")

    @app.get("/v1/sessions/{session_id}/image.png")
    def image_png(session_id: str):
        session = get_session(session_id)
        return Response(content=image_png_bytes(session.image), media_type="image/png")

    @app.post("/v1/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        session = get_session(session_id)
        with session.lock:
            labels_dir = out_path / "labels"
            labels_dir.mkdir(parents=True, exist_ok=True)
            label_path = labels_dir / f"{session.image_id}.png"
            save_mask(session.current_label(), label_path)
            prompts_path = out_path / "prompts.csv"
            write_prompt_csv([session.prompt_set()], prompts_path, append=True)
            session.finalized = True
            return {
                "label_path": str(label_path),
                "prompts_path": str(prompts_path),
                "revision": session.revision,
            }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(app: FastAPI, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
