"""HTTP review service: the human decision channel over the manifest.

JSON endpoints under /api plus static serving of the dataset files (scene
images and pre-rendered candidate overlays) and, when provided, the review
UI bundle. Decision writes are serialized through the manifest lock; an
optional ``expect_revision`` in the POST body turns a stale write into a 409
so the client can re-read (last accepted write wins).
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles

from .errors import DecisionConflict, InvalidChoice, UnknownScene
from .labeling import CANDIDATE_KINDS
from .manifest import VALID_CHOICES, Manifest

_FILTERS = ("all", "undecided", "decided", "rejected")


def _scene_summary(entry: dict) -> dict:
    record = entry["record"]
    counts = {}
    for kind in CANDIDATE_KINDS:
        cands = (entry.get("candidates") or {}).get(kind) or {}
        counts[kind] = len(cands.get("instances", []))
    return {
        "scene_id": record["scene_id"],
        "class_id": record["class_id"],
        "background_variant": record.get("background_variant", "dark"),
        "decision": entry.get("decision", "undecided"),
        "decision_source": entry.get("decision_source"),
        "revision": entry.get("revision", 0),
        "error": entry.get("error"),
        "instance_counts": counts,
    }


def _scene_detail(entry: dict) -> dict:
    record = entry["record"]
    image_path = record["image_path"]
    overlay_dir = str(Path(image_path).parent / "overlays")
    candidates = {}
    for kind in CANDIDATE_KINDS:
        cands = (entry.get("candidates") or {}).get(kind) or {}
        instances = cands.get("instances", [])
        areas = [inst["area"] for inst in instances]
        candidates[kind] = {
            "overlay_url": f"/files/{overlay_dir}/{kind}.png",
            "instance_count": len(instances),
            "areas": areas,
            "total_area": sum(areas),
            "degenerate": cands.get("degenerate", False),
        }
    payload = _scene_summary(entry)
    payload["image_url"] = f"/files/{image_path}"
    payload["candidates"] = candidates
    return payload


def create_app(
    manifest_path: str | Path,
    dataset_root: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    manifest_path = Path(manifest_path)
    root = Path(dataset_root) if dataset_root else manifest_path.parent
    store = Manifest.load(manifest_path)

    app = FastAPI(title="maskforge review")
    app.state.manifest = store

    @app.get("/api/scenes")
    def list_scenes(
        page: int = Query(1, ge=1),
        page_size: int = Query(50, ge=1, le=500),
        filter: str = Query("all"),
    ) -> dict:
        if filter not in _FILTERS:
            raise HTTPException(status_code=400, detail=f"filter must be one of {_FILTERS}")
        scenes = [_scene_summary(store.scene(sid)) for sid in store.scene_ids()]
        if filter == "undecided":
            scenes = [s for s in scenes if s["decision"] == "undecided"]
        elif filter == "rejected":
            scenes = [s for s in scenes if s["decision"] == "reject"]
        elif filter == "decided":
            scenes = [s for s in scenes if s["decision"] in CANDIDATE_KINDS]
        start = (page - 1) * page_size
        return {
            "scenes": scenes[start : start + page_size],
            "page": page,
            "page_size": page_size,
            "total": len(scenes),
            "filter": filter,
        }

    @app.get("/api/scenes/{scene_id}")
    def get_scene(scene_id: str) -> dict:
        try:
            return _scene_detail(store.scene(scene_id))
        except UnknownScene as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/api/scenes/{scene_id}/decision")
    def post_decision(scene_id: str, payload: dict = Body(...)) -> dict:
        choice = payload.get("choice")
        if choice not in VALID_CHOICES:
            raise HTTPException(
                status_code=400, detail=f"choice must be one of {VALID_CHOICES}"
            )
        expect = payload.get("expect_revision")
        try:
            store.set_decision(scene_id, choice, source="human", expect_revision=expect)
        except UnknownScene as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except InvalidChoice as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except DecisionConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return _scene_detail(store.scene(scene_id))

    @app.get("/api/progress")
    def progress() -> dict:
        return store.progress()

    app.mount("/files", StaticFiles(directory=str(root)), name="files")
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def serve_review(
    manifest_path: str | Path,
    port: int,
    host: str = "127.0.0.1",
    dataset_root: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> None:
    """Run the review service (blocking)."""
    import uvicorn

    app = create_app(manifest_path, dataset_root=dataset_root, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
