"""Batch orchestration: ties the labeler, composer, relighter and dataset
I/O together for the CLI. Scene-level work parallelizes across worker
processes; the manifest is only ever written by the parent."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import coco, pngio
from .augment import (
    ObjectBankEntry,
    PlacementParams,
    build_object_bank,
    compose_neighboring,
    compose_on_random_background,
    compose_scene,
    derive_seed,
    save_bank,
    scene_sidecar,
)
from .config import PipelineConfig, config_digest
from .errors import MaskforgeError
from .evaluate import IOU_THRESHOLDS, EvalReport, evaluate_map
from .imaging import rle_encode
from .labeling import (
    CANDIDATE_KINDS,
    CandidateSet,
    LabelerParams,
    SceneRecord,
    auto_select,
    bgsub_candidates,
    render_candidate_overlay,
    saliency_instances,
)
from .manifest import Manifest
from .relight import CameraIntrinsics, LightingRanges, relight_scene, sample_lighting
from .resolution import downscale_coco, downscale_image
from .saliency import saliency_for_scene

log = logging.getLogger(__name__)

_LIGHT_SALT = 1  # derive_seed(seed, index, _LIGHT_SALT) seeds per-scene lighting


def write_summary(directory: str | Path, name: str, payload: dict) -> Path:
    path = Path(directory) / f"{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# labeling


def _label_scene(record_json: dict, params: LabelerParams, root: str) -> tuple[str, CandidateSet | None, str | None]:
    scene = SceneRecord.from_json(record_json)
    try:
        image = pngio.read_image(Path(root) / scene.image_path)
        cset = CandidateSet(scene_id=scene.scene_id)
        cset.hsv, cset.rgb = bgsub_candidates(scene, params, image=image, root=root)
        sal = saliency_for_scene(scene, image, root=root)
        cset.saliency = saliency_instances(sal, scene, params)

        overlay_dir = (Path(root) / scene.image_path).parent / "overlays"
        for kind in CANDIDATE_KINDS:
            overlay = render_candidate_overlay(image, cset.candidate(kind).instances)
            pngio.write_image(overlay_dir / f"{kind}.png", overlay)
        return scene.scene_id, cset, None
    except MaskforgeError as exc:
        return scene.scene_id, None, str(exc)


def label_manifest(
    manifest: Manifest,
    params: LabelerParams,
    root: str | Path,
    jobs: int = 1,
    select: bool = False,
) -> dict:
    """Run the weak labeler over every manifest scene and persist candidates.

    Human decisions survive re-labeling; heuristic or missing decisions reset
    to undecided (re-derived when ``select`` is set). Per-scene failures are
    recorded on the scene, never abort the run.
    """
    root = str(root)
    records = [manifest.scene(sid)["record"] for sid in manifest.scene_ids()]
    prior = manifest.decisions()

    if jobs > 1 and len(records) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_label_scene, records, [params] * len(records), [root] * len(records)))
    else:
        results = [_label_scene(r, params, root) for r in records]

    labeled = failed = 0
    for scene_id, cset, error in results:
        if cset is None:
            cset = CandidateSet(
                scene_id=scene_id, decision="reject", decision_source="heuristic", error=error
            )
            failed += 1
        else:
            labeled += 1
            kept = prior.get(scene_id)
            if kept is not None and kept[1] == "human":
                cset.decision, cset.decision_source = kept
            elif select:
                cset = auto_select(cset, params, manifest.scene_record(scene_id).turntable)
        manifest.set_candidates(cset)
    manifest.save()

    summary = {"scenes": len(records), "labeled": labeled, "failed": failed, "selected": select}
    write_summary(Path(root), "label_summary", summary)
    return summary


def select_manifest(manifest: Manifest, params: LabelerParams, root: str | Path) -> dict:
    """Apply the selection heuristic to every undecided scene with candidates."""
    decided = skipped = 0
    for sid in manifest.scene_ids():
        entry = manifest.scene(sid)
        if entry.get("decision", "undecided") != "undecided":
            skipped += 1
            continue
        cset = manifest.candidate_set(sid)
        if cset is None:
            skipped += 1
            continue
        cset = auto_select(cset, params, manifest.scene_record(sid).turntable)
        manifest.set_candidates(cset)
        decided += 1
    manifest.save()
    summary = {"decided": decided, "skipped": skipped, "progress": manifest.progress()}
    write_summary(Path(root), "select_summary", summary)
    return summary


# ---------------------------------------------------------------------------
# bank


def bank_from_manifest(manifest: Manifest, root: str | Path, name: str) -> tuple[list[ObjectBankEntry], Path]:
    selected = manifest.selected_annotations()
    entries = build_object_bank(selected, manifest.scene_records(), root=root)
    bank_path = save_bank(entries, Path(root) / "banks", name)
    classes = sorted({e.class_id for e in entries})
    write_summary(
        Path(root) / "banks",
        f"{name}.summary",
        {"entries": len(entries), "classes": classes, "bank": bank_path.name},
    )
    return entries, bank_path


# ---------------------------------------------------------------------------
# set generation


def _compose_one(
    bank: list[ObjectBankEntry],
    backgrounds: list[np.ndarray],
    p: PlacementParams,
    kind: str,
    seed: int,
    index: int,
    camera: CameraIntrinsics | None,
    lighting: LightingRanges | None,
    relight_base: str,
):
    scene_seed = derive_seed(seed, index)
    with_depth = kind == "relight"
    base = relight_base if kind == "relight" else kind
    if base == "plain":
        scene = compose_scene(bank, backgrounds[0], p, scene_seed, with_depth=with_depth)
    elif base == "neighboring":
        scene = compose_neighboring(bank, backgrounds[0], p, scene_seed, with_depth=with_depth)
    elif base == "random_background":
        scene = compose_on_random_background(
            bank, backgrounds, p, scene_seed, with_depth=with_depth
        )
    else:
        raise ValueError(f"unknown kind {base!r}")

    if kind == "relight":
        h, w = scene.image.shape[:2]
        k = camera or CameraIntrinsics.default_for(w, h)
        spec = sample_lighting(derive_seed(seed, index, _LIGHT_SALT), lighting)
        scene = relight_scene(scene, k, spec)
    return scene


def _generate_chunk(args: tuple) -> list[dict]:
    (bank, backgrounds, p, kind, seed, indices, out_dir, camera, lighting, relight_base) = args
    out_dir = Path(out_dir)
    records = []
    for index in indices:
        try:
            scene = _compose_one(
                bank, backgrounds, p, kind, seed, index, camera, lighting, relight_base
            )
        except MaskforgeError as exc:
            log.warning("scene %d failed: %s", index, exc)
            records.append({"index": index, "error": str(exc)})
            continue
        file_name = f"images/{index:05d}.png"
        pngio.write_image(out_dir / file_name, scene.image)
        sidecar = scene_sidecar(scene)
        (out_dir / "sidecars").mkdir(parents=True, exist_ok=True)
        (out_dir / "sidecars" / f"{index:05d}.json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
        )
        h, w = scene.image.shape[:2]
        records.append(
            {
                "index": index,
                "file_name": file_name,
                "width": w,
                "height": h,
                "annotations": [
                    {
                        "category_id": a.class_id,
                        "segmentation": {"size": [h, w], "counts": rle_encode(a.mask)},
                        "bbox": [int(v) for v in a.bbox],
                        "area": int(a.area),
                        "iscrowd": 0,
                        "score": float(a.score),
                    }
                    for a in scene.annotations
                ],
                "error": None,
            }
        )
    return records


def write_generated_set(
    manifest: Manifest,
    bank: list[ObjectBankEntry],
    backgrounds: list[np.ndarray],
    cfg: PipelineConfig,
    kind: str,
    count: int,
    seed: int,
    out_dir: str | Path,
    set_name: str,
    jobs: int = 1,
    relight_base: str = "plain",
) -> dict:
    """Generate ``count`` scenes, write images/sidecars/annotations and record
    the set in the manifest. Deterministic in (inputs, seed) regardless of
    ``jobs`` because every scene seeds independently."""
    kind = kind.replace("-", "_")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    indices = list(range(count))
    args = [
        (
            bank,
            backgrounds,
            cfg.augment,
            kind,
            seed,
            chunk,
            str(out_dir),
            cfg.camera,
            cfg.lighting,
            relight_base,
        )
        for chunk in _split(indices, jobs)
    ]
    if len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_generate_chunk, args))
    else:
        chunks = [_generate_chunk(a) for a in args]

    records = sorted(
        (r for chunk in chunks for r in chunk), key=lambda r: r["index"]
    )
    images = []
    annotations = []
    failures = []
    for rec in records:
        if rec.get("error"):
            failures.append({"index": rec["index"], "error": rec["error"]})
            continue
        image_id = rec["index"] + 1
        images.append(coco.image_entry(image_id, rec["file_name"], rec["width"], rec["height"]))
        for ann in rec["annotations"]:
            annotations.append(
                {"id": len(annotations) + 1, "image_id": image_id, **ann}
            )

    doc = coco.build_coco(images, annotations, manifest.categories)
    coco.write_coco(doc, out_dir / "annotations.json")

    digest = config_digest(cfg)
    manifest.record_generated_set(set_name, kind, count, seed, digest)
    if manifest.path is not None:
        manifest.save()

    summary = {
        "set": set_name,
        "kind": kind,
        "count": count,
        "seed": seed,
        "config_digest": digest,
        "generated": len(images),
        "failed": failures,
        "annotations": len(annotations),
    }
    write_summary(out_dir, "summary", summary)
    return summary


def _split(items: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(items)))
    size = (len(items) + parts - 1) // parts
    return [items[i : i + size] for i in range(0, len(items), size)]


def load_background_pool(paths: list[str | Path]) -> list[np.ndarray]:
    pool = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for f in sorted(p.iterdir()):
                if f.suffix.lower() == ".png":
                    pool.append(pngio.read_image(f))
        else:
            pool.append(pngio.read_image(p))
    return pool


# ---------------------------------------------------------------------------
# eval / export / downscale


def export_manifest_coco(manifest: Manifest, root: str | Path, out_path: str | Path) -> dict:
    """Export the selected annotations of all decided scenes as one document."""
    images = []
    annotations = []
    image_ids = {}
    for i, record in enumerate(manifest.scene_records()):
        image = pngio.read_image(Path(root) / record.image_path)
        image_ids[record.scene_id] = i + 1
        images.append(
            coco.image_entry(i + 1, record.image_path, image.shape[1], image.shape[0])
        )
    for ann in manifest.selected_annotations():
        annotations.append(
            coco.annotation_to_coco(ann, image_ids[str(ann.scene_or_image_id)], len(annotations) + 1)
        )
    return coco.export_coco(annotations, images, manifest.categories, out_path)


def eval_files(gt_path: str | Path, pred_path: str | Path, thresholds=IOU_THRESHOLDS) -> EvalReport:
    gt = coco.import_coco(gt_path)
    pred = coco.import_coco(pred_path)
    return evaluate_map(gt, pred, thresholds=thresholds)


def downscale_set(input_dir: str | Path, output_dir: str | Path, factor: int) -> dict:
    """Downscale a generated set directory (images/ + annotations.json)."""
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    doc = coco.import_coco(input_dir / "annotations.json")
    small = downscale_coco(doc, factor)
    coco.write_coco(small, output_dir / "annotations.json")
    for img in doc["images"]:
        image = pngio.read_image(input_dir / img["file_name"])
        pngio.write_image(output_dir / img["file_name"], downscale_image(image, factor))
    summary = {
        "factor": factor,
        "images": len(doc["images"]),
        "annotations_in": len(doc["annotations"]),
        "annotations_out": len(small["annotations"]),
    }
    write_summary(output_dir, "downscale_summary", summary)
    return summary
