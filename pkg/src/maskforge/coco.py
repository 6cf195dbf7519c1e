"""COCO-style annotation documents.

Export writes a canonical, byte-stable serialization (sorted keys, two-space
indent) with masks as uncompressed column-major RLE counts. Import reads
documents this tool wrote and tolerates polygon segmentations, which are
rasterized with the even-odd rule at pixel centers.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import IntegrityError, ParseError
from .imaging import rle_decode, rle_encode
from .labeling import InstanceAnnotation


def annotation_to_coco(ann: InstanceAnnotation, image_id: int, ann_id: int) -> dict:
    h, w = ann.mask.shape
    return {
        "id": int(ann_id),
        "image_id": int(image_id),
        "category_id": int(ann.class_id),
        "segmentation": {"size": [int(h), int(w)], "counts": rle_encode(ann.mask)},
        "bbox": [int(v) for v in ann.bbox],
        "area": int(ann.area),
        "iscrowd": 0,
        "score": float(ann.score),
    }


def image_entry(image_id: int, file_name: str, width: int, height: int) -> dict:
    return {
        "id": int(image_id),
        "file_name": str(file_name),
        "width": int(width),
        "height": int(height),
    }


def build_coco(
    images: list[dict],
    annotations: Iterable[InstanceAnnotation | dict],
    categories: Iterable[tuple[int, str] | dict],
) -> dict:
    """Assemble and integrity-check a document.

    ``annotations`` may be COCO dicts or :class:`InstanceAnnotation` objects
    whose ``scene_or_image_id`` is the integer image id (ids are assigned in
    order in that case).
    """
    cats = []
    for c in categories:
        if isinstance(c, dict):
            cats.append({"id": int(c["id"]), "name": str(c["name"])})
        else:
            cats.append({"id": int(c[0]), "name": str(c[1])})

    anns = []
    for i, ann in enumerate(annotations):
        if isinstance(ann, InstanceAnnotation):
            anns.append(annotation_to_coco(ann, int(ann.scene_or_image_id), i + 1))
        else:
            anns.append(dict(ann))

    doc = {"images": list(images), "annotations": anns, "categories": cats}
    validate_coco(doc)
    return doc


def validate_coco(doc: dict) -> None:
    """Check id uniqueness and referential integrity; raises IntegrityError."""
    problems = []
    image_ids = [img["id"] for img in doc.get("images", [])]
    cat_ids = [c["id"] for c in doc.get("categories", [])]
    ann_ids = [a["id"] for a in doc.get("annotations", [])]
    for kind, ids in (("image", image_ids), ("category", cat_ids), ("annotation", ann_ids)):
        if len(ids) != len(set(ids)):
            problems.append(f"duplicate {kind} ids")
    image_set, cat_set = set(image_ids), set(cat_ids)
    for a in doc.get("annotations", []):
        if a["image_id"] not in image_set:
            problems.append(f"annotation {a['id']} references unknown image {a['image_id']}")
        if a["category_id"] not in cat_set:
            problems.append(f"annotation {a['id']} references unknown category {a['category_id']}")
    if problems:
        raise IntegrityError("; ".join(problems))


def canonical_dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_coco(doc: dict, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_dumps(doc))


def export_coco(
    annotations: Iterable[InstanceAnnotation | dict],
    images: list[dict],
    categories: Iterable[tuple[int, str] | dict],
    path: str | Path,
) -> dict:
    """Validate, assemble and write a document; returns the document."""
    doc = build_coco(images, annotations, categories)
    write_coco(doc, path)
    return doc


def import_coco(path: str | Path) -> dict:
    """Read and integrity-check a document.

    Raises:
        ParseError: malformed JSON (with line/column) or missing sections.
        IntegrityError: dangling references or duplicate ids.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top-level value must be an object")
    for key in ("images", "annotations", "categories"):
        if key not in doc or not isinstance(doc[key], list):
            raise ParseError(f"{path}: missing or non-list section {key!r}")
    validate_coco(doc)
    return doc


# ---------------------------------------------------------------------------
# segmentation decoding


def polygon_mask(polygons: list[list[float]], height: int, width: int) -> np.ndarray:
    """Rasterize COCO polygons: even-odd fill evaluated at pixel centers,
    union over the listed polygons."""
    out = np.zeros((height, width), dtype=bool)
    px = np.arange(width, dtype=np.float64)[None, :] + 0.5
    py = np.arange(height, dtype=np.float64)[:, None] + 0.5
    for poly in polygons:
        xs = np.asarray(poly[0::2], dtype=np.float64)
        ys = np.asarray(poly[1::2], dtype=np.float64)
        if xs.size < 3:
            continue
        crossings = np.zeros((height, width), dtype=np.int64)
        for i in range(xs.size):
            x1, y1 = xs[i], ys[i]
            x2, y2 = xs[(i + 1) % xs.size], ys[(i + 1) % xs.size]
            if y1 == y2:
                continue
            straddles = (y1 > py) != (y2 > py)
            xi = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            crossings += straddles & (px < xi)
        out |= crossings % 2 == 1
    return out


def segmentation_mask(ann: dict, height: int, width: int) -> np.ndarray:
    """Binary mask of an annotation's segmentation (RLE dict or polygon list)."""
    seg = ann["segmentation"]
    if isinstance(seg, dict):
        h, w = (int(v) for v in seg["size"])
        return rle_decode(seg["counts"], width=w, height=h)
    if isinstance(seg, list):
        return polygon_mask(seg, height, width)
    raise ParseError(f"annotation {ann.get('id')}: unsupported segmentation type {type(seg)}")
