"""Mask mAP over the 0.50..0.95 IoU threshold ladder.

Predictions are matched greedily in score order (ties by annotation id) to
the unmatched ground truth with the highest mask IoU, counted as true
positives when that IoU reaches the threshold; AP uses 101-point recall
interpolation, and mAP averages over thresholds first, then classes.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .coco import segmentation_mask
from .errors import CategoryMismatch, ImageSetMismatch
from .imaging import mask_iou

IOU_THRESHOLDS: tuple[float, ...] = tuple(k / 100 for k in range(50, 100, 5))
_RECALL_GRID = np.array([k / 100 for k in range(101)], dtype=np.float64)


@dataclass
class ClassAp:
    per_threshold: dict[float, float]
    mean: float


@dataclass
class EvalReport:
    per_class_ap: dict[int, ClassAp]
    map: float
    counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "map": self.map,
            "counts": self.counts,
            "per_class_ap": {
                str(cid): {
                    "mean": ap.mean,
                    "per_threshold": {f"{t:.2f}": v for t, v in ap.per_threshold.items()},
                }
                for cid, ap in self.per_class_ap.items()
            },
        }


@dataclass
class _Pred:
    ann_id: int
    image_id: int
    score: float
    mask: np.ndarray


def greedy_match(
    preds: list[_Pred],
    gts_by_image: dict[int, list[int]],
    ious: dict[tuple[int, int], float],
    threshold: float,
) -> list[tuple[int, int | None]]:
    """Match score-ordered predictions against ground truth at one threshold.

    Each prediction takes the unmatched ground truth in its image with the
    highest IoU (ties to the lowest ground-truth id) iff that IoU >= threshold.
    Returns (prediction id, matched ground-truth id or None) pairs in the
    prediction order given. Every ground truth is matched at most once.
    """
    taken: dict[int, set[int]] = defaultdict(set)
    pairs: list[tuple[int, int | None]] = []
    for pred in preds:
        best_gt = None
        best_iou = -1.0
        for gt_id in gts_by_image.get(pred.image_id, ()):  # ids ascending
            if gt_id in taken[pred.image_id]:
                continue
            iou = ious.get((pred.ann_id, gt_id), 0.0)
            if iou > best_iou:
                best_gt, best_iou = gt_id, iou
        if best_gt is not None and best_iou >= threshold:
            taken[pred.image_id].add(best_gt)
            pairs.append((pred.ann_id, best_gt))
        else:
            pairs.append((pred.ann_id, None))
    return pairs


def _ap_101(tp_flags: list[bool], n_gt: int) -> float:
    """AP via max-precision-at-recall>=r over the 101-point recall grid."""
    if n_gt == 0 or not tp_flags:
        return 0.0
    flags = np.asarray(tp_flags, dtype=np.float64)
    tp_cum = np.cumsum(flags)
    recall = tp_cum / n_gt
    precision = tp_cum / np.arange(1, flags.size + 1, dtype=np.float64)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, _RECALL_GRID, side="left")
    values = np.where(idx < recall.size, envelope[np.minimum(idx, recall.size - 1)], 0.0)
    return float(values.mean())


def _decode_all(doc: dict) -> dict[int, np.ndarray]:
    dims = {img["id"]: (int(img["height"]), int(img["width"])) for img in doc["images"]}
    masks = {}
    for ann in doc["annotations"]:
        h, w = dims[ann["image_id"]]
        masks[ann["id"]] = segmentation_mask(ann, h, w)
    return masks


def evaluate_map(
    gt: dict, pred: dict, thresholds: tuple[float, ...] = IOU_THRESHOLDS
) -> EvalReport:
    """Evaluate prediction masks against ground truth masks.

    Classes with ground truth contribute their threshold-averaged AP; classes
    with predictions but no ground truth contribute 0; classes with neither
    are excluded. Missing prediction scores default to 1.0.

    Raises:
        ImageSetMismatch / CategoryMismatch: the documents must describe the
            same images and categories.
    """
    gt_images = {img["id"] for img in gt["images"]}
    pred_images = {img["id"] for img in pred["images"]}
    if gt_images != pred_images:
        raise ImageSetMismatch(
            f"image ids differ: only-gt={sorted(gt_images - pred_images)} "
            f"only-pred={sorted(pred_images - gt_images)}"
        )
    gt_cats = sorted((c["id"], c["name"]) for c in gt["categories"])
    pred_cats = sorted((c["id"], c["name"]) for c in pred["categories"])
    if gt_cats != pred_cats:
        raise CategoryMismatch(f"category tables differ: {gt_cats} vs {pred_cats}")

    gt_masks = _decode_all(gt)
    pred_masks = _decode_all(pred)

    gts_by_class: dict[int, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    for ann in gt["annotations"]:
        gts_by_class[ann["category_id"]][ann["image_id"]].append(ann["id"])
    for per_image in gts_by_class.values():
        for ids in per_image.values():
            ids.sort()

    preds_by_class: dict[int, list[_Pred]] = defaultdict(list)
    for ann in pred["annotations"]:
        preds_by_class[ann["category_id"]].append(
            _Pred(
                ann_id=ann["id"],
                image_id=ann["image_id"],
                score=float(ann.get("score", 1.0)),
                mask=pred_masks[ann["id"]],
            )
        )

    class_ids = sorted(set(gts_by_class) | set(preds_by_class))
    per_class: dict[int, ClassAp] = {}
    for cid in class_ids:
        preds = sorted(preds_by_class.get(cid, []), key=lambda p: (-p.score, p.ann_id))
        gts_by_image = gts_by_class.get(cid, {})
        n_gt = sum(len(ids) for ids in gts_by_image.values())

        ious: dict[tuple[int, int], float] = {}
        for p in preds:
            for gt_id in gts_by_image.get(p.image_id, ()):
                ious[(p.ann_id, gt_id)] = mask_iou(p.mask, gt_masks[gt_id])

        per_threshold: dict[float, float] = {}
        for t in thresholds:
            pairs = greedy_match(preds, gts_by_image, ious, t)
            flags = [gt_id is not None for _, gt_id in pairs]
            per_threshold[t] = _ap_101(flags, n_gt)
        mean = float(np.mean(list(per_threshold.values()))) if per_threshold else 0.0
        per_class[cid] = ClassAp(per_threshold=per_threshold, mean=mean)

    if per_class:
        map_value = float(np.mean([ap.mean for ap in per_class.values()]))
    else:
        map_value = 1.0  # nothing annotated on either side: trivially perfect

    return EvalReport(
        per_class_ap=per_class,
        map=map_value,
        counts={
            "images": len(gt_images),
            "gts": len(gt["annotations"]),
            "predictions": len(pred["annotations"]),
        },
    )
