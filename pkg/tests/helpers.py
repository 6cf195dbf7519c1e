"""Shared synthetic-data builders and independent oracles for the tests.

Everything here is test-owned: the rasterizers and flood fill are written
against the definitions, not against the package internals, so they can
serve as oracles.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from maskforge import CircularRegion, Manifest, SceneRecord
from maskforge import pngio

BG_COLOR = (60, 40, 30)  # plain brown acquisition surface


def rasterize_disc(cx: float, cy: float, r: float, height: int, width: int) -> np.ndarray:
    """Pixel-center disc rasterization (independent oracle)."""
    out = np.zeros((height, width), dtype=bool)
    for y in range(height):
        for x in range(width):
            if (x - cx) ** 2 + (y - cy) ** 2 <= r * r:
                out[y, x] = True
    return out


def rasterize_rect(x0: int, y0: int, w: int, h: int, height: int, width: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    out[y0 : y0 + h, x0 : x0 + w] = True
    return out


def flood_fill_labels(mask: np.ndarray, connectivity: int) -> np.ndarray:
    """BFS flood-fill labeling, seeds scanned row-major (independent oracle)."""
    if connectivity == 4:
        nbrs = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        nbrs = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    next_label = 1
    for y in range(h):
        for x in range(w):
            if mask[y, x] and labels[y, x] == 0:
                queue = [(y, x)]
                labels[y, x] = next_label
                while queue:
                    cy, cx = queue.pop()
                    for dy, dx in nbrs:
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and labels[ny, nx] == 0:
                            labels[ny, nx] = next_label
                            queue.append((ny, nx))
                next_label += 1
    return labels


def otsu_oracle(gray: np.ndarray) -> int:
    """Exhaustive between-class-variance maximization in exact arithmetic,
    computed straight from the definition (weighted squared deviations of the
    class means from the global mean)."""
    from fractions import Fraction

    values = gray.ravel().tolist()
    n = len(values)
    hist = [0] * 256
    for v in values:
        hist[v] += 1
    assert sum(1 for c in hist if c) >= 2
    mean = Fraction(sum(values), n)
    best_t = None
    best_score = None
    for t in range(256):
        n0 = sum(hist[: t + 1])
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = Fraction(sum(v * hist[v] for v in range(t + 1)), n0)
        mu1 = Fraction(sum(v * hist[v] for v in range(t + 1, 256)), n1)
        score = Fraction(n0, n) * (mu0 - mean) ** 2 + Fraction(n1, n) * (mu1 - mean) ** 2
        if best_score is None or score > best_score:
            best_t, best_score = t, score
    return best_t


def mask_to_ann(mask, ann_id, image_id, category_id, score=1.0):
    """COCO annotation dict from a boolean mask."""
    from maskforge.imaging import rle_encode

    ys, xs = np.nonzero(mask)
    h, w = mask.shape
    return {
        "id": ann_id,
        "image_id": image_id,
        "category_id": category_id,
        "segmentation": {"size": [h, w], "counts": rle_encode(mask)},
        "bbox": [int(xs.min()), int(ys.min()),
                 int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1)],
        "area": int(mask.sum()),
        "iscrowd": 0,
        "score": float(score),
    }


def make_docs(gt_items, pred_items, n_images=1, hw=(16, 16), categories=((1, "a"), (2, "b"))):
    """COCO gt/pred documents from (mask, image_id, category_id[, score]) items."""
    from maskforge.coco import build_coco, image_entry

    images = [image_entry(i + 1, f"{i}.png", hw[1], hw[0]) for i in range(n_images)]
    gt_anns = [mask_to_ann(m, i + 1, img, cat) for i, (m, img, cat) in enumerate(gt_items)]
    pred_anns = []
    for i, item in enumerate(pred_items):
        m, img, cat = item[:3]
        score = item[3] if len(item) > 3 else 1.0
        pred_anns.append(mask_to_ann(m, i + 1, img, cat, score))
    return build_coco(images, gt_anns, categories), build_coco(images, pred_anns, categories)


def box_mask(y0, x0, h, w, hw=(16, 16)):
    m = np.zeros(hw, dtype=bool)
    m[y0 : y0 + h, x0 : x0 + w] = True
    return m


def random_eval_items(rng, n_images=2, hw=(16, 16), max_per_image=5, categories=(1, 2)):
    """Random (mask, image_id, category_id, score) items for evaluator tests."""
    items = []
    for img in range(1, n_images + 1):
        for _ in range(int(rng.integers(0, max_per_image + 1))):
            h = int(rng.integers(2, 8))
            w = int(rng.integers(2, 8))
            y0 = int(rng.integers(0, hw[0] - h))
            x0 = int(rng.integers(0, hw[1] - w))
            cat = int(rng.choice(categories))
            score = float(np.round(rng.uniform(0.1, 1.0), 2))
            items.append((box_mask(y0, x0, h, w, hw), img, cat, score))
    return items


def oracle_map(gt_items, pred_items, thresholds=None):
    """Naive mAP: (mask, image_id, category_id[, score]) tuples evaluated with
    plain loops straight from the greedy-matching and 101-point interpolation
    definitions (independent oracle)."""
    from maskforge import IOU_THRESHOLDS

    thresholds = thresholds or IOU_THRESHOLDS

    def iou(a, b):
        inter = int(np.count_nonzero(a & b))
        union = int(np.count_nonzero(a | b))
        return inter / union if union else 0.0

    gts = [
        {"id": i + 1, "image": img, "cat": cat, "mask": m}
        for i, (m, img, cat) in enumerate(gt_items)
    ]
    preds = []
    for i, item in enumerate(pred_items):
        m, img, cat = item[:3]
        score = item[3] if len(item) > 3 else 1.0
        preds.append({"id": i + 1, "image": img, "cat": cat, "mask": m, "score": score})

    classes = sorted({g["cat"] for g in gts} | {p["cat"] for p in preds})
    class_means = []
    for cls in classes:
        cls_gts = [g for g in gts if g["cat"] == cls]
        cls_preds = sorted(
            (p for p in preds if p["cat"] == cls), key=lambda p: (-p["score"], p["id"])
        )
        n_gt = len(cls_gts)
        ap_per_t = []
        for t in thresholds:
            matched = set()
            flags = []
            for p in cls_preds:
                best_id, best_iou = None, -1.0
                for g in sorted(cls_gts, key=lambda g: g["id"]):
                    if g["image"] != p["image"] or g["id"] in matched:
                        continue
                    value = iou(p["mask"], g["mask"])
                    if value > best_iou:
                        best_id, best_iou = g["id"], value
                if best_id is not None and best_iou >= t:
                    matched.add(best_id)
                    flags.append(True)
                else:
                    flags.append(False)
            if n_gt == 0:
                ap_per_t.append(0.0)
                continue
            points = []
            tp = 0
            for i, flag in enumerate(flags):
                tp += int(flag)
                points.append((tp / n_gt, tp / (i + 1)))
            total = 0.0
            for k in range(101):
                r = k / 100
                best = 0.0
                for rec, prec in points:
                    if rec >= r and prec > best:
                        best = prec
                total += best
            ap_per_t.append(total / 101)
        class_means.append(sum(ap_per_t) / len(ap_per_t))
    return sum(class_means) / len(class_means) if class_means else 1.0


# ---------------------------------------------------------------------------
# synthetic turntable scenes


def synth_scene_arrays(
    rng: np.random.Generator,
    height: int = 240,
    width: int = 320,
    n_shapes: int | None = None,
    noise_sigma: float = 3.0,
):
    """A uniform-background acquisition with 1-3 bright analytic shapes inside
    the turntable. Returns (image, background, shape_masks, turntable)."""
    turntable = CircularRegion(center_x=width / 2, center_y=height / 2, radius=min(width, height) * 0.42)
    background = np.zeros((height, width, 3), dtype=np.float64)
    background[:] = BG_COLOR

    if n_shapes is None:
        n_shapes = int(rng.integers(1, 4))
    masks: list[np.ndarray] = []
    attempts = 0
    while len(masks) < n_shapes and attempts < 200:
        attempts += 1
        kind = rng.integers(2)
        if kind == 0:
            r = float(rng.uniform(18, 34))
            cx = float(rng.uniform(turntable.center_x - 60, turntable.center_x + 60))
            cy = float(rng.uniform(turntable.center_y - 45, turntable.center_y + 45))
            if (cx - turntable.center_x) ** 2 + (cy - turntable.center_y) ** 2 > (turntable.radius - r - 4) ** 2:
                continue
            shape = disc_mask_fast(cx, cy, r, height, width)
        else:
            w = int(rng.integers(28, 52))
            h = int(rng.integers(28, 52))
            x0 = int(rng.integers(int(turntable.center_x - 70), int(turntable.center_x + 70 - w)))
            y0 = int(rng.integers(int(turntable.center_y - 55), int(turntable.center_y + 55 - h)))
            corners = [(x0, y0), (x0 + w, y0), (x0, y0 + h), (x0 + w, y0 + h)]
            if any(
                (x - turntable.center_x) ** 2 + (y - turntable.center_y) ** 2 > (turntable.radius - 4) ** 2
                for x, y in corners
            ):
                continue
            shape = rasterize_rect(x0, y0, w, h, height, width)
        if any((shape & separate_margin(m, 6)).any() for m in masks):
            continue
        masks.append(shape)

    image = background.copy()
    for mask in masks:
        color = np.array(
            [rng.uniform(170, 230), rng.uniform(170, 230), rng.uniform(180, 240)]
        )
        image[mask] = color

    if noise_sigma > 0:
        image = image + rng.normal(0.0, noise_sigma, image.shape)
        background = background + rng.normal(0.0, noise_sigma, background.shape)
    image = np.clip(np.floor(image + 0.5), 0, 255).astype(np.uint8)
    background = np.clip(np.floor(background + 0.5), 0, 255).astype(np.uint8)
    return image, background, masks, turntable


def disc_mask_fast(cx: float, cy: float, r: float, height: int, width: int) -> np.ndarray:
    yy = np.arange(height, dtype=np.float64)[:, None]
    xx = np.arange(width, dtype=np.float64)[None, :]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def separate_margin(mask: np.ndarray, margin: int) -> np.ndarray:
    """Cheap bbox-based margin grow, used only to keep synthetic shapes apart."""
    ys, xs = np.nonzero(mask)
    out = np.zeros_like(mask)
    y0 = max(0, ys.min() - margin)
    y1 = min(mask.shape[0], ys.max() + margin + 1)
    x0 = max(0, xs.min() - margin)
    x1 = min(mask.shape[1], xs.max() + margin + 1)
    out[y0:y1, x0:x1] = True
    return out


def write_scene(
    root: Path,
    scene_id: str,
    image: np.ndarray,
    background: np.ndarray,
    turntable: CircularRegion,
    class_id: int = 1,
    depth: np.ndarray | None = None,
) -> SceneRecord:
    scene_dir = root / "scenes" / scene_id
    pngio.write_image(scene_dir / "image.png", image)
    pngio.write_image(scene_dir / "background.png", background)
    depth_rel = None
    if depth is not None:
        pngio.write_depth(scene_dir / "depth.png", depth)
        depth_rel = f"scenes/{scene_id}/depth.png"
    return SceneRecord(
        scene_id=scene_id,
        image_path=f"scenes/{scene_id}/image.png",
        background_path=f"scenes/{scene_id}/background.png",
        class_id=class_id,
        turntable=turntable,
        depth_path=depth_rel,
    )


def make_dataset(
    root: Path,
    n_scenes: int = 3,
    seed: int = 0,
    categories: list[tuple[int, str]] | None = None,
    with_depth: bool = False,
    height: int = 240,
    width: int = 320,
) -> tuple[Manifest, list[list[np.ndarray]]]:
    """Synthetic labeled-acquisition dataset on disk; returns the manifest and
    the per-scene ground-truth shape masks."""
    categories = categories or [(1, "widget"), (2, "gadget")]
    manifest = Manifest.new(categories, path=root / "manifest.json")
    rng = np.random.default_rng(seed)
    all_masks = []
    for i in range(n_scenes):
        image, background, masks, turntable = synth_scene_arrays(rng, height=height, width=width)
        depth = None
        if with_depth:
            depth = np.full(image.shape[:2], 1100, dtype=np.uint16)
            for m in masks:
                depth[m] = 1040
        record = write_scene(
            root,
            f"scene{i:03d}",
            image,
            background,
            turntable,
            class_id=categories[i % len(categories)][0],
            depth=depth,
        )
        manifest.add_scene(record)
        all_masks.append(masks)
    manifest.save()
    return manifest, all_masks
