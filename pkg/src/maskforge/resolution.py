"""Integer-factor downscaling with annotation recompute.

Matches the quarter-size evaluation convention (1920x1440 -> 480x360 at
factor 4): RGB averages each factor x factor block, masks keep the block's
center pixel, depth takes the lower median of the valid values per block.
"""

from __future__ import annotations

import numpy as np

from .errors import NotDivisible
from .imaging import as_mask, mask_bbox, rle_decode, rle_encode


def _check(shape: tuple[int, int], factor: int) -> int:
    f = int(factor)
    if f < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    h, w = shape
    if h % f or w % f:
        raise NotDivisible(f"{w}x{h} is not divisible by {f}")
    return f


def downscale_image(img: np.ndarray, factor: int) -> np.ndarray:
    """Box-filter average per block, rounded to nearest."""
    arr = np.asarray(img)
    f = _check(arr.shape[:2], factor)
    if f == 1:
        return arr.copy()
    h, w = arr.shape[:2]
    if arr.ndim == 3:
        blocks = arr.reshape(h // f, f, w // f, f, arr.shape[2]).astype(np.float64)
    else:
        blocks = arr.reshape(h // f, f, w // f, f).astype(np.float64)
    mean = blocks.mean(axis=(1, 3))
    return np.floor(mean + 0.5).astype(arr.dtype)


def downscale_mask(m: np.ndarray, factor: int) -> np.ndarray:
    """Nearest sampling: each block contributes its center pixel (index f//2)."""
    m = as_mask(m)
    f = _check(m.shape, factor)
    if f == 1:
        return m.copy()
    return m[f // 2 :: f, f // 2 :: f].copy()


def downscale_depth(d: np.ndarray, factor: int) -> np.ndarray:
    """Lower median of the valid (nonzero) depths per block, 0 when none."""
    arr = np.asarray(d)
    f = _check(arr.shape, factor)
    if f == 1:
        return arr.copy()
    h, w = arr.shape
    blocks = arr.reshape(h // f, f, w // f, f).transpose(0, 2, 1, 3).reshape(h // f, w // f, f * f)
    ordered = np.sort(blocks, axis=2)  # zeros (invalid) sort first
    n_valid = (blocks > 0).sum(axis=2)
    # index of the lower median among the valid suffix of each sorted block
    idx = np.where(n_valid > 0, f * f - n_valid + (n_valid - 1) // 2, 0)
    out = np.take_along_axis(ordered, idx[..., None], axis=2)[..., 0]
    out[n_valid == 0] = 0
    return out.astype(arr.dtype)


def downscale_coco_annotation(ann: dict, factor: int) -> dict | None:
    """Rescale one annotation by downscaling its mask and recomputing bbox and
    area; returns None when the reduced mask is empty."""
    seg = ann["segmentation"]
    h, w = (int(v) for v in seg["size"])
    mask = rle_decode(seg["counts"], width=w, height=h)
    small = downscale_mask(mask, factor)
    if not small.any():
        return None
    out = dict(ann)
    sh, sw = small.shape
    out["segmentation"] = {"size": [sh, sw], "counts": rle_encode(small)}
    out["bbox"] = [int(v) for v in mask_bbox(small)]
    out["area"] = int(np.count_nonzero(small))
    return out


def downscale_coco(doc: dict, factor: int) -> dict:
    """Downscale every image entry and annotation of a document."""
    images = []
    for img in doc["images"]:
        _check((int(img["height"]), int(img["width"])), factor)
        entry = dict(img)
        entry["width"] = int(img["width"]) // factor
        entry["height"] = int(img["height"]) // factor
        images.append(entry)
    annotations = []
    for ann in doc["annotations"]:
        small = downscale_coco_annotation(ann, factor)
        if small is not None:
            annotations.append(small)
    return {"images": images, "annotations": annotations, "categories": list(doc["categories"])}
