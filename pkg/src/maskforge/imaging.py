"""Pixel-grid primitives shared by every pipeline stage.

Conventions used throughout the package:

* RGB images are ``(H, W, 3)`` uint8 arrays, grayscale images ``(H, W)`` uint8.
* Binary masks are ``(H, W)`` bool arrays.
* Depth images are ``(H, W)`` uint16 arrays holding millimeters, 0 = invalid.
* Label maps are ``(H, W)`` int32 arrays, 0 = background, instances 1..N.
* Pixel (row, col) sits at coordinate (y=row, x=col); region membership is
  evaluated at these integer centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    ChannelMismatch,
    DegenerateHistogram,
    DimensionMismatch,
    EmptyMask,
    MalformedRle,
)

__all__ = [
    "CircularRegion",
    "abs_diff_sum",
    "as_depth",
    "as_gray",
    "as_mask",
    "as_rgb",
    "binarize",
    "connected_components",
    "disc_footprint",
    "mask_bbox",
    "mask_iou",
    "morph_close",
    "morph_dilate",
    "morph_erode",
    "morph_open",
    "otsu_threshold",
    "resize_bilinear",
    "rgb_to_value",
    "rle_decode",
    "rle_encode",
]


# ---------------------------------------------------------------------------
# validation helpers


def as_rgb(img: np.ndarray) -> np.ndarray:
    """Validate and return a (H, W, 3) uint8 image."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ChannelMismatch(f"expected a 3-channel image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"image dimensions must be positive, got {arr.shape}")
    if arr.dtype != np.uint8:
        raise ChannelMismatch(f"expected uint8 samples, got {arr.dtype}")
    return arr


def as_gray(img: np.ndarray) -> np.ndarray:
    """Validate and return a (H, W) uint8 image."""
    arr = np.asarray(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise ChannelMismatch(f"expected a single-channel image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"image dimensions must be positive, got {arr.shape}")
    if arr.dtype != np.uint8:
        raise ChannelMismatch(f"expected uint8 samples, got {arr.dtype}")
    return arr


def as_mask(m: np.ndarray) -> np.ndarray:
    """Validate and return a (H, W) bool mask."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d mask, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"mask dimensions must be positive, got {arr.shape}")
    if arr.dtype != bool:
        arr = arr.astype(bool)
    return arr


def as_depth(d: np.ndarray) -> np.ndarray:
    """Validate and return a (H, W) uint16 depth image (millimeters, 0 = invalid)."""
    arr = np.asarray(d)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d depth image, got shape {arr.shape}")
    if arr.dtype != np.uint16:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 0xFFFF:
            arr = arr.astype(np.uint16)
        else:
            raise ChannelMismatch(f"expected uint16 depth samples, got {arr.dtype}")
    return arr


# ---------------------------------------------------------------------------
# regions and structuring elements


@dataclass(frozen=True)
class CircularRegion:
    """Circular image region, e.g. the turntable area all objects lie within."""

    center_x: float
    center_y: float
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def to_mask(self, height: int, width: int) -> np.ndarray:
        """Rasterize: pixel (row, col) is inside iff its center is within the radius."""
        yy = np.arange(height, dtype=np.float64)[:, None]
        xx = np.arange(width, dtype=np.float64)[None, :]
        return (xx - self.center_x) ** 2 + (yy - self.center_y) ** 2 <= self.radius**2

    def pixel_area(self, height: int, width: int) -> int:
        return int(np.count_nonzero(self.to_mask(height, width)))

    def to_json(self) -> dict:
        return {"center_x": self.center_x, "center_y": self.center_y, "radius": self.radius}

    @classmethod
    def from_json(cls, data: dict) -> "CircularRegion":
        return cls(float(data["center_x"]), float(data["center_y"]), float(data["radius"]))


def disc_footprint(radius: int) -> np.ndarray:
    """Disc structuring element: (dy, dx) included iff dy^2 + dx^2 <= radius^2."""
    r = int(radius)
    if r < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (yy * yy + xx * xx) <= r * r


# ---------------------------------------------------------------------------
# point ops


def rgb_to_value(img: np.ndarray) -> np.ndarray:
    """HSV value channel of an 8-bit RGB image: the per-pixel channel maximum."""
    return as_rgb(img).max(axis=2)


def abs_diff_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pixel sum of absolute RGB channel differences, saturated at 255."""
    a = as_rgb(a)
    b = as_rgb(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"image shapes differ: {a.shape} vs {b.shape}")
    diff = np.abs(a.astype(np.int32) - b.astype(np.int32)).sum(axis=2)
    return np.minimum(diff, 255).astype(np.uint8)


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold maximizing the between-class variance of {<=t} vs {>t}.

    Ties are broken toward the smallest maximizing threshold. Scores are
    compared in exact integer arithmetic so tie-breaking is reproducible.

    Raises:
        DegenerateHistogram: if the image holds fewer than two distinct values.
    """
    gray = as_gray(gray)
    hist = np.bincount(gray.ravel(), minlength=256)
    if int(np.count_nonzero(hist)) < 2:
        raise DegenerateHistogram("threshold undefined for a constant image")
    counts = hist.tolist()
    total = int(gray.size)
    total_sum = int(np.dot(hist, np.arange(256, dtype=np.int64)))

    # between-class variance at t is proportional to (s0*n1 - s1*n0)^2 / (n0*n1)
    best_t = -1
    best_num = -1
    best_den = 1
    n0 = 0
    s0 = 0
    for t in range(256):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize(gray: np.ndarray, t: int) -> np.ndarray:
    """Foreground iff value > t (a pixel exactly at t stays background)."""
    return as_gray(gray) > t


# ---------------------------------------------------------------------------
# morphology

# Out-of-image pixels count as background: masks are treated as embedded in an
# infinite background plane and the result is restricted to the image, which
# keeps closing extensive (m subset of close(m)) and opening anti-extensive.


def _check_radius(radius: int) -> int:
    r = int(radius)
    if r < 1:
        raise ValueError(f"structuring element radius must be >= 1, got {radius}")
    return r


def morph_dilate(m: np.ndarray, radius: int) -> np.ndarray:
    m = as_mask(m)
    fp = disc_footprint(_check_radius(radius))
    return ndimage.binary_dilation(m, structure=fp, border_value=0)


def morph_erode(m: np.ndarray, radius: int) -> np.ndarray:
    m = as_mask(m)
    fp = disc_footprint(_check_radius(radius))
    return ndimage.binary_erosion(m, structure=fp, border_value=0)


def morph_close(m: np.ndarray, radius: int) -> np.ndarray:
    """Dilation then erosion with a disc element.

    Computed on a padded canvas so the dilated mass outside the image is not
    lost before the erosion step; the cropped result equals closing on the
    infinite plane restricted to the image.
    """
    m = as_mask(m)
    r = _check_radius(radius)
    padded = np.pad(m, r, mode="constant", constant_values=False)
    closed = morph_erode(morph_dilate(padded, r), r)
    return closed[r:-r, r:-r]


def morph_open(m: np.ndarray, radius: int) -> np.ndarray:
    """Erosion then dilation with a disc element."""
    r = _check_radius(radius)
    return morph_dilate(morph_erode(m, r), r)


# ---------------------------------------------------------------------------
# components and mask arithmetic

_STRUCTURES = {
    4: np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool),
    8: np.ones((3, 3), dtype=bool),
}


def connected_components(m: np.ndarray, connectivity: int = 8) -> np.ndarray:
    """Label maximal connected foreground regions 1..N.

    Labels follow first-encounter order of a row-major scan, so the output is
    independent of the underlying labeling backend.
    """
    m = as_mask(m)
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, n = ndimage.label(m, structure=_STRUCTURES[connectivity])
    labels = labels.astype(np.int32)
    if n == 0:
        return labels
    flat = labels.ravel()
    uniq, first = np.unique(flat, return_index=True)
    nonzero = uniq != 0
    order = np.argsort(first[nonzero], kind="stable")
    lut = np.zeros(int(uniq.max()) + 1, dtype=np.int32)
    lut[uniq[nonzero][order]] = np.arange(1, n + 1, dtype=np.int32)
    return lut[labels]


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two masks; 0.0 when both are empty."""
    a = as_mask(a)
    b = as_mask(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return inter / union if union else 0.0


def mask_bbox(m: np.ndarray) -> tuple[int, int, int, int]:
    """Tight axis-aligned bounding box (x, y, w, h) of the foreground."""
    m = as_mask(m)
    ys, xs = np.nonzero(m)
    if xs.size == 0:
        raise EmptyMask("bounding box undefined for an empty mask")
    x0 = int(xs.min())
    y0 = int(ys.min())
    return x0, y0, int(xs.max()) - x0 + 1, int(ys.max()) - y0 + 1


# ---------------------------------------------------------------------------
# run-length encoding (COCO uncompressed counts, column-major)


def rle_encode(m: np.ndarray) -> list[int]:
    """Column-major run lengths, alternating background/foreground runs.

    The first count is the leading background run and may be zero.
    """
    m = as_mask(m)
    flat = m.ravel(order="F")
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0]:
        counts = [0] + counts
    return [int(c) for c in counts]


def rle_decode(counts: list[int], width: int, height: int) -> np.ndarray:
    """Inverse of :func:`rle_encode`.

    Raises:
        MalformedRle: if any count is negative or the counts do not sum to
            width*height.
    """
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise MalformedRle("negative run length")
    if sum(counts) != width * height:
        raise MalformedRle(
            f"counts sum to {sum(counts)}, expected {width * height} for {width}x{height}"
        )
    values = np.zeros(len(counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, counts)
    return flat.reshape((height, width), order="F")


# ---------------------------------------------------------------------------
# resampling


def resize_bilinear(img: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Bilinear resample to (height, width); returns float64.

    Output pixel centers map to source coordinates via
    ``src = (i + 0.5) * in/out - 0.5`` with clamp-to-edge sampling.
    """
    arr = np.asarray(img, dtype=np.float64)
    in_h, in_w = arr.shape[:2]
    out_h, out_w = int(out_hw[0]), int(out_hw[1])
    if out_h < 1 or out_w < 1:
        raise DimensionMismatch(f"target size must be positive, got {out_hw}")
    if (out_h, out_w) == (in_h, in_w):
        return arr.copy()

    sy = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    sx = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    y0 = np.clip(np.floor(sy), 0, in_h - 1).astype(np.intp)
    x0 = np.clip(np.floor(sx), 0, in_w - 1).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = np.clip(sy - y0, 0.0, 1.0)[:, None]
    wx = np.clip(sx - x0, 0.0, 1.0)[None, :]
    if arr.ndim == 3:
        wy = wy[..., None]
        wx = wx[..., None]

    top = arr[np.ix_(y0, x0)] * (1 - wx) + arr[np.ix_(y0, x1)] * wx
    bottom = arr[np.ix_(y1, x0)] * (1 - wx) + arr[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy
