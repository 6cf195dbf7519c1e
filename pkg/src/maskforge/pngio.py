"""PNG reading and writing for the dataset layout.

RGB and grayscale images are 8-bit PNG; depth is 16-bit single-channel PNG
holding millimeters with 0 meaning no return; masks are stored as 8-bit
grayscale with foreground = 255.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import MissingImage


def read_image(path: str | Path) -> np.ndarray:
    """Read an 8-bit PNG as (H, W, 3) RGB or (H, W) grayscale uint8."""
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "RGB"):
                arr = np.asarray(im)
            elif im.mode in ("1", "I;16", "I", "LA"):
                arr = np.asarray(im.convert("L"))
            else:
                arr = np.asarray(im.convert("RGB"))
    except (FileNotFoundError, OSError) as exc:
        raise MissingImage(f"cannot read image {path}: {exc}") from exc
    return np.ascontiguousarray(arr.astype(np.uint8))


def write_image(path: str | Path, img: np.ndarray) -> None:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {arr.dtype}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path, format="PNG")


def read_depth(path: str | Path) -> np.ndarray:
    """Read a 16-bit grayscale PNG as (H, W) uint16 millimeters."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im)
    except (FileNotFoundError, OSError) as exc:
        raise MissingImage(f"cannot read depth image {path}: {exc}") from exc
    if arr.ndim != 2:
        raise MissingImage(f"depth image {path} is not single-channel")
    if arr.dtype != np.uint16:
        if arr.min() < 0 or arr.max() > 0xFFFF:
            raise MissingImage(f"depth image {path} exceeds the 16-bit range")
        arr = arr.astype(np.uint16)
    return np.ascontiguousarray(arr)


def write_depth(path: str | Path, depth: np.ndarray) -> None:
    arr = np.asarray(depth)
    if arr.dtype != np.uint16:
        raise ValueError(f"expected uint16 depth, got {arr.dtype}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path, format="PNG")  # uint16 maps to 16-bit gray


def read_mask(path: str | Path) -> np.ndarray:
    gray = read_image(path)
    if gray.ndim == 3:
        gray = gray.max(axis=2)
    return gray > 127


def write_mask(path: str | Path, mask: np.ndarray) -> None:
    write_image(path, (np.asarray(mask, dtype=bool) * np.uint8(255)))
