"""Saliency-map sources for the weak labeler.

The labeler only needs an 8-bit saliency map per scene. Maps can be supplied
externally (a ``<image>.saliency.png`` file next to the scene image, or an
explicit path in the scene record); the built-in fallback is the classic
spectral-residual detector.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from . import pngio
from .imaging import as_gray, resize_bilinear

# BT.601 luma weights for collapsing RGB before the spectral analysis.
_LUMA = np.array([0.299, 0.587, 0.114])


def spectral_residual_saliency(
    img: np.ndarray, max_side: int = 64, smooth_sigma: float = 3.0
) -> np.ndarray:
    """Spectral-residual saliency map, normalized to uint8.

    Pipeline: grayscale, downscale so the longer side is at most ``max_side``,
    subtract the 3x3-mean-filtered log amplitude spectrum from itself, invert
    with the original phase, square the magnitude, Gaussian-smooth, upscale to
    the input size and stretch to 0..255. A constant input has zero spectral
    residual and yields an all-zero map.
    """
    arr = np.asarray(img)
    if arr.ndim == 3:
        gray = arr.astype(np.float64) @ _LUMA
    else:
        gray = as_gray(arr).astype(np.float64)
    h, w = gray.shape

    if gray.max() == gray.min():
        return np.zeros((h, w), dtype=np.uint8)

    scale = min(1.0, max_side / max(h, w))
    small_hw = (max(1, round(h * scale)), max(1, round(w * scale)))
    small = resize_bilinear(gray, small_hw) if small_hw != (h, w) else gray

    spectrum = np.fft.fft2(small)
    amplitude = np.abs(spectrum)
    phase = np.angle(spectrum)
    log_amp = np.log(amplitude + 1e-12)
    residual = log_amp - ndimage.uniform_filter(log_amp, size=3, mode="reflect")

    recon = np.fft.ifft2(np.exp(residual + 1j * phase))
    sal = np.abs(recon) ** 2
    sal = ndimage.gaussian_filter(sal, sigma=smooth_sigma)
    if small_hw != (h, w):
        sal = resize_bilinear(sal, (h, w))

    lo, hi = float(sal.min()), float(sal.max())
    if hi <= lo:
        return np.zeros((h, w), dtype=np.uint8)
    return np.floor((sal - lo) / (hi - lo) * 255 + 0.5).astype(np.uint8)


def sibling_saliency_path(image_path: str | Path) -> Path:
    """Conventional location of a precomputed map: image.png -> image.saliency.png."""
    return Path(image_path).with_suffix(".saliency.png")


def saliency_for_scene(scene, image: np.ndarray, root: str | Path = ".") -> np.ndarray:
    """Resolve the saliency map for a scene.

    Precedence: explicit ``scene.saliency_path``, then a ``.saliency.png``
    sibling of the scene image, then the spectral-residual fallback.
    """
    root = Path(root)
    if getattr(scene, "saliency_path", None):
        return _load_map(root / scene.saliency_path, image.shape[:2])
    sibling = sibling_saliency_path(root / scene.image_path)
    if sibling.is_file():
        return _load_map(sibling, image.shape[:2])
    return spectral_residual_saliency(image)


def _load_map(path: Path, hw: tuple[int, int]) -> np.ndarray:
    sal = pngio.read_image(path)
    if sal.ndim == 3:
        sal = sal.max(axis=2)
    if sal.shape != hw:
        sal = np.clip(np.floor(resize_bilinear(sal, hw) + 0.5), 0, 255).astype(np.uint8)
    return sal
