"""Weak labeling: scene + object-free background -> candidate instance masks.

Two background-subtraction paths (HSV value difference and summed RGB
difference) plus a saliency-thresholding path produce candidate
segmentations per scene; one candidate is selected per scene, either by the
batch heuristic here or by a human through the review service.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import pngio
from .errors import DegenerateHistogram, MaskforgeError
from .imaging import (
    CircularRegion,
    abs_diff_sum,
    as_mask,
    binarize,
    connected_components,
    mask_bbox,
    morph_close,
    morph_erode,
    morph_open,
    otsu_threshold,
    rgb_to_value,
)
from .saliency import saliency_for_scene

CANDIDATE_KINDS = ("hsv", "rgb", "saliency")
DECISIONS = ("hsv", "rgb", "saliency", "reject", "undecided")

# reference width the default structuring-element radii are stated at
_REFERENCE_WIDTH = 1920


@dataclass
class SceneRecord:
    """One acquisition: image, object-free background, class id, turntable."""

    scene_id: str
    image_path: str
    background_path: str
    class_id: int
    turntable: CircularRegion
    background_variant: str = "dark"  # dark | light; acquisition metadata only
    depth_path: str | None = None
    saliency_path: str | None = None

    def to_json(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "image_path": self.image_path,
            "background_path": self.background_path,
            "class_id": self.class_id,
            "turntable": self.turntable.to_json(),
            "background_variant": self.background_variant,
            "depth_path": self.depth_path,
            "saliency_path": self.saliency_path,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SceneRecord":
        return cls(
            scene_id=str(data["scene_id"]),
            image_path=str(data["image_path"]),
            background_path=str(data["background_path"]),
            class_id=int(data["class_id"]),
            turntable=CircularRegion.from_json(data["turntable"]),
            background_variant=str(data.get("background_variant", "dark")),
            depth_path=data.get("depth_path"),
            saliency_path=data.get("saliency_path"),
        )


@dataclass
class LabelerParams:
    """Tuning knobs of the weak labeler.

    ``closing_radius``/``opening_radius`` of None scale the defaults (5 px and
    3 px at 1920 wide) by image width, rounded up, minimum 1.
    ``min_instance_area`` is a fraction of the image area;
    ``max_area_fraction`` caps areas relative to the turntable area.
    """

    closing_radius: int | None = None
    opening_radius: int | None = None
    min_instance_area: float = 0.001
    saliency_t0: int = 40
    saliency_step: int = 10
    max_area_fraction: float = 0.30
    connectivity: int = 8

    def __post_init__(self) -> None:
        if not 0 < self.max_area_fraction < 1:
            raise ValueError(f"max_area_fraction must be in (0, 1), got {self.max_area_fraction}")
        if self.saliency_step < 1:
            raise ValueError(f"saliency_step must be >= 1, got {self.saliency_step}")

    def closing_radius_for(self, width: int) -> int:
        if self.closing_radius is not None:
            return int(self.closing_radius)
        return max(1, math.ceil(5 * width / _REFERENCE_WIDTH))

    def opening_radius_for(self, width: int) -> int:
        if self.opening_radius is not None:
            return int(self.opening_radius)
        return max(1, math.ceil(3 * width / _REFERENCE_WIDTH))


@dataclass
class InstanceAnnotation:
    """One instance mask with its derived box, area and confidence."""

    annotation_id: int
    scene_or_image_id: str | int
    class_id: int
    mask: np.ndarray  # (H, W) bool, visible pixels
    bbox: tuple[int, int, int, int]  # tight (x, y, w, h)
    area: int
    score: float = 1.0

    @classmethod
    def from_mask(
        cls,
        annotation_id: int,
        scene_or_image_id: str | int,
        class_id: int,
        mask: np.ndarray,
        score: float = 1.0,
    ) -> "InstanceAnnotation":
        mask = as_mask(mask)
        return cls(
            annotation_id=annotation_id,
            scene_or_image_id=scene_or_image_id,
            class_id=class_id,
            mask=mask,
            bbox=mask_bbox(mask),
            area=int(np.count_nonzero(mask)),
            score=score,
        )


@dataclass
class CandidateList:
    """Instances proposed by one labeling path."""

    instances: list[InstanceAnnotation] = field(default_factory=list)
    degenerate: bool = False
    final_threshold: int | None = None  # saliency path only


@dataclass
class CandidateSet:
    """The per-scene proposals plus the decision among them."""

    scene_id: str
    hsv: CandidateList = field(default_factory=CandidateList)
    rgb: CandidateList = field(default_factory=CandidateList)
    saliency: CandidateList = field(default_factory=CandidateList)
    decision: str = "undecided"
    decision_source: str | None = None  # human | heuristic
    error: str | None = None

    def candidate(self, kind: str) -> CandidateList:
        if kind not in CANDIDATE_KINDS:
            raise ValueError(f"unknown candidate kind {kind!r}")
        return getattr(self, kind)

    def selected_instances(self) -> list[InstanceAnnotation]:
        if self.decision in CANDIDATE_KINDS:
            return self.candidate(self.decision).instances
        return []


# ---------------------------------------------------------------------------
# labeling paths


def _instances_from_foreground(
    fg: np.ndarray, scene: SceneRecord, p: LabelerParams
) -> list[InstanceAnnotation]:
    """Split a foreground mask into instances and drop specks."""
    labels = connected_components(fg, p.connectivity)
    n = int(labels.max())
    min_pixels = p.min_instance_area * fg.shape[0] * fg.shape[1]
    instances = []
    for label in range(1, n + 1):
        mask = labels == label
        if int(np.count_nonzero(mask)) < min_pixels:
            continue
        instances.append(
            InstanceAnnotation.from_mask(
                annotation_id=len(instances) + 1,
                scene_or_image_id=scene.scene_id,
                class_id=scene.class_id,
                mask=mask,
            )
        )
    return instances


def _diff_instances(
    diff: np.ndarray, scene: SceneRecord, p: LabelerParams, turntable_mask: np.ndarray
) -> CandidateList:
    try:
        t = otsu_threshold(diff)
    except DegenerateHistogram:
        # a constant difference image carries no foreground evidence
        return CandidateList(instances=[], degenerate=True)
    fg = binarize(diff, t) & turntable_mask
    fg = morph_close(fg, p.closing_radius_for(diff.shape[1]))
    return CandidateList(instances=_instances_from_foreground(fg, scene, p))


def bgsub_candidates(
    scene: SceneRecord,
    p: LabelerParams,
    image: np.ndarray | None = None,
    background: np.ndarray | None = None,
    root: str | Path = ".",
) -> tuple[CandidateList, CandidateList]:
    """Background-subtraction candidates: (HSV-value path, RGB-diff path).

    Each path thresholds its difference image with Otsu, keeps the turntable
    area, closes with a disc and splits into connected components; components
    below the minimum area are dropped. A constant difference image (e.g. the
    scene equals its background) yields an empty candidate list, not an error.
    """
    root = Path(root)
    if image is None:
        image = pngio.read_image(root / scene.image_path)
    if background is None:
        background = pngio.read_image(root / scene.background_path)
    if image.shape != background.shape:
        raise MaskforgeError(
            f"scene {scene.scene_id}: image {image.shape} vs background {background.shape}"
        )

    h, w = image.shape[:2]
    tt = scene.turntable.to_mask(h, w)

    v_img = rgb_to_value(image).astype(np.int16)
    v_bg = rgb_to_value(background).astype(np.int16)
    hsv_diff = np.abs(v_img - v_bg).astype(np.uint8)
    rgb_diff = abs_diff_sum(image, background)

    return (
        _diff_instances(hsv_diff, scene, p, tt),
        _diff_instances(rgb_diff, scene, p, tt),
    )


def saliency_instances(
    sal: np.ndarray, scene: SceneRecord, p: LabelerParams
) -> CandidateList:
    """Threshold a saliency map into instances.

    Starts at ``saliency_t0`` and raises the threshold by ``saliency_step``
    while the in-turntable foreground exceeds ``max_area_fraction`` of the
    turntable area. The result is flagged degenerate when the ladder runs past
    255 or the surviving foreground is empty.
    """
    h, w = sal.shape[:2]
    tt = scene.turntable.to_mask(h, w)
    tt_area = int(np.count_nonzero(tt))
    cap = p.max_area_fraction * tt_area

    t = int(p.saliency_t0)
    fg = binarize(sal, t) & tt
    while int(np.count_nonzero(fg)) > cap:
        t += int(p.saliency_step)
        if t > 255:
            return CandidateList(instances=[], degenerate=True, final_threshold=t)
        fg = binarize(sal, t) & tt

    if not fg.any():
        return CandidateList(instances=[], degenerate=True, final_threshold=t)

    fg = morph_close(fg, p.closing_radius_for(w))
    fg = morph_open(fg, p.opening_radius_for(w))
    return CandidateList(
        instances=_instances_from_foreground(fg, scene, p),
        final_threshold=t,
    )


# ---------------------------------------------------------------------------
# selection


def auto_select(c: CandidateSet, p: LabelerParams, turntable: CircularRegion) -> CandidateSet:
    """Heuristic stand-in for the human choice among the three candidates.

    A candidate list is valid when it is nonempty, every instance area lies in
    [min area, max_area_fraction * turntable area] and the total area does not
    exceed that cap. Among valid lists the one with the fewest instances wins
    (least fragmentation); ties go hsv > rgb > saliency. No valid list means
    the scene is rejected.
    """
    if c.decision != "undecided":
        raise ValueError(f"scene {c.scene_id}: decision already made ({c.decision})")

    def validity(cand: CandidateList) -> bool:
        if not cand.instances:
            return False
        h, w = cand.instances[0].mask.shape
        min_pixels = p.min_instance_area * h * w
        cap = p.max_area_fraction * turntable.pixel_area(h, w)
        areas = [inst.area for inst in cand.instances]
        if any(a < min_pixels or a > cap for a in areas):
            return False
        return 0 < sum(areas) <= cap

    valid = {kind: c.candidate(kind) for kind in CANDIDATE_KINDS if validity(c.candidate(kind))}
    if not valid:
        return replace(c, decision="reject", decision_source="heuristic")
    fewest = min(len(cand.instances) for cand in valid.values())
    for kind in CANDIDATE_KINDS:  # declaration order is the tie-break priority
        if kind in valid and len(valid[kind].instances) == fewest:
            return replace(c, decision=kind, decision_source="heuristic")
    raise AssertionError("unreachable")


SaliencySource = Callable[[SceneRecord, np.ndarray], np.ndarray]


def label_dataset(
    scenes: Iterable[SceneRecord],
    p: LabelerParams,
    saliency_source: SaliencySource | None = None,
    root: str | Path = ".",
    prior_decisions: dict[str, tuple[str, str]] | None = None,
    select: bool = True,
) -> tuple[list[CandidateSet], list[InstanceAnnotation]]:
    """Label a batch of scenes and pick one candidate per scene.

    ``prior_decisions`` maps scene_id -> (decision, source); human decisions
    are preserved, anything else is re-derived by :func:`auto_select` when
    ``select`` is set. Per-scene failures are recorded on the CandidateSet
    (empty candidates, decision ``reject``) and never abort the batch.

    Returns the per-scene candidate sets and the selected annotations of all
    non-rejected scenes.
    """
    root = Path(root)
    prior_decisions = prior_decisions or {}
    candidate_sets: list[CandidateSet] = []
    selected: list[InstanceAnnotation] = []

    for scene in scenes:
        cset = CandidateSet(scene_id=scene.scene_id)
        try:
            image = pngio.read_image(root / scene.image_path)
            cset.hsv, cset.rgb = bgsub_candidates(scene, p, image=image, root=root)
            if saliency_source is not None:
                sal = saliency_source(scene, image)
            else:
                sal = saliency_for_scene(scene, image, root=root)
            cset.saliency = saliency_instances(sal, scene, p)
        except MaskforgeError as exc:
            cset = CandidateSet(
                scene_id=scene.scene_id,
                decision="reject",
                decision_source="heuristic",
                error=str(exc),
            )
            candidate_sets.append(cset)
            continue

        prior = prior_decisions.get(scene.scene_id)
        if prior is not None and prior[1] == "human":
            cset.decision, cset.decision_source = prior
        elif select:
            cset = auto_select(cset, p, scene.turntable)
        candidate_sets.append(cset)
        selected.extend(cset.selected_instances())

    return candidate_sets, selected


# ---------------------------------------------------------------------------
# diagnostics

_PALETTE = np.array(
    [
        (230, 60, 60),
        (60, 180, 75),
        (65, 110, 235),
        (240, 180, 40),
        (170, 70, 200),
        (70, 210, 210),
        (245, 130, 45),
        (150, 220, 90),
    ],
    dtype=np.uint8,
)


def render_candidate_overlay(
    image: np.ndarray, instances: list[InstanceAnnotation], alpha: float = 0.4
) -> np.ndarray:
    """Instance overlay for review: translucent fill plus a solid boundary."""
    out = image.astype(np.float64).copy()
    for idx, inst in enumerate(instances):
        color = _PALETTE[idx % len(_PALETTE)].astype(np.float64)
        mask = inst.mask
        out[mask] = out[mask] * (1 - alpha) + color * alpha
        interior = morph_erode(mask, 1) if mask.any() else mask
        boundary = mask & ~interior
        out[boundary] = color
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
