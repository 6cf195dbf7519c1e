"""maskforge: single-class turntable shots in, annotated instance-segmentation
training data out.

Stages: weak labeling by background subtraction and saliency thresholding,
object-bank harvesting, synthetic scene composition (plain, touching groups,
random backgrounds), depth-based Phong relighting, COCO-style export and mask
mAP evaluation, plus an HTTP review service for the human decision step.
"""

from .augment import (
    ComposedScene,
    ObjectBankEntry,
    Placement,
    PlacementParams,
    build_object_bank,
    compose_neighboring,
    compose_on_random_background,
    compose_scene,
    derive_seed,
    generate_set,
    iter_generate,
    rotate_patch,
)
from .errors import MaskforgeError
from .evaluate import IOU_THRESHOLDS, EvalReport, evaluate_map
from .imaging import (
    CircularRegion,
    abs_diff_sum,
    binarize,
    connected_components,
    disc_footprint,
    mask_bbox,
    mask_iou,
    morph_close,
    morph_open,
    otsu_threshold,
    rgb_to_value,
    rle_decode,
    rle_encode,
)
from .labeling import (
    CandidateList,
    CandidateSet,
    InstanceAnnotation,
    LabelerParams,
    SceneRecord,
    auto_select,
    bgsub_candidates,
    label_dataset,
    saliency_instances,
)
from .manifest import Manifest
from .relight import (
    CameraIntrinsics,
    LightingRanges,
    LightingSpec,
    PhongMaterial,
    SpotLight,
    depth_to_points,
    normals_from_depth,
    phong_shade,
    relight_scene,
    sample_lighting,
)
from .saliency import spectral_residual_saliency

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics",
    "CandidateList",
    "CandidateSet",
    "CircularRegion",
    "ComposedScene",
    "EvalReport",
    "IOU_THRESHOLDS",
    "InstanceAnnotation",
    "LabelerParams",
    "LightingRanges",
    "LightingSpec",
    "Manifest",
    "MaskforgeError",
    "ObjectBankEntry",
    "PhongMaterial",
    "Placement",
    "PlacementParams",
    "SceneRecord",
    "SpotLight",
    "abs_diff_sum",
    "auto_select",
    "bgsub_candidates",
    "binarize",
    "build_object_bank",
    "compose_neighboring",
    "compose_on_random_background",
    "compose_scene",
    "connected_components",
    "depth_to_points",
    "derive_seed",
    "disc_footprint",
    "evaluate_map",
    "generate_set",
    "iter_generate",
    "label_dataset",
    "mask_bbox",
    "mask_iou",
    "morph_close",
    "morph_open",
    "normals_from_depth",
    "otsu_threshold",
    "phong_shade",
    "relight_scene",
    "rgb_to_value",
    "rle_decode",
    "rle_encode",
    "rotate_patch",
    "saliency_instances",
    "sample_lighting",
    "spectral_residual_saliency",
]
