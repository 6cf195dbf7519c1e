"""Synthetic scene composition from harvested object patches.

Objects are cropped out of labeled scenes into a bank, then pasted onto
backgrounds at random poses: plain composition, same-class touching groups,
and composition onto random backgrounds. Visible (modal) masks are derived
from the paste order; heavily occluded instances are dropped from the
annotations while their pixels stay painted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from scipy import ndimage

from . import pngio
from .errors import EmptyBank, EmptyMask, EmptyPool, MissingImage, NoEligibleClass
from .imaging import as_mask, as_rgb, disc_footprint, mask_bbox, resize_bilinear
from .labeling import InstanceAnnotation, SceneRecord

log = logging.getLogger(__name__)

KINDS = ("plain", "neighboring", "random_background")

# salt for deriving the background-pool pick, so the composition stream
# stays identical to compose_scene on the chosen background
_POOL_SALT = 0x6B67


@dataclass
class ObjectBankEntry:
    """One cropped object: tight RGB/mask (and optional depth) patches."""

    entry_id: str
    class_id: int
    rgb_patch: np.ndarray  # (h, w, 3) uint8, zeroed outside the mask
    mask_patch: np.ndarray  # (h, w) bool, nonempty
    depth_patch: np.ndarray | None  # (h, w) uint16 mm or None
    source_scene_id: str


@dataclass
class PlacementParams:
    """Composition knobs. Counts and rotation follow the acquisition recipe:
    3..15 objects at uniform random positions and rotations."""

    count_min: int = 3
    count_max: int = 15
    min_visible_fraction: float = 0.25
    max_attempts: int = 50
    neighbor_group_min: int = 2
    neighbor_group_max: int = 4
    neighbor_gap: int = 2
    neighbor_max_overlap: float = 0.10
    allow_clipping: bool = False
    background_depth_mm: int = 1000

    def __post_init__(self) -> None:
        if not 1 <= self.count_min <= self.count_max:
            raise ValueError(f"bad count range [{self.count_min}, {self.count_max}]")
        if not 0 < self.min_visible_fraction <= 1:
            raise ValueError(f"min_visible_fraction must be in (0, 1], got {self.min_visible_fraction}")
        if self.neighbor_group_min < 2:
            raise ValueError("touching groups need at least 2 members")


@dataclass
class Placement:
    """Where one bank entry landed; z_index is the paste order (larger on top)."""

    entry_id: str
    center_x: float
    center_y: float
    angle: float
    z_index: int

    def to_json(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "center_x": self.center_x,
            "center_y": self.center_y,
            "angle": self.angle,
            "z_index": self.z_index,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Placement":
        return cls(
            entry_id=str(data["entry_id"]),
            center_x=float(data["center_x"]),
            center_y=float(data["center_y"]),
            angle=float(data["angle"]),
            z_index=int(data["z_index"]),
        )


@dataclass
class ComposedScene:
    """A synthesized image plus the placements and surviving annotations.

    ``group_indices`` are the z_index values of the touching-group members of
    a neighboring composition (empty for other kinds).
    """

    image: np.ndarray
    depth: np.ndarray | None
    placements: list[Placement]
    annotations: list[InstanceAnnotation]
    background_id: str
    seed: int
    skipped: list[dict] = field(default_factory=list)
    group_indices: list[int] = field(default_factory=list)
    lighting: dict | None = None


# ---------------------------------------------------------------------------
# rotation resampling


def rotated_size(width: int, height: int, angle: float) -> tuple[int, int]:
    """Axis-aligned extent (w, h) of a width x height patch rotated by angle degrees."""
    rad = math.radians(angle % 360.0)
    c, s = abs(math.cos(rad)), abs(math.sin(rad))
    # the epsilon absorbs float noise at exact multiples of 90 degrees
    w2 = math.ceil(width * c + height * s - 1e-9)
    h2 = math.ceil(width * s + height * c - 1e-9)
    return max(1, w2), max(1, h2)


def rotate_patch(
    rgb: np.ndarray,
    mask: np.ndarray,
    depth: np.ndarray | None,
    angle: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Rotate a patch about its center into its enclosing axis-aligned box.

    RGB is sampled bilinearly (clamp-to-edge); mask and depth use nearest
    neighbor, so an output pixel is foreground iff its nearest source pixel is.
    """
    mask = as_mask(mask)
    h, w = mask.shape
    w2, h2 = rotated_size(w, h, angle)
    rad = math.radians(angle % 360.0)
    cos_t, sin_t = math.cos(rad), math.sin(rad)

    dy = np.arange(h2, dtype=np.float64)[:, None] - (h2 - 1) / 2.0
    dx = np.arange(w2, dtype=np.float64)[None, :] - (w2 - 1) / 2.0
    src_x = cos_t * dx + sin_t * dy + (w - 1) / 2.0
    src_y = -sin_t * dx + cos_t * dy + (h - 1) / 2.0

    # nearest-neighbor lookup for mask/depth
    nx = np.floor(src_x + 0.5).astype(np.intp)
    ny = np.floor(src_y + 0.5).astype(np.intp)
    inside = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
    nxc = np.clip(nx, 0, w - 1)
    nyc = np.clip(ny, 0, h - 1)
    mask_rot = inside & mask[nyc, nxc]

    # bilinear lookup for RGB
    x0 = np.clip(np.floor(src_x), 0, w - 1).astype(np.intp)
    y0 = np.clip(np.floor(src_y), 0, h - 1).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(src_x - x0, 0.0, 1.0)[..., None]
    fy = np.clip(src_y - y0, 0.0, 1.0)[..., None]
    img = as_rgb(rgb).astype(np.float64)
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    rgb_rot = np.floor(top * (1 - fy) + bottom * fy + 0.5).astype(np.uint8)

    depth_rot = None
    if depth is not None:
        depth_rot = np.where(inside, depth[nyc, nxc], 0).astype(np.uint16)
    return rgb_rot, mask_rot, depth_rot


def placement_origin(placement: Placement, patch_hw: tuple[int, int]) -> tuple[int, int]:
    """Top-left paste coordinate (x0, y0) recovered from a placement center."""
    h2, w2 = patch_hw
    x0 = int(round(placement.center_x - (w2 - 1) / 2.0))
    y0 = int(round(placement.center_y - (h2 - 1) / 2.0))
    return x0, y0


# ---------------------------------------------------------------------------
# object bank


def build_object_bank(
    selected: Iterable[InstanceAnnotation],
    scenes: Iterable[SceneRecord] | dict[str, SceneRecord],
    root: str | Path = ".",
) -> list[ObjectBankEntry]:
    """Crop every selected annotation out of its scene image.

    Entries come out in annotation order with ids ``<scene>#<annotation>``, so
    rebuilding from the same inputs reproduces the bank. Annotations whose
    scene image cannot be read are skipped and logged; an empty mask is a
    caller error and raises.
    """
    root = Path(root)
    if not isinstance(scenes, dict):
        scenes = {s.scene_id: s for s in scenes}
    images: dict[str, np.ndarray] = {}
    depths: dict[str, np.ndarray | None] = {}
    entries: list[ObjectBankEntry] = []

    for ann in selected:
        sid = str(ann.scene_or_image_id)
        if not ann.mask.any():
            raise EmptyMask(f"annotation {sid}#{ann.annotation_id} has an empty mask")
        scene = scenes.get(sid)
        if scene is None:
            log.warning("bank: no scene record for %s, skipping", sid)
            continue
        try:
            if sid not in images:
                images[sid] = pngio.read_image(root / scene.image_path)
                depths[sid] = (
                    pngio.read_depth(root / scene.depth_path) if scene.depth_path else None
                )
        except MissingImage as exc:
            log.warning("bank: %s", exc)
            continue

        x, y, w, h = mask_bbox(ann.mask)
        mask_patch = ann.mask[y : y + h, x : x + w].copy()
        rgb_patch = images[sid][y : y + h, x : x + w].copy()
        rgb_patch[~mask_patch] = 0
        depth = depths[sid]
        depth_patch = None
        if depth is not None:
            if depth.shape != ann.mask.shape:
                log.warning(
                    "bank: depth of %s is %s but the image is %s, dropping depth",
                    sid, depth.shape, ann.mask.shape,
                )
            else:
                depth_patch = depth[y : y + h, x : x + w].copy()
        entries.append(
            ObjectBankEntry(
                entry_id=f"{sid}#{ann.annotation_id}",
                class_id=ann.class_id,
                rgb_patch=rgb_patch,
                mask_patch=mask_patch,
                depth_patch=depth_patch,
                source_scene_id=sid,
            )
        )
    return entries


def save_bank(entries: list[ObjectBankEntry], banks_dir: str | Path, name: str) -> Path:
    """Persist a bank as ``banks/<name>.json`` plus patch PNGs."""
    import json

    banks_dir = Path(banks_dir)
    patch_dir = banks_dir / name
    patch_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for i, e in enumerate(entries):
        stem = f"{i:05d}"
        pngio.write_image(patch_dir / f"{stem}_rgb.png", e.rgb_patch)
        pngio.write_mask(patch_dir / f"{stem}_mask.png", e.mask_patch)
        depth_name = None
        if e.depth_patch is not None:
            depth_name = f"{stem}_depth.png"
            pngio.write_depth(patch_dir / depth_name, e.depth_patch)
        records.append(
            {
                "entry_id": e.entry_id,
                "class_id": e.class_id,
                "source_scene_id": e.source_scene_id,
                "rgb": f"{name}/{stem}_rgb.png",
                "mask": f"{name}/{stem}_mask.png",
                "depth": f"{name}/{depth_name}" if depth_name else None,
            }
        )
    out = banks_dir / f"{name}.json"
    out.write_text(json.dumps({"name": name, "entries": records}, indent=2, sort_keys=True) + "\n")
    return out


def load_bank(bank_json: str | Path) -> list[ObjectBankEntry]:
    import json

    bank_json = Path(bank_json)
    data = json.loads(bank_json.read_text())
    base = bank_json.parent
    entries = []
    for rec in data["entries"]:
        entries.append(
            ObjectBankEntry(
                entry_id=rec["entry_id"],
                class_id=int(rec["class_id"]),
                rgb_patch=pngio.read_image(base / rec["rgb"]),
                mask_patch=pngio.read_mask(base / rec["mask"]),
                depth_patch=pngio.read_depth(base / rec["depth"]) if rec.get("depth") else None,
                source_scene_id=rec["source_scene_id"],
            )
        )
    return entries


# ---------------------------------------------------------------------------
# placement machinery


@dataclass
class _Placed:
    entry: ObjectBankEntry
    angle: float
    rgb: np.ndarray
    mask: np.ndarray
    depth: np.ndarray | None
    x0: int
    y0: int

    def placement(self, z_index: int) -> Placement:
        h2, w2 = self.mask.shape
        return Placement(
            entry_id=self.entry.entry_id,
            center_x=self.x0 + (w2 - 1) / 2.0,
            center_y=self.y0 + (h2 - 1) / 2.0,
            angle=self.angle,
            z_index=z_index,
        )


def _rotate_entry(entry: ObjectBankEntry, angle: float):
    return rotate_patch(entry.rgb_patch, entry.mask_patch, entry.depth_patch, angle)


def _place_uniform(
    entry_picker,
    rng: np.random.Generator,
    p: PlacementParams,
    frame_hw: tuple[int, int],
) -> _Placed | None:
    """Draw (entry, angle, position) until the patch fits; None when exhausted."""
    H, W = frame_hw
    for _ in range(p.max_attempts):
        entry = entry_picker(rng)
        angle = float(rng.uniform(0.0, 360.0))
        rgb, mask, depth = _rotate_entry(entry, angle)
        h2, w2 = mask.shape
        if not mask.any():
            continue
        if p.allow_clipping:
            x0 = int(rng.integers(-w2 + 1, W))
            y0 = int(rng.integers(-h2 + 1, H))
        else:
            if w2 > W or h2 > H:
                continue
            x0 = int(rng.integers(0, W - w2 + 1))
            y0 = int(rng.integers(0, H - h2 + 1))
        return _Placed(entry, angle, rgb, mask, depth, x0, y0)
    return None


def _window(union: np.ndarray, x0: int, y0: int, w2: int, h2: int, pad: int) -> np.ndarray:
    """Slice of ``union`` covering the candidate patch grown by ``pad``,
    zero-filled where it reaches outside the frame."""
    H, W = union.shape
    out = np.zeros((h2 + 2 * pad, w2 + 2 * pad), dtype=bool)
    ys0, ys1 = y0 - pad, y0 + h2 + pad
    xs0, xs1 = x0 - pad, x0 + w2 + pad
    cy0, cy1 = max(0, ys0), min(H, ys1)
    cx0, cx1 = max(0, xs0), min(W, xs1)
    if cy0 < cy1 and cx0 < cx1:
        out[cy0 - ys0 : cy1 - ys0, cx0 - xs0 : cx1 - xs0] = union[cy0:cy1, cx0:cx1]
    return out


def _place_near_group(
    entry: ObjectBankEntry,
    group_union: np.ndarray,
    rng: np.random.Generator,
    p: PlacementParams,
) -> _Placed | None:
    """Place a group member so it touches (within ``neighbor_gap``) the union of
    already-placed members while overlapping it by at most ``neighbor_max_overlap``."""
    H, W = group_union.shape
    has_group = bool(group_union.any())
    if has_group:
        bx, by, bw, bh = mask_bbox(group_union)
    gap = int(p.neighbor_gap)
    gap_fp = disc_footprint(gap) if gap > 0 else None

    for _ in range(p.max_attempts):
        angle = float(rng.uniform(0.0, 360.0))
        rgb, mask, depth = _rotate_entry(entry, angle)
        h2, w2 = mask.shape
        if not mask.any() or w2 > W or h2 > H:
            continue
        if not has_group:
            x0 = int(rng.integers(0, W - w2 + 1))
            y0 = int(rng.integers(0, H - h2 + 1))
            return _Placed(entry, angle, rgb, mask, depth, x0, y0)

        # sample near the group so the contact constraint is actually reachable
        lo_x = max(0, bx - w2 - gap)
        hi_x = min(W - w2, bx + bw - 1 + gap)
        lo_y = max(0, by - h2 - gap)
        hi_y = min(H - h2, by + bh - 1 + gap)
        if lo_x > hi_x or lo_y > hi_y:
            continue
        x0 = int(rng.integers(lo_x, hi_x + 1))
        y0 = int(rng.integers(lo_y, hi_y + 1))

        probe = mask if gap_fp is None else ndimage.binary_dilation(
            np.pad(mask, gap), structure=gap_fp, border_value=0
        )
        if not np.any(probe & _window(group_union, x0, y0, w2, h2, gap)):
            continue
        overlap = int(np.count_nonzero(mask & _window(group_union, x0, y0, w2, h2, 0)))
        if overlap / int(mask.sum()) > p.neighbor_max_overlap:
            continue
        return _Placed(entry, angle, rgb, mask, depth, x0, y0)
    return None


# ---------------------------------------------------------------------------
# composition


def _finalize(
    background: np.ndarray,
    background_depth: np.ndarray | None,
    placed: list[_Placed],
    skipped: list[dict],
    p: PlacementParams,
    seed: int,
    background_id: str,
    with_depth: bool,
    group_count: int = 0,
) -> ComposedScene:
    """Paint placements in z order and derive visible-mask annotations."""
    image = as_rgb(background).copy()
    H, W = image.shape[:2]
    owner = np.full((H, W), -1, dtype=np.int32)

    depth_canvas = None
    base_depth = None
    if with_depth:
        if background_depth is None:
            depth_canvas = np.full((H, W), p.background_depth_mm, dtype=np.uint16)
        else:
            depth_canvas = background_depth.astype(np.uint16).copy()
        base_depth = depth_canvas.copy()

    for idx, pl in enumerate(placed):
        h2, w2 = pl.mask.shape
        cy0, cy1 = max(0, pl.y0), min(H, pl.y0 + h2)
        cx0, cx1 = max(0, pl.x0), min(W, pl.x0 + w2)
        if cy0 >= cy1 or cx0 >= cx1:
            continue
        sub = (slice(cy0 - pl.y0, cy1 - pl.y0), slice(cx0 - pl.x0, cx1 - pl.x0))
        m = pl.mask[sub]
        image[cy0:cy1, cx0:cx1][m] = pl.rgb[sub][m]
        owner[cy0:cy1, cx0:cx1][m] = idx

        if depth_canvas is not None:
            region = depth_canvas[cy0:cy1, cx0:cx1]
            if pl.depth is None:
                region[m] = 0  # pasted object without depth: no return
            else:
                d = pl.depth[sub].astype(np.int64)
                valid = m & (d > 0)
                if valid.any():
                    cyc = int(np.clip(round(pl.y0 + (h2 - 1) / 2.0), 0, H - 1))
                    cxc = int(np.clip(round(pl.x0 + (w2 - 1) / 2.0), 0, W - 1))
                    anchor = int(base_depth[cyc, cxc]) or p.background_depth_mm
                    offset = anchor - int(d[valid].min())
                    shifted = np.clip(d + offset, 0, 0xFFFF).astype(np.uint16)
                    region[valid] = shifted[valid]
                region[m & (d <= 0)] = 0

    placements: list[Placement] = []
    annotations: list[InstanceAnnotation] = []
    for idx, pl in enumerate(placed):
        placements.append(pl.placement(z_index=idx))
        visible = owner == idx
        vis_area = int(np.count_nonzero(visible))
        full_area = int(pl.mask.sum())
        if vis_area == 0 or vis_area / full_area < p.min_visible_fraction:
            continue
        annotations.append(
            InstanceAnnotation.from_mask(
                annotation_id=len(annotations) + 1,
                scene_or_image_id=background_id,
                class_id=pl.entry.class_id,
                mask=visible,
            )
        )

    return ComposedScene(
        image=image,
        depth=depth_canvas,
        placements=placements,
        annotations=annotations,
        background_id=background_id,
        seed=seed,
        skipped=skipped,
        group_indices=list(range(group_count)),
    )


def compose_scene(
    bank: list[ObjectBankEntry],
    background: np.ndarray,
    p: PlacementParams | None = None,
    seed: int = 0,
    *,
    background_depth: np.ndarray | None = None,
    with_depth: bool = True,
    background_id: str = "background",
) -> ComposedScene:
    """Paste a random draw of bank objects onto the background.

    Draws a count in [count_min, count_max], then per instance a bank entry,
    a rotation and a position such that the rotated patch box lies inside the
    image (unless clipping is allowed); instances that cannot be placed within
    ``max_attempts`` are skipped and recorded. Deterministic in ``seed``.
    """
    if not bank:
        raise EmptyBank("cannot compose from an empty object bank")
    p = p or PlacementParams()
    rng = np.random.default_rng(seed)
    H, W = as_rgb(background).shape[:2]

    n = int(rng.integers(p.count_min, p.count_max + 1))
    placed: list[_Placed] = []
    skipped: list[dict] = []
    pick = lambda r: bank[int(r.integers(len(bank)))]  # noqa: E731
    for i in range(n):
        result = _place_uniform(pick, rng, p, (H, W))
        if result is None:
            skipped.append({"slot": i, "reason": "placement_exhausted"})
        else:
            placed.append(result)

    return _finalize(
        background, background_depth, placed, skipped, p, seed, background_id, with_depth
    )


def compose_neighboring(
    bank: list[ObjectBankEntry],
    background: np.ndarray,
    p: PlacementParams | None = None,
    seed: int = 0,
    *,
    background_depth: np.ndarray | None = None,
    with_depth: bool = True,
    background_id: str = "background",
) -> ComposedScene:
    """Compose a scene around a touching group of same-class instances.

    A class with at least ``neighbor_group_min`` entries is drawn, then a group
    of distinct entries of that class; the first member is placed uniformly and
    every later member must touch the group (mask dilated by ``neighbor_gap``
    intersects the union) while overlapping it by at most
    ``neighbor_max_overlap`` of its own area. The remaining instance budget is
    filled with plain placements.
    """
    if not bank:
        raise EmptyBank("cannot compose from an empty object bank")
    p = p or PlacementParams()
    rng = np.random.default_rng(seed)
    H, W = as_rgb(background).shape[:2]

    by_class: dict[int, list[int]] = {}
    for i, e in enumerate(bank):
        by_class.setdefault(e.class_id, []).append(i)
    eligible = sorted(c for c, idxs in by_class.items() if len(idxs) >= p.neighbor_group_min)
    if not eligible:
        raise NoEligibleClass(
            f"no class has >= {p.neighbor_group_min} bank entries for a touching group"
        )

    cls = eligible[int(rng.integers(len(eligible)))]
    pool = by_class[cls]
    g_hi = min(p.neighbor_group_max, len(pool))
    g = int(rng.integers(p.neighbor_group_min, g_hi + 1))
    member_idx = rng.choice(len(pool), size=g, replace=False)
    members = [bank[pool[int(i)]] for i in member_idx]
    n_total = int(rng.integers(p.count_min, p.count_max + 1))
    extras = max(0, n_total - g)

    placed: list[_Placed] = []
    skipped: list[dict] = []
    group_union = np.zeros((H, W), dtype=bool)
    for k, entry in enumerate(members):
        result = _place_near_group(entry, group_union, rng, p)
        if result is None:
            skipped.append({"slot": k, "reason": "placement_exhausted", "group": True})
            continue
        placed.append(result)
        h2, w2 = result.mask.shape
        group_union[result.y0 : result.y0 + h2, result.x0 : result.x0 + w2] |= result.mask
    group_count = len(placed)

    pick = lambda r: bank[int(r.integers(len(bank)))]  # noqa: E731
    for i in range(extras):
        result = _place_uniform(pick, rng, p, (H, W))
        if result is None:
            skipped.append({"slot": g + i, "reason": "placement_exhausted"})
        else:
            placed.append(result)

    return _finalize(
        background, background_depth, placed, skipped, p, seed, background_id, with_depth,
        group_count=group_count,
    )


def compose_on_random_background(
    bank: list[ObjectBankEntry],
    background_pool: list[np.ndarray],
    p: PlacementParams | None = None,
    seed: int = 0,
    *,
    target_size: tuple[int, int] | None = None,
    with_depth: bool = True,
) -> ComposedScene:
    """Compose onto a background drawn uniformly from the pool.

    The pool pick uses a seed derived from (seed, salt) so the subsequent
    composition consumes the same random stream as :func:`compose_scene`; a
    pool of one is therefore byte-identical to composing on that background.
    """
    if not background_pool:
        raise EmptyPool("background pool is empty")
    picker = np.random.default_rng(np.random.SeedSequence([int(seed), _POOL_SALT]))
    idx = int(picker.integers(len(background_pool)))
    bg = as_rgb(background_pool[idx])
    if target_size is not None and bg.shape[:2] != tuple(target_size):
        bg = np.clip(np.floor(resize_bilinear(bg, target_size) + 0.5), 0, 255).astype(np.uint8)
    return compose_scene(
        bank,
        bg,
        p,
        seed,
        with_depth=with_depth,
        background_id=f"pool[{idx}]",
    )


# ---------------------------------------------------------------------------
# set generation


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit seed derived from integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def iter_generate(
    bank: list[ObjectBankEntry],
    backgrounds: list[np.ndarray],
    p: PlacementParams,
    kind: str,
    count: int,
    seed: int,
    *,
    target_size: tuple[int, int] | None = None,
    with_depth: bool = True,
) -> Iterator[tuple[int, ComposedScene | None, str | None]]:
    """Yield (index, scene, error) for ``count`` independently seeded scenes.

    ``plain`` and ``neighboring`` compose onto ``backgrounds[0]``;
    ``random_background`` draws from the whole list. Failures are reported in
    the tuple and generation continues.
    """
    kind = kind.replace("-", "_")
    if kind not in KINDS:
        raise ValueError(f"unknown generation kind {kind!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not backgrounds:
        raise EmptyPool("no backgrounds supplied")

    for index in range(count):
        scene_seed = derive_seed(seed, index)
        try:
            if kind == "plain":
                scene = compose_scene(
                    bank, backgrounds[0], p, scene_seed, with_depth=with_depth
                )
            elif kind == "neighboring":
                scene = compose_neighboring(
                    bank, backgrounds[0], p, scene_seed, with_depth=with_depth
                )
            else:
                scene = compose_on_random_background(
                    bank, backgrounds, p, scene_seed,
                    target_size=target_size, with_depth=with_depth,
                )
            yield index, scene, None
        except (EmptyBank, EmptyPool):
            raise
        except Exception as exc:  # per-scene failure: log and continue
            log.warning("scene %d failed: %s", index, exc)
            yield index, None, str(exc)


def generate_set(
    bank: list[ObjectBankEntry],
    backgrounds: list[np.ndarray],
    p: PlacementParams,
    kind: str,
    count: int,
    seed: int,
    **kwargs,
) -> list[ComposedScene]:
    """Materialized form of :func:`iter_generate` (successful scenes only)."""
    return [
        scene
        for _, scene, _ in iter_generate(bank, backgrounds, p, kind, count, seed, **kwargs)
        if scene is not None
    ]


def scene_sidecar(scene: ComposedScene) -> dict:
    """Reproducibility record written next to each generated image."""
    record = {
        "seed": scene.seed,
        "background_id": scene.background_id,
        "placements": [pl.to_json() for pl in scene.placements],
        "skipped": scene.skipped,
        "group_indices": scene.group_indices,
        "annotation_count": len(scene.annotations),
    }
    if scene.lighting is not None:
        record["lighting"] = scene.lighting
    return record
