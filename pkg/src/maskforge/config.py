"""Pipeline configuration file: JSON with sections ``labeler``, ``augment``,
``lighting``, ``camera`` and ``eval``, keys named after the corresponding
parameter objects. Unknown sections or keys are rejected to catch typos."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .augment import PlacementParams
from .labeling import LabelerParams
from .relight import CameraIntrinsics, LightingRanges

_SECTIONS = ("labeler", "augment", "lighting", "camera", "eval")


@dataclass
class PipelineConfig:
    labeler: LabelerParams = field(default_factory=LabelerParams)
    augment: PlacementParams = field(default_factory=PlacementParams)
    lighting: LightingRanges = field(default_factory=LightingRanges)
    camera: CameraIntrinsics | None = None  # None: derived from image size
    eval: dict = field(default_factory=dict)


def _build(cls, section: str, data: dict, aliases: dict | None = None):
    aliases = aliases or {}
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        name = aliases.get(key, key)
        if callable(name):
            name(kwargs, value)
            continue
        if name not in known:
            raise ValueError(f"config section {section!r}: unknown key {key!r}")
        if isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    return cls(**kwargs)


def _group_size(kwargs: dict, value) -> None:
    lo, hi = (int(v) for v in value)
    kwargs["neighbor_group_min"] = lo
    kwargs["neighbor_group_max"] = hi


def load_config(path: str | Path | None) -> PipelineConfig:
    """Load a config file; a path of None yields all defaults."""
    if path is None:
        return PipelineConfig()
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")

    cfg = PipelineConfig()
    if "labeler" in raw:
        cfg.labeler = _build(LabelerParams, "labeler", raw["labeler"])
    if "augment" in raw:
        cfg.augment = _build(
            PlacementParams, "augment", raw["augment"],
            aliases={"neighbor_group_size": _group_size},
        )
    if "lighting" in raw:
        cfg.lighting = _build(LightingRanges, "lighting", raw["lighting"])
    if "camera" in raw and raw["camera"] is not None:
        cfg.camera = _build(CameraIntrinsics, "camera", raw["camera"])
    if "eval" in raw:
        section = raw["eval"]
        unknown = set(section) - {"iou_thresholds"}
        if unknown:
            raise ValueError(f"config section 'eval': unknown keys {sorted(unknown)}")
        cfg.eval = dict(section)
    return cfg


def config_to_json(cfg: PipelineConfig) -> dict:
    return {
        "labeler": dataclasses.asdict(cfg.labeler),
        "augment": dataclasses.asdict(cfg.augment),
        "lighting": dataclasses.asdict(cfg.lighting),
        "camera": dataclasses.asdict(cfg.camera) if cfg.camera else None,
        "eval": cfg.eval,
    }


def config_digest(cfg: PipelineConfig) -> str:
    payload = json.dumps(config_to_json(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:12]
