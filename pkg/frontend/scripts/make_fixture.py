#!/usr/bin/env python3
"""Build the 5-scene fixture dataset the review-UI tests run against.

Usage: make_fixture.py <output-dir>

Creates simple turntable acquisitions (uniform background, one bright shape),
runs the weak labeler so every scene has three candidates and overlays, and
leaves all decisions undecided for the UI to make.
"""

import sys
from pathlib import Path

import numpy as np

from maskforge import CircularRegion, LabelerParams, Manifest, SceneRecord
from maskforge import pngio
from maskforge.pipeline import label_manifest


def build(root: Path) -> None:
    root.mkdir(parents=True, exist_ok=True)
    manifest = Manifest.new([(1, "widget"), (2, "gadget")], path=root / "manifest.json")
    rng = np.random.default_rng(1234)
    height, width = 180, 240

    for i in range(5):
        background = np.zeros((height, width, 3), dtype=np.uint8)
        background[:] = (60, 40, 30)
        image = background.copy()
        yy, xx = np.mgrid[0:height, 0:width]
        cx = int(rng.integers(90, 150))
        cy = int(rng.integers(70, 110))
        r = int(rng.integers(18, 30))
        shape = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        image[shape] = tuple(int(c) for c in rng.integers(170, 240, 3))

        scene_id = f"scene{i:03d}"
        scene_dir = root / "scenes" / scene_id
        pngio.write_image(scene_dir / "image.png", image)
        pngio.write_image(scene_dir / "background.png", background)
        manifest.add_scene(
            SceneRecord(
                scene_id=scene_id,
                image_path=f"scenes/{scene_id}/image.png",
                background_path=f"scenes/{scene_id}/background.png",
                class_id=(i % 2) + 1,
                turntable=CircularRegion(width / 2, height / 2, 80),
            )
        )

    manifest.save()
    label_manifest(manifest, LabelerParams(), root, select=False)


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        sys.exit(1)
    build(Path(sys.argv[1]))
