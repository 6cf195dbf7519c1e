"""Worker-process paths: results must not depend on the job count."""

import numpy as np

from helpers import BG_COLOR, make_dataset
from maskforge import pngio
from maskforge.cli import main


def test_label_and_augment_identical_across_job_counts(tmp_path):
    roots = []
    for jobs in (1, 2):
        root = tmp_path / f"jobs{jobs}"
        make_dataset(root, n_scenes=4, seed=6)
        bg = np.zeros((240, 320, 3), dtype=np.uint8)
        bg[:] = BG_COLOR
        pngio.write_image(root / "bg.png", bg)
        manifest_arg = ["--manifest", str(root / "manifest.json")]
        assert main(["label", *manifest_arg, "--select", "--jobs", str(jobs)]) == 0
        assert main(["bank", *manifest_arg, "--jobs", str(jobs)]) == 0
        assert main([
            "augment", *manifest_arg, "--count", "8", "--seed", "3",
            "--background", str(root / "bg.png"),
            "--name", "set", "--jobs", str(jobs),
        ]) == 0
        roots.append(root)

    a, b = roots
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    images = sorted((a / "generated" / "set" / "images").glob("*.png"))
    assert len(images) == 8
    for img in images:
        assert img.read_bytes() == (b / "generated" / "set" / "images" / img.name).read_bytes()
    assert (a / "generated" / "set" / "annotations.json").read_bytes() == (
        b / "generated" / "set" / "annotations.json"
    ).read_bytes()
