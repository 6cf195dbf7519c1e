"""Command-line interface.

Subcommands: label, select, bank, augment, export, eval, downscale, serve.
Exit codes: 0 success, 1 usage error, 2 data error. Each batch stage writes a
machine-readable run summary next to its outputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import MaskforgeError
from .manifest import Manifest
from .pipeline import (
    bank_from_manifest,
    downscale_set,
    eval_files,
    export_manifest_coco,
    label_manifest,
    load_background_pool,
    select_manifest,
    write_generated_set,
    write_summary,
)

log = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--manifest", type=Path, help="dataset manifest JSON")
    common.add_argument("--config", type=Path, default=None, help="pipeline config JSON")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for batch stages")

    parser = _Parser(prog="maskforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("label", parents=[common], help="run the weak labeler over the manifest")
    p.add_argument("--select", action="store_true", help="also auto-select after labeling")

    sub.add_parser("select", parents=[common], help="auto-select undecided scenes")

    p = sub.add_parser("bank", parents=[common], help="build an object bank from selected annotations")
    p.add_argument("--name", default="default", help="bank name")

    p = sub.add_parser("augment", parents=[common], help="generate a synthetic scene set")
    p.add_argument(
        "--kind",
        choices=["plain", "neighboring", "random-background", "relight"],
        default="plain",
    )
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bank", default="default", help="bank name under <root>/banks")
    p.add_argument("--background", type=Path, default=None, help="base background PNG")
    p.add_argument(
        "--backgrounds", type=Path, default=None,
        help="background pool: a directory of PNGs (random-background kind)",
    )
    p.add_argument("--name", default=None, help="set name (default <kind>-<count>-s<seed>)")
    p.add_argument("--out", type=Path, default=None, help="output dir (default <root>/generated/<name>)")
    p.add_argument(
        "--relight-base",
        choices=["plain", "neighboring", "random-background"],
        default="plain",
        help="composition the relight kind shades",
    )

    p = sub.add_parser("export", parents=[common], help="export selected annotations as COCO")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", parents=[common], help="mask mAP of predictions vs ground truth")
    p.add_argument("--gt", type=Path, required=True)
    p.add_argument("--pred", type=Path, required=True)

    p = sub.add_parser("downscale", parents=[common], help="downscale a generated set")
    p.add_argument("--input", type=Path, required=True, help="set dir with images/ + annotations.json")
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--factor", type=int, required=True)

    p = sub.add_parser("serve", parents=[common], help="run the review service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", type=Path, default=None, help="directory with the review UI bundle")

    return parser


def _require_manifest(args) -> tuple[Manifest, Path]:
    if args.manifest is None:
        raise _UsageError("--manifest is required for this command")
    manifest = Manifest.load(args.manifest)
    return manifest, Path(args.manifest).parent


def _run(args) -> int:
    cfg = load_config(args.config) if getattr(args, "config", None) else load_config(None)

    if args.command == "label":
        manifest, root = _require_manifest(args)
        summary = label_manifest(manifest, cfg.labeler, root, jobs=args.jobs, select=args.select)
        print(f"labeled {summary['labeled']}/{summary['scenes']} scenes ({summary['failed']} failed)")
        return 0

    if args.command == "select":
        manifest, root = _require_manifest(args)
        summary = select_manifest(manifest, cfg.labeler, root)
        print(f"decided {summary['decided']} scenes; progress {summary['progress']}")
        return 0

    if args.command == "bank":
        manifest, root = _require_manifest(args)
        entries, path = bank_from_manifest(manifest, root, args.name)
        print(f"bank {args.name}: {len(entries)} entries -> {path}")
        return 0

    if args.command == "augment":
        manifest, root = _require_manifest(args)
        from .augment import load_bank

        bank_path = root / "banks" / f"{args.bank}.json"
        bank = load_bank(bank_path)
        if args.backgrounds is not None:
            backgrounds = load_background_pool([args.backgrounds])
        elif args.background is not None:
            backgrounds = load_background_pool([args.background])
        else:
            raise _UsageError("augment needs --background or --backgrounds")
        name = args.name or f"{args.kind}-{args.count}-s{args.seed}"
        out_dir = args.out or (root / "generated" / name)
        summary = write_generated_set(
            manifest,
            bank,
            backgrounds,
            cfg,
            kind=args.kind,
            count=args.count,
            seed=args.seed,
            out_dir=out_dir,
            set_name=name,
            jobs=args.jobs,
            relight_base=args.relight_base.replace("-", "_"),
        )
        print(
            f"set {name}: {summary['generated']}/{args.count} scenes, "
            f"{summary['annotations']} annotations -> {out_dir}"
        )
        return 0

    if args.command == "export":
        manifest, root = _require_manifest(args)
        doc = export_manifest_coco(manifest, root, args.out)
        write_summary(
            Path(args.out).parent,
            Path(args.out).stem + ".summary",
            {
                "out": str(args.out),
                "images": len(doc["images"]),
                "annotations": len(doc["annotations"]),
                "categories": len(doc["categories"]),
            },
        )
        print(f"exported {len(doc['annotations'])} annotations -> {args.out}")
        return 0

    if args.command == "eval":
        thresholds = tuple(cfg.eval.get("iou_thresholds", [])) or None
        report = (
            eval_files(args.gt, args.pred, thresholds=thresholds)
            if thresholds
            else eval_files(args.gt, args.pred)
        )
        write_summary(Path(args.pred).parent, Path(args.pred).stem + ".eval", report.to_json())
        print(f"mAP {report.map:.3f}")
        return 0

    if args.command == "downscale":
        summary = downscale_set(args.input, args.output, args.factor)
        print(
            f"downscaled {summary['images']} images by {args.factor}; "
            f"{summary['annotations_out']}/{summary['annotations_in']} annotations kept"
        )
        return 0

    if args.command == "serve":
        if args.manifest is None:
            raise _UsageError("--manifest is required for this command")
        from .server import serve_review

        serve_review(
            args.manifest, port=args.port, host=args.host,
            dataset_root=Path(args.manifest).parent, ui_dir=args.ui,
        )
        return 0

    raise _UsageError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except _UsageError as exc:
        message = str(exc)
        if "usage" not in message:
            message = f"{message}\n{parser.format_usage()}"
        print(message, file=sys.stderr)
        return 1
    except (MaskforgeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
