"""The dataset manifest: one JSON file recording scenes, candidate
segmentations, decisions and generated sets.

Writes are atomic (temp file + replace) and serialized through an internal
lock so the review service and batch stages never corrupt the file.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path


from .errors import (
    DecisionConflict,
    IntegrityError,
    InvalidChoice,
    ParseError,
    UnknownScene,
)
from .imaging import rle_decode, rle_encode
from .labeling import (
    CANDIDATE_KINDS,
    CandidateList,
    CandidateSet,
    InstanceAnnotation,
    SceneRecord,
)

SCHEMA_VERSION = 1
VALID_CHOICES = ("hsv", "rgb", "saliency", "reject")


def _annotation_to_json(ann: InstanceAnnotation) -> dict:
    h, w = ann.mask.shape
    return {
        "annotation_id": ann.annotation_id,
        "class_id": ann.class_id,
        "size": [int(h), int(w)],
        "rle": rle_encode(ann.mask),
        "bbox": [int(v) for v in ann.bbox],
        "area": int(ann.area),
        "score": float(ann.score),
    }


def _annotation_from_json(data: dict, scene_id: str) -> InstanceAnnotation:
    h, w = (int(v) for v in data["size"])
    return InstanceAnnotation(
        annotation_id=int(data["annotation_id"]),
        scene_or_image_id=scene_id,
        class_id=int(data["class_id"]),
        mask=rle_decode(data["rle"], width=w, height=h),
        bbox=tuple(int(v) for v in data["bbox"]),
        area=int(data["area"]),
        score=float(data["score"]),
    )


def _candidate_list_to_json(cl: CandidateList) -> dict:
    out: dict = {
        "instances": [_annotation_to_json(a) for a in cl.instances],
        "degenerate": cl.degenerate,
    }
    if cl.final_threshold is not None:
        out["final_threshold"] = cl.final_threshold
    return out


def _candidate_list_from_json(data: dict, scene_id: str) -> CandidateList:
    return CandidateList(
        instances=[_annotation_from_json(a, scene_id) for a in data.get("instances", [])],
        degenerate=bool(data.get("degenerate", False)),
        final_threshold=data.get("final_threshold"),
    )


class Manifest:
    """In-memory view of the manifest JSON with serialized, atomic writes."""

    def __init__(self, data: dict, path: str | Path | None = None):
        self.data = data
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._index = {s["record"]["scene_id"]: i for i, s in enumerate(data["scenes"])}
        self._validate()

    # -- construction ------------------------------------------------------

    @classmethod
    def new(
        cls, categories: list[tuple[int, str]], path: str | Path | None = None
    ) -> "Manifest":
        data = {
            "version": SCHEMA_VERSION,
            "categories": [{"id": int(c), "name": str(n)} for c, n in categories],
            "scenes": [],
            "generated_sets": [],
        }
        return cls(data, path)

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read manifest {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from exc
        return cls(data, path)

    def _validate(self) -> None:
        ids = [s["record"]["scene_id"] for s in self.data["scenes"]]
        if len(ids) != len(set(ids)):
            raise IntegrityError("duplicate scene ids in manifest")
        cat_ids = [c["id"] for c in self.data["categories"]]
        if len(cat_ids) != len(set(cat_ids)):
            raise IntegrityError("duplicate category ids in manifest")
        cat_set = set(cat_ids)
        for s in self.data["scenes"]:
            if s["record"]["class_id"] not in cat_set:
                raise IntegrityError(
                    f"scene {s['record']['scene_id']} references unknown class "
                    f"{s['record']['class_id']}"
                )
            decision = s.get("decision", "undecided")
            if decision in CANDIDATE_KINDS and not s.get("candidates"):
                raise IntegrityError(
                    f"scene {s['record']['scene_id']} decision {decision} has no candidates"
                )

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path | None = None) -> Path:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no manifest path given")
        self.path = target
        target.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(self.data, indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, target)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return target

    # -- scenes ------------------------------------------------------------

    @property
    def categories(self) -> list[tuple[int, str]]:
        return [(c["id"], c["name"]) for c in self.data["categories"]]

    def scene_ids(self) -> list[str]:
        return [s["record"]["scene_id"] for s in self.data["scenes"]]

    def add_scene(self, record: SceneRecord) -> None:
        if record.scene_id in self._index:
            raise IntegrityError(f"duplicate scene id {record.scene_id}")
        if record.class_id not in {c for c, _ in self.categories}:
            raise IntegrityError(f"unknown class id {record.class_id}")
        self.data["scenes"].append(
            {
                "record": record.to_json(),
                "candidates": None,
                "decision": "undecided",
                "decision_source": None,
                "revision": 0,
                "error": None,
            }
        )
        self._index[record.scene_id] = len(self.data["scenes"]) - 1

    def scene(self, scene_id: str) -> dict:
        try:
            return self.data["scenes"][self._index[scene_id]]
        except KeyError:
            raise UnknownScene(f"unknown scene {scene_id!r}") from None

    def scene_record(self, scene_id: str) -> SceneRecord:
        return SceneRecord.from_json(self.scene(scene_id)["record"])

    def scene_records(self) -> list[SceneRecord]:
        return [SceneRecord.from_json(s["record"]) for s in self.data["scenes"]]

    # -- candidates and decisions -------------------------------------------

    def set_candidates(self, cset: CandidateSet) -> None:
        entry = self.scene(cset.scene_id)
        entry["candidates"] = {
            kind: _candidate_list_to_json(cset.candidate(kind)) for kind in CANDIDATE_KINDS
        }
        entry["decision"] = cset.decision
        entry["decision_source"] = cset.decision_source
        entry["error"] = cset.error
        entry["revision"] = int(entry.get("revision", 0)) + 1

    def candidate_set(self, scene_id: str) -> CandidateSet | None:
        entry = self.scene(scene_id)
        if not entry.get("candidates"):
            return None
        cands = entry["candidates"]
        return CandidateSet(
            scene_id=scene_id,
            hsv=_candidate_list_from_json(cands["hsv"], scene_id),
            rgb=_candidate_list_from_json(cands["rgb"], scene_id),
            saliency=_candidate_list_from_json(cands["saliency"], scene_id),
            decision=entry.get("decision", "undecided"),
            decision_source=entry.get("decision_source"),
            error=entry.get("error"),
        )

    def decisions(self) -> dict[str, tuple[str, str]]:
        out = {}
        for s in self.data["scenes"]:
            if s.get("decision_source"):
                out[s["record"]["scene_id"]] = (s["decision"], s["decision_source"])
        return out

    def set_decision(
        self,
        scene_id: str,
        choice: str,
        source: str = "human",
        expect_revision: int | None = None,
        save: bool = True,
    ) -> dict:
        """Record a decision; returns a copy of the updated scene entry.

        With ``expect_revision``, a stale revision raises DecisionConflict and
        leaves the entry untouched (the caller re-reads and retries; the last
        accepted write wins).
        """
        if choice not in VALID_CHOICES:
            raise InvalidChoice(f"choice must be one of {VALID_CHOICES}, got {choice!r}")
        with self._lock:
            entry = self.scene(scene_id)
            if expect_revision is not None and int(expect_revision) != entry["revision"]:
                raise DecisionConflict(
                    f"scene {scene_id} is at revision {entry['revision']}, "
                    f"write expected {expect_revision}"
                )
            if choice in CANDIDATE_KINDS and not entry.get("candidates"):
                raise InvalidChoice(f"scene {scene_id} has no candidates to choose from")
            entry["decision"] = choice
            entry["decision_source"] = source
            entry["revision"] = int(entry["revision"]) + 1
            if save and self.path is not None:
                self.save()
            return json.loads(json.dumps(entry))

    def progress(self) -> dict:
        counts = {"total": 0, "undecided": 0, "decided": 0, "rejected": 0}
        by_choice = {kind: 0 for kind in CANDIDATE_KINDS}
        for s in self.data["scenes"]:
            counts["total"] += 1
            decision = s.get("decision", "undecided")
            if decision == "undecided":
                counts["undecided"] += 1
            elif decision == "reject":
                counts["rejected"] += 1
            else:
                counts["decided"] += 1
                by_choice[decision] += 1
        counts["by_choice"] = by_choice
        return counts

    def selected_annotations(self) -> list[InstanceAnnotation]:
        """Annotations of the chosen candidate of every decided, non-rejected scene."""
        out: list[InstanceAnnotation] = []
        for s in self.data["scenes"]:
            decision = s.get("decision", "undecided")
            if decision not in CANDIDATE_KINDS or not s.get("candidates"):
                continue
            sid = s["record"]["scene_id"]
            chosen = s["candidates"][decision]
            out.extend(_annotation_from_json(a, sid) for a in chosen.get("instances", []))
        return out

    # -- generated sets ------------------------------------------------------

    def record_generated_set(
        self, name: str, kind: str, count: int, seed: int, config_digest: str
    ) -> None:
        entry = {
            "name": name,
            "kind": kind,
            "count": int(count),
            "seed": int(seed),
            "config_digest": config_digest,
        }
        sets = [g for g in self.data["generated_sets"] if g["name"] != name]
        sets.append(entry)
        self.data["generated_sets"] = sets
