import json
import threading

import pytest
from fastapi.testclient import TestClient

from helpers import make_dataset
from maskforge import LabelerParams, Manifest
from maskforge.pipeline import label_manifest
from maskforge.server import create_app


@pytest.fixture()
def dataset(tmp_path):
    manifest, _ = make_dataset(tmp_path, n_scenes=3, seed=0)
    label_manifest(manifest, LabelerParams(), tmp_path, select=False)
    return tmp_path


@pytest.fixture()
def client(dataset):
    app = create_app(dataset / "manifest.json")
    with TestClient(app) as c:
        yield c


class TestSceneEndpoints:
    def test_list_scenes_paged(self, client):
        body = client.get("/api/scenes").json()
        assert body["total"] == 3
        assert len(body["scenes"]) == 3
        assert body["scenes"][0]["decision"] == "undecided"

        body = client.get("/api/scenes", params={"page": 2, "page_size": 2}).json()
        assert len(body["scenes"]) == 1

    def test_filters(self, client):
        sid = client.get("/api/scenes").json()["scenes"][0]["scene_id"]
        client.post(f"/api/scenes/{sid}/decision", json={"choice": "rgb"})
        assert client.get("/api/scenes", params={"filter": "undecided"}).json()["total"] == 2
        assert client.get("/api/scenes", params={"filter": "decided"}).json()["total"] == 1
        assert client.get("/api/scenes", params={"filter": "rejected"}).json()["total"] == 0
        assert client.get("/api/scenes", params={"filter": "bogus"}).status_code == 400

    def test_scene_detail_has_urls_and_stats(self, client):
        body = client.get("/api/scenes").json()
        sid = body["scenes"][0]["scene_id"]
        detail = client.get(f"/api/scenes/{sid}").json()
        assert detail["image_url"].startswith("/files/")
        for kind in ("hsv", "rgb", "saliency"):
            cand = detail["candidates"][kind]
            assert cand["overlay_url"].endswith(f"overlays/{kind}.png")
            assert cand["instance_count"] == len(cand["areas"])
            assert cand["total_area"] == sum(cand["areas"])

    def test_static_files_served(self, client):
        detail = client.get("/api/scenes/scene000").json()
        image = client.get(detail["image_url"])
        assert image.status_code == 200
        overlay = client.get(detail["candidates"]["hsv"]["overlay_url"])
        assert overlay.status_code == 200

    def test_unknown_scene_404(self, client):
        assert client.get("/api/scenes/ghost").status_code == 404


class TestDecisionEndpoint:
    def test_post_then_get_reflects_human_decision(self, dataset, client):
        resp = client.post("/api/scenes/scene001/decision", json={"choice": "hsv"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["decision"] == "hsv"
        assert body["decision_source"] == "human"

        again = client.get("/api/scenes/scene001").json()
        assert again["decision"] == "hsv"
        # persisted on disk
        on_disk = Manifest.load(dataset / "manifest.json")
        assert on_disk.scene("scene001")["decision"] == "hsv"

    def test_invalid_choice_400(self, client):
        resp = client.post("/api/scenes/scene000/decision", json={"choice": "bogus"})
        assert resp.status_code == 400

    def test_unknown_scene_404(self, client):
        resp = client.post("/api/scenes/ghost/decision", json={"choice": "hsv"})
        assert resp.status_code == 404

    def test_stale_revision_409(self, client):
        current = client.get("/api/scenes/scene000").json()["revision"]
        ok = client.post(
            "/api/scenes/scene000/decision",
            json={"choice": "rgb", "expect_revision": current},
        )
        assert ok.status_code == 200
        stale = client.post(
            "/api/scenes/scene000/decision",
            json={"choice": "hsv", "expect_revision": current},
        )
        assert stale.status_code == 409
        assert client.get("/api/scenes/scene000").json()["decision"] == "rgb"

    def test_progress_counts(self, client):
        client.post("/api/scenes/scene000/decision", json={"choice": "hsv"})
        client.post("/api/scenes/scene001/decision", json={"choice": "reject"})
        progress = client.get("/api/progress").json()
        assert progress == {
            "total": 3,
            "undecided": 1,
            "decided": 1,
            "rejected": 1,
            "by_choice": {"hsv": 1, "rgb": 0, "saliency": 0},
        }

    def test_interleaved_writers_last_write_wins(self, dataset, client):
        choices = ["hsv", "rgb", "saliency", "reject"] * 8
        results = []

        def post(choice):
            resp = client.post("/api/scenes/scene002/decision", json={"choice": choice})
            results.append((choice, resp.status_code))

        threads = [threading.Thread(target=post, args=(c,)) for c in choices]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(code == 200 for _, code in results)

        final = client.get("/api/scenes/scene002").json()["decision"]
        on_disk = Manifest.load(dataset / "manifest.json")  # parses: never corrupted
        assert on_disk.scene("scene002")["decision"] == final
        assert final in {"hsv", "rgb", "saliency", "reject"}
        # the revision advanced once per accepted write
        assert on_disk.scene("scene002")["revision"] == len(choices) + 1
