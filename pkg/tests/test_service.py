import json

from momentseek.engine import SearchOptions
from momentseek.index import search as index_search


def post_search(client, **body):
    return client.post("/api/v1/search", json=body)


class TestHealthAndCorpus:
    def test_healthz(self, client, corpus):
        r = client.get("/healthz")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["frames"] == len(corpus.manifest.frames)
        assert body["models"] == ["m1", "m2"]

    def test_corpus_summary(self, client, corpus):
        r = client.get("/api/v1/corpus")
        assert r.status_code == 200
        body = r.json()
        assert body["corpus_hash"] == corpus.manifest.corpus_hash
        assert body["video_count"] == 3
        assert body["frame_count"] == len(corpus.manifest.frames)
        assert body["models"] == ["m1", "m2"]
        assert sum(v["keyframes"] for v in body["videos"]) == body["frame_count"]
        for v in body["videos"]:
            assert v["last_key"] - v["first_key"] + 1 == v["keyframes"]


class TestSearch:
    def test_matches_engine_exactly(self, client, fresh_engine):
        r = post_search(client, query="a crowded beach at sunset", limit=10)
        assert r.status_code == 200
        want = fresh_engine.search(
            SearchOptions(query="a crowded beach at sunset", limit=10)
        ).to_dict()
        assert r.json() == want

    def test_deterministic_across_calls(self, client):
        a = post_search(client, query="waves", limit=5).json()
        b = post_search(client, query="waves", limit=5).json()
        assert a == b

    def test_single_model_matches_plain_index_search(self, client, fresh_engine):
        query = "someone chopping vegetables"
        r = post_search(client, query=query, models=[{"model_id": "m1", "weight": 1.0}], limit=3)
        assert r.status_code == 200
        entries = r.json()["entries"]
        q = fresh_engine.encode("m1", query)
        plain = index_search(fresh_engine.indexes["m1"], q, top_k=3)
        assert [e["frame_key"] for e in entries] == plain.keys()
        assert all(set(e["per_model_scores"]) == {"m1"} for e in entries)

    def test_rerank_radius_zero_keeps_single_model_order(self, client):
        query = "traffic at night"
        plain = post_search(client, query=query, models=[{"model_id": "m1"}], limit=8)
        zero = post_search(
            client,
            query=query,
            models=[{"model_id": "m1"}],
            rerank={"enabled": True, "radius": 0},
            limit=8,
        )
        keys = lambda r: [e["frame_key"] for e in r.json()["entries"]]
        assert keys(zero) == keys(plain)

    def test_rerank_disabled_flag_is_plain_search(self, client):
        query = "traffic at night"
        plain = post_search(client, query=query, limit=8)
        off = post_search(client, query=query, rerank={"enabled": False, "radius": 2}, limit=8)
        assert off.json() == plain.json()

    def test_entry_shape(self, client, corpus):
        r = post_search(client, query="sand", limit=1)
        entry = r.json()["entries"][0]
        assert set(entry) == {
            "frame_key",
            "video_id",
            "frame_index",
            "timestamp_s",
            "fused_score",
            "per_model_scores",
            "thumbnail_url",
        }
        record = corpus.manifest.frame(entry["frame_key"])
        assert entry["video_id"] == record.video_id
        assert entry["frame_index"] == record.frame_index
        assert entry["timestamp_s"] == record.timestamp_s

    def test_limit_bounds(self, client):
        assert post_search(client, query="x", limit=501).status_code == 400
        assert post_search(client, query="x", limit=0).status_code == 400
        assert post_search(client, query="x", limit=500).status_code == 200

    def test_empty_query_rejected(self, client):
        r = post_search(client, query="   ")
        assert r.status_code == 400
        assert "query" in r.json()["detail"]

    def test_unknown_model_rejected(self, client):
        r = post_search(client, query="x", models=[{"model_id": "m9"}])
        assert r.status_code == 400
        assert "m9" in r.json()["detail"]

    def test_missing_body_field(self, client):
        r = client.post("/api/v1/search", json={"limit": 5})
        assert 400 <= r.status_code < 500


class TestTemporal:
    def anchor_for(self, corpus, video_id="beach"):
        first, last = corpus.manifest.video_key_span(video_id)
        return (first + last) // 2

    def test_moment_brackets_anchor(self, client, corpus):
        anchor = self.anchor_for(corpus)
        r = client.post(
            "/api/v1/temporal",
            json={"anchor_key": anchor, "query_start": "waves build", "query_end": "waves crash"},
        )
        assert r.status_code == 200
        body = r.json()
        moment = body["moment"]
        assert moment["start_key"] <= anchor <= moment["end_key"]
        assert moment["video_id"] == "beach"
        assert moment["span"] == moment["end_key"] - moment["start_key"]
        assert body["model_id"] == "m1"
        # candidate lists start at the anchor and stay inside the video
        first, last = corpus.manifest.video_key_span("beach")
        for side in ("start", "end"):
            candidates = body["candidates"][side]
            assert candidates[0]["frame_key"] == anchor
            assert all(first <= c["frame_key"] <= last for c in candidates)
            assert all("score" in c and "timestamp_s" in c for c in candidates)

    def test_span_cap_honored(self, client, corpus):
        anchor = self.anchor_for(corpus)
        r = client.post(
            "/api/v1/temporal",
            json={
                "anchor_key": anchor,
                "query_start": "a",
                "query_end": "b",
                "gap_c": 0,
            },
        )
        moment = r.json()["moment"]
        assert moment["start_key"] == moment["end_key"] == anchor

    def test_floor_inf_collapses_to_anchor(self, client, corpus):
        anchor = self.anchor_for(corpus)
        r = client.post(
            "/api/v1/temporal",
            json={"anchor_key": anchor, "query_start": "a", "query_end": "b", "floor": 2.0},
        )
        body = r.json()
        # cosine can never reach 2.0, so no expansion survives
        assert [c["frame_key"] for c in body["candidates"]["start"]] == [anchor]
        assert [c["frame_key"] for c in body["candidates"]["end"]] == [anchor]

    def test_explicit_model(self, client, corpus):
        anchor = self.anchor_for(corpus)
        r = client.post(
            "/api/v1/temporal",
            json={"anchor_key": anchor, "query_start": "a", "query_end": "b", "model_id": "m2"},
        )
        assert r.status_code == 200
        assert r.json()["model_id"] == "m2"

    def test_bad_anchor_rejected(self, client):
        r = client.post(
            "/api/v1/temporal",
            json={"anchor_key": 10_000, "query_start": "a", "query_end": "b"},
        )
        assert r.status_code == 400

    def test_unknown_model_rejected(self, client):
        r = client.post(
            "/api/v1/temporal",
            json={"anchor_key": 0, "query_start": "a", "query_end": "b", "model_id": "m9"},
        )
        assert r.status_code == 400

    def test_matches_engine(self, client, fresh_engine, corpus):
        from momentseek.engine import TemporalOptions

        anchor = self.anchor_for(corpus, "kitchen")
        body = {"anchor_key": anchor, "query_start": "pan heats", "query_end": "food plated"}
        r = client.post("/api/v1/temporal", json=body)
        want = fresh_engine.temporal(
            TemporalOptions(anchor_key=anchor, query_start="pan heats", query_end="food plated")
        ).to_dict()
        assert r.json() == want


def qa_body(anchor, video_id="beach", answer="a sandcastle", session="s-1"):
    return {
        "session_id": session,
        "question": "what gets built?",
        "answer": answer,
        "moment": {
            "video_id": video_id,
            "anchor_key": anchor,
            "start_key": anchor,
            "end_key": anchor,
        },
        "viewed_frame_keys": [anchor],
    }


class TestQA:
    def test_receipt_and_log_line(self, client, fresh_engine, corpus):
        anchor = corpus.manifest.video_key_span("beach")[0]
        r = client.post("/api/v1/qa", json=qa_body(anchor))
        assert r.status_code == 200
        receipt = r.json()
        assert set(receipt) == {"submission_id", "content_hash", "seq", "submitted_at"}
        assert receipt["seq"] == 0
        assert receipt["submission_id"] == f"{receipt['content_hash'][:16]}-0"

        lines = fresh_engine.config.log_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["submission_id"] == receipt["submission_id"]
        assert record["answer"] == "a sandcastle"
        assert record["moment"]["video_id"] == "beach"
        assert record["submitted_at"] == receipt["submitted_at"]

    def test_identical_submissions_stay_distinct(self, client, corpus):
        anchor = corpus.manifest.video_key_span("beach")[0]
        r1 = client.post("/api/v1/qa", json=qa_body(anchor)).json()
        r2 = client.post("/api/v1/qa", json=qa_body(anchor)).json()
        assert r1["content_hash"] == r2["content_hash"]
        assert r1["submission_id"] != r2["submission_id"]
        assert r1["submitted_at"] != r2["submitted_at"]
        assert r1["submission_id"].split("-")[0] == r2["submission_id"].split("-")[0]

    def test_empty_answer_rejected(self, client, corpus):
        anchor = corpus.manifest.video_key_span("beach")[0]
        r = client.post("/api/v1/qa", json=qa_body(anchor, answer="  "))
        assert r.status_code == 400
        assert "answer required" in r.json()["detail"]

    def test_moment_outside_video_rejected(self, client, fresh_engine):
        r = client.post("/api/v1/qa", json=qa_body(10_000))
        assert r.status_code == 400
        assert not fresh_engine.config.log_path.exists()

    def test_log_is_append_only(self, client, fresh_engine, corpus):
        anchor = corpus.manifest.video_key_span("street")[0]
        client.post("/api/v1/qa", json=qa_body(anchor, video_id="street", session="a"))
        client.post("/api/v1/qa", json=qa_body(anchor, video_id="street", session="b"))
        before = fresh_engine.config.log_path.read_text(encoding="utf-8")
        client.post("/api/v1/qa", json=qa_body(anchor, video_id="street", session="c"))
        after = fresh_engine.config.log_path.read_text(encoding="utf-8")
        assert after.startswith(before)
        assert len(after.splitlines()) == 3


class TestFrames:
    def test_full_strip(self, client, corpus):
        r = client.get("/api/v1/frames/kitchen")
        assert r.status_code == 200
        frames = r.json()["frames"]
        want = [f for f in corpus.manifest.frames if f.video_id == "kitchen"]
        assert [f["frame_key"] for f in frames] == [f.frame_key for f in want]
        indices = [f["frame_index"] for f in frames]
        assert indices == sorted(indices)

    def test_subrange(self, client, corpus):
        kept = [f.frame_index for f in corpus.manifest.frames if f.video_id == "beach"]
        lo, hi = kept[1], kept[3]
        r = client.get(f"/api/v1/frames/beach?from={lo}&to={hi}")
        frames = r.json()["frames"]
        assert [f["frame_index"] for f in frames] == kept[1:4]

    def test_empty_intersection(self, client, corpus):
        kept = [f.frame_index for f in corpus.manifest.frames if f.video_id == "beach"]
        lo = kept[0] + 1
        hi = kept[1] - 1
        assert hi >= lo, "fixture must leave a gap between kept frames"
        r = client.get(f"/api/v1/frames/beach?from={lo}&to={hi}")
        assert r.status_code == 200
        assert r.json()["frames"] == []

    def test_reversed_range_rejected(self, client):
        r = client.get("/api/v1/frames/beach?from=50&to=10")
        assert r.status_code == 400
        assert "reversed" in r.json()["detail"]

    def test_unknown_video_is_404(self, client):
        r = client.get("/api/v1/frames/warehouse")
        assert r.status_code == 404
        assert "warehouse" in r.json()["detail"]


class TestStaticAssets:
    def test_placeholder_svg(self, client):
        r = client.get("/static/placeholder.svg")
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("image/svg")

    def test_real_thumbnail_served(self, client, corpus):
        frames = client.get("/api/v1/frames/beach").json()["frames"]
        with_thumb = [f for f in frames if f["thumbnail_url"] != "/static/placeholder.svg"]
        assert len(with_thumb) == 1  # fixture writes exactly one real thumbnail
        r = client.get(with_thumb[0]["thumbnail_url"])
        assert r.status_code == 200
        assert r.content.startswith(b"\xff\xd8")

    def test_missing_thumbnail_uses_placeholder(self, client):
        frames = client.get("/api/v1/frames/kitchen").json()["frames"]
        assert all(f["thumbnail_url"] == "/static/placeholder.svg" for f in frames)
