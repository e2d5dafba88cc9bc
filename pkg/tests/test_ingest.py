import io
import math
import shutil

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentseek.corpus import SceneBoundary, read_manifest, write_manifest
from momentseek.errors import ParseError, ValidationError
from momentseek.ingest import (
    DedupConfig,
    DedupReport,
    dedup_scene,
    load_frame_vectors,
    parse_scene_boundaries,
    parse_video_table,
    run_ingest,
    sample_keyframes,
)

from conftest import write_raw_inputs
from helpers import CREATED_AT


class TestParseSceneBoundaries:
    def test_two_scenes(self):
        scenes = parse_scene_boundaries(b"0 99\n100 250\n", "v", 251)
        assert [(s.start_frame, s.end_frame, s.scene_id) for s in scenes] == [
            (0, 99, 0), (100, 250, 1),
        ]

    def test_end_before_start(self):
        with pytest.raises(ParseError) as err:
            parse_scene_boundaries(b"50 40\n", "v", 100)
        assert str(err.value) == "end before start at line 1"

    def test_overlap(self):
        with pytest.raises(ParseError) as err:
            parse_scene_boundaries(b"0 10\n5 20\n", "v", 100)
        assert str(err.value) == "overlap at line 2"

    def test_non_monotone_starts_reported_as_overlap(self):
        with pytest.raises(ParseError, match=r"at line 2"):
            parse_scene_boundaries(b"20 30\n0 10\n", "v", 100)

    def test_blank_lines_keep_line_numbers(self):
        with pytest.raises(ParseError, match=r"at line 3"):
            parse_scene_boundaries(b"0 10\n\n11 5\n", "v", 100)

    def test_non_integer(self):
        with pytest.raises(ParseError, match=r"non-integer"):
            parse_scene_boundaries(b"a b\n", "v", 100)

    def test_wrong_field_count(self):
        with pytest.raises(ParseError, match=r"expected 'start end'"):
            parse_scene_boundaries(b"1 2 3\n", "v", 100)

    def test_out_of_range(self):
        with pytest.raises(ParseError, match=r"out of range"):
            parse_scene_boundaries(b"0 100\n", "v", 100)
        with pytest.raises(ParseError, match=r"out of range"):
            parse_scene_boundaries(b"-3 10\n", "v", 100)

    def test_empty_file(self):
        assert parse_scene_boundaries(b"", "v", 100) == []


class TestSampleKeyframes:
    def test_even_spacing(self):
        scene = SceneBoundary("v", 0, 0, 99)
        assert sample_keyframes(scene, 4) == [0, 33, 66, 99]

    def test_single_frame_scene(self):
        assert sample_keyframes(SceneBoundary("v", 0, 10, 10), 4) == [10]

    def test_short_scene_collapses(self):
        assert sample_keyframes(SceneBoundary("v", 0, 0, 2), 4) == [0, 1, 2]

    def test_two_frame_scene(self):
        assert sample_keyframes(SceneBoundary("v", 0, 10, 11), 4) == [10, 11]

    def test_n1_takes_midpoint(self):
        assert sample_keyframes(SceneBoundary("v", 0, 0, 90), 1) == [45]
        # midpoint 11.5 rounds half away from zero
        assert sample_keyframes(SceneBoundary("v", 0, 10, 13), 1) == [12]

    @given(st.integers(0, 1000), st.integers(1, 500), st.integers(1, 8))
    @settings(max_examples=200, deadline=None)
    def test_properties(self, start, length, n):
        scene = SceneBoundary("v", 0, start, start + length - 1)
        out = sample_keyframes(scene, n)
        assert out == sorted(set(out))
        assert all(scene.start_frame <= i <= scene.end_frame for i in out)
        assert 1 <= len(out) <= n
        if n >= 2 and length >= 2:
            assert out[0] == scene.start_frame and out[-1] == scene.end_frame
        if length >= n:
            assert len(out) == n


class TestDedupScene:
    def test_identical_frames_keep_first(self):
        v = np.zeros((4, 3))
        v[:, 0] = 1.0
        assert dedup_scene([3, 7, 9, 12], list(v), DedupConfig()) == [3]

    def test_orthogonal_frames_keep_all(self):
        assert dedup_scene([0, 1, 2, 3], list(np.eye(4)), DedupConfig()) == [0, 1, 2, 3]

    def test_first_keeper_semantics(self):
        # f1 near f0 (18 deg, sim .951 > .9): dropped.  f2 at 36 deg from f0
        # (sim .809): kept, compared only against the kept f0 even though it
        # sits within 18 deg of the discarded f1.
        angles = np.deg2rad([0.0, 18.0, 36.0])
        vectors = [np.array([math.cos(a), math.sin(a)]) for a in angles]
        assert dedup_scene([0, 1, 2], vectors, DedupConfig()) == [0, 2]

    def test_exact_threshold_is_kept(self):
        v0 = np.array([1.0, 0.0])
        v1 = np.array([0.9, math.sqrt(0.19)])
        assert float(v0 @ v1) == 0.9
        kept = dedup_scene([0, 1], [v0, v1], DedupConfig(similarity_threshold=0.9))
        assert kept == [0, 1]
        kept = dedup_scene([0, 1], [v0, v1], DedupConfig(similarity_threshold=0.9 - 1e-9))
        assert kept == [0]

    def test_rejects_count_mismatch(self):
        with pytest.raises(ValidationError, match=r"2 frame indices but 1 embeddings"):
            dedup_scene([0, 1], [np.array([1.0, 0.0])], DedupConfig())

    def test_rejects_unsorted_indices(self):
        with pytest.raises(ValidationError, match=r"ascending"):
            dedup_scene([1, 0], [np.array([1.0, 0.0]), np.array([0.0, 1.0])], DedupConfig())

    def test_rejects_non_unit_vectors(self):
        with pytest.raises(ValidationError, match=r"unit"):
            dedup_scene([0], [np.array([2.0, 0.0])], DedupConfig())

    def test_idempotent_on_random_scenes(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(1, 10))
            vecs = rng.standard_normal((n, 6))
            # sprinkle near-duplicates so removal actually happens
            for i in range(1, n):
                if rng.random() < 0.4:
                    vecs[i] = vecs[i - 1] + 0.05 * rng.standard_normal(6)
            vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
            indices = list(range(n))
            kept = dedup_scene(indices, list(vecs), DedupConfig())
            assert kept, "non-empty scene must keep at least one frame"
            again = dedup_scene(kept, [vecs[i] for i in kept], DedupConfig())
            assert again == kept

    def test_threshold_validation(self):
        with pytest.raises(ValidationError):
            DedupConfig(similarity_threshold=0.0)
        with pytest.raises(ValidationError):
            DedupConfig(similarity_threshold=1.2)
        with pytest.raises(ValidationError):
            DedupConfig(frames_per_scene=0)


class TestLoadFrameVectors:
    def test_round_trip_normalizes(self, tmp_path):
        path = tmp_path / "v.npz"
        np.savez(path, frame_indices=np.array([0, 2]), vectors=np.array([[3.0, 0.0], [0.0, 0.5]]))
        out = load_frame_vectors(path)
        assert set(out) == {0, 2}
        np.testing.assert_allclose(out[0], [1.0, 0.0], atol=1e-7)
        np.testing.assert_allclose(out[2], [0.0, 1.0], atol=1e-7)

    def test_rejects_zero_vector(self, tmp_path):
        path = tmp_path / "v.npz"
        np.savez(path, frame_indices=np.array([0]), vectors=np.array([[0.0, 0.0]]))
        with pytest.raises(ValidationError, match=r"zero"):
            load_frame_vectors(path)

    def test_rejects_duplicate_indices(self, tmp_path):
        path = tmp_path / "v.npz"
        np.savez(path, frame_indices=np.array([1, 1]), vectors=np.eye(2))
        with pytest.raises(ValidationError, match=r"duplicate"):
            load_frame_vectors(path)

    def test_rejects_non_finite(self, tmp_path):
        path = tmp_path / "v.npz"
        np.savez(path, frame_indices=np.array([0]), vectors=np.array([[np.nan, 1.0]]))
        with pytest.raises(ValidationError, match=r"finite"):
            load_frame_vectors(path)

    def test_rejects_missing_arrays(self, tmp_path):
        path = tmp_path / "v.npz"
        np.savez(path, something=np.array([0]))
        with pytest.raises(ValidationError):
            load_frame_vectors(path)


class TestParseVideoTable:
    def test_happy_path(self):
        table = b"video_id fps frame_count\nv1 25.0 100\nv2 30 50\n"
        videos = parse_video_table(io.BytesIO(table))
        assert [(v.video_id, v.fps, v.frame_count) for v in videos] == [
            ("v1", 25.0, 100), ("v2", 30.0, 50),
        ]

    def test_rejects_wrong_header(self):
        with pytest.raises(ParseError, match=r"line 1"):
            parse_video_table(io.BytesIO(b"id fps frames\nv 25 10\n"))

    def test_rejects_duplicate_video(self):
        with pytest.raises(ParseError, match=r"duplicate"):
            parse_video_table(io.BytesIO(b"video_id fps frame_count\nv 25 10\nv 30 20\n"))

    def test_rejects_bad_numbers(self):
        with pytest.raises(ParseError):
            parse_video_table(io.BytesIO(b"video_id fps frame_count\nv abc 10\n"))
        with pytest.raises(ParseError, match=r"fps must be positive.*line 2"):
            parse_video_table(io.BytesIO(b"video_id fps frame_count\nv 0 10\n"))


class TestRunIngest:
    def test_fixture_counts(self, corpus):
        report = corpus.report
        assert report.scenes_processed == 9
        assert report.frames_sampled == 36
        # the two planted static scenes collapse 4 -> 1 each
        assert report.frames_removed == 6
        assert report.frames_kept == 30
        assert len(corpus.manifest.frames) == 30
        by_scene = {(s.video_id, s.scene_id): s.kept for s in report.per_scene}
        assert by_scene[("kitchen", 1)] == 1
        assert by_scene[("street", 0)] == 1

    def test_deterministic_manifest_bytes(self, corpus, tmp_path):
        again, _ = run_ingest(
            corpus.boundaries_dir, corpus.raw_dir, corpus.videos_file, created_at=CREATED_AT
        )
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_manifest(corpus.manifest, a)
        write_manifest(again, b)
        assert a.read_bytes() == b.read_bytes()

    def test_missing_inputs_name_the_video(self, tmp_path):
        boundaries, raw, videos_file = write_raw_inputs(tmp_path)
        (boundaries / "kitchen.scenes").unlink()
        with pytest.raises(ValidationError, match=r"kitchen"):
            run_ingest(boundaries, raw, videos_file)

    def test_report_round_trip(self, corpus):
        again = DedupReport.from_dict(corpus.report.to_dict())
        assert again == corpus.report

    def test_dedup_model_must_exist(self, corpus):
        with pytest.raises(ValidationError, match=r"m9"):
            run_ingest(
                corpus.boundaries_dir,
                corpus.raw_dir,
                corpus.videos_file,
                dedup_model_id="m9",
            )

    def test_manifest_matches_file_on_disk(self, corpus):
        on_disk = read_manifest(corpus.corpus_dir / "manifest.jsonl")
        assert on_disk.same_content(corpus.manifest)
