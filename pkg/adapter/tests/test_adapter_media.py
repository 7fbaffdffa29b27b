"""Media routing: photos, frame directories, and video containers."""

import json

import numpy as np
import pytest

import adapterclips as clips
from landmark_adapter.errors import UnreadableInput
from landmark_adapter.media import open_media


class TestPhoto:
    def test_single_frame_nominal_fps(self, still_photo):
        stream = open_media(still_photo)
        assert stream.kind == "photo"
        assert stream.fps == 1.0
        frames = list(stream.frames)
        assert len(frames) == 1
        assert frames[0].shape == (*clips.FRAME_SHAPE, 3)
        assert frames[0].dtype == np.uint8

    def test_corrupt_photo(self, tmp_path):
        bad = tmp_path / "x.png"
        bad.write_bytes(b"not a png at all")
        with pytest.raises(UnreadableInput, match="decode"):
            open_media(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(UnreadableInput, match="no such file"):
            open_media(tmp_path / "gone.png")

    def test_unknown_suffix(self, tmp_path):
        p = tmp_path / "notes.txt"
        p.write_text("hello")
        with pytest.raises(UnreadableInput, match="unsupported media type"):
            open_media(p)


class TestFrameDir:
    def test_fps_from_manifest(self, blink_frame_dir):
        stream = open_media(blink_frame_dir)
        assert stream.kind == "frame_dir"
        assert stream.fps == clips.CLIP_FPS
        n = sum(1 for _ in stream.frames)
        assert n == round(clips.CLIP_FPS * clips.CLIP_DURATION_S)

    def test_frames_come_back_in_name_order(self, tmp_path):
        frames = [np.full((8, 8, 3), v, np.uint8) for v in (10, 20, 30)]
        root = clips.write_frame_dir(tmp_path / "c", frames, 5.0)
        got = [int(f[0, 0, 0]) for f in open_media(root).frames]
        assert got == [10, 20, 30]

    def test_missing_manifest(self, tmp_path):
        root = tmp_path / "c"
        clips.write_frame_dir(root, [np.zeros((8, 8, 3), np.uint8)], 5.0)
        (root / "clip.json").unlink()
        with pytest.raises(UnreadableInput, match="clip.json"):
            open_media(root)

    @pytest.mark.parametrize("meta", ['{"fps": 0}', '{"fps": "fast"}', "{}", "[]", "not json"])
    def test_bad_manifest(self, tmp_path, meta):
        root = tmp_path / "c"
        clips.write_frame_dir(root, [np.zeros((8, 8, 3), np.uint8)], 5.0)
        (root / "clip.json").write_text(meta, encoding="utf-8")
        with pytest.raises(UnreadableInput):
            open_media(root)

    def test_empty_dir(self, tmp_path):
        root = tmp_path / "c"
        root.mkdir()
        (root / "clip.json").write_text(json.dumps({"fps": 30.0}))
        with pytest.raises(UnreadableInput, match="no image frames"):
            open_media(root)


class TestVideo:
    def test_fps_from_container_metadata(self, tmp_path):
        frames = [np.full((32, 48, 3), v * 5, np.uint8) for v in range(6)]
        path = clips.write_video(tmp_path / "v.avi", frames, 25.0)
        stream = open_media(path)
        assert stream.kind == "video"
        assert stream.fps == 25.0
        decoded = list(stream.frames)
        assert len(decoded) == 6
        # FFV1 is lossless, so the raster survives the container round trip
        assert np.array_equal(decoded[3], frames[3])

    def test_blink_video_frame_count(self, blink_video):
        stream = open_media(blink_video)
        assert stream.fps == clips.CLIP_FPS
        assert sum(1 for _ in stream.frames) == 300

    def test_garbage_video_bytes(self, tmp_path):
        bad = tmp_path / "v.avi"
        bad.write_bytes(b"RIFFgarbage that is not an avi container")
        with pytest.raises(UnreadableInput):
            open_media(bad)
