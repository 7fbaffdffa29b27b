"""Shared sample media: one blink video, one face-free clip, one still photo.

Session-scoped because the blink clip is 300 painted frames; every consumer
treats the files as read-only.
"""

import cv2
import numpy as np
import pytest

import adapterclips as clips


@pytest.fixture(scope="session")
def blink_frames():
    return clips.blink_clip_frames()


@pytest.fixture(scope="session")
def blink_video(tmp_path_factory, blink_frames):
    path = tmp_path_factory.mktemp("media") / "blink.avi"
    return clips.write_video(path, blink_frames, clips.CLIP_FPS)


@pytest.fixture(scope="session")
def blink_frame_dir(tmp_path_factory, blink_frames):
    root = tmp_path_factory.mktemp("media") / "blink_clip"
    return clips.write_frame_dir(root, blink_frames, clips.CLIP_FPS)


@pytest.fixture(scope="session")
def facefree_dir(tmp_path_factory):
    # content without any palette-coded dots: background plus a gray blob
    frame = np.full((*clips.FRAME_SHAPE, 3), clips.BACKGROUND, np.uint8)
    cv2.circle(frame, (120, 90), 35, (90, 90, 90), -1)
    root = tmp_path_factory.mktemp("media") / "facefree_clip"
    return clips.write_frame_dir(root, [frame.copy() for _ in range(30)], 30.0)


@pytest.fixture(scope="session")
def still_photo(tmp_path_factory):
    path = tmp_path_factory.mktemp("media") / "eye.png"
    cv2.imwrite(str(path), clips.paint_frame(clips.scene_groups()))
    return path
