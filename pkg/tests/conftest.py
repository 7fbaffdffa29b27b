import numpy as np
import pytest

from ocuscreen import phantom
from ocuscreen.colorspace import Bgr8Image


@pytest.fixture(scope="session")
def plain_eye():
    """400x300 eye phantom, iris radius 80 at (200,150), no lesion."""
    img, truth = phantom.synth_eye_image(400, 300, (200, 150), 80.0)
    return img, truth


@pytest.fixture(scope="session")
def blink_trace():
    """10 s, 30 fps, three well-separated blinks."""
    return phantom.synth_ear_trace(30.0, 10.0, [1.0, 4.0, 7.5])


@pytest.fixture(scope="session")
def pir_trace():
    """8 s, 30 fps pupil response: base 0.5, min 0.35, tau 0.4, L 250 ms."""
    return phantom.synth_pir_trace(30.0, 8.0, 0.5, 0.35, 0.4, 250.0)


@pytest.fixture()
def gray_image():
    return Bgr8Image(np.full((20, 20, 3), 128, dtype=np.uint8))


@pytest.fixture()
def intake():
    return {"consent": True, "name": "Test Subject", "age": 34, "pain_level": 2}
