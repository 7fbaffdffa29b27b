"""Color transforms: sRGB linearization, CIE LAB and HSV with 8-bit storage
scaling, and gray-world white balance.

LAB math runs in double precision and is quantized only at storage:
L_cv = round(L* * 255/100), a_cv = round(a* + 128), b_cv = round(b* + 128),
so masks thresholded on 8-bit values are reproducible. HSV stores hue in
half degrees (H in [0, 179]). All rounding is half away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroChannelMean
from .utils import round_half_away, to_uint8

# D65 reference white and the linear-sRGB -> XYZ projection. Row sums equal
# the normalizers exactly, so achromatic inputs land on a* = b* = 0.
D65_XN = 0.9505
D65_YN = 1.0
D65_ZN = 1.0890
RGB_TO_XYZ = np.array(
    [
        [0.4124, 0.3576, 0.1805],
        [0.2126, 0.7152, 0.0722],
        [0.0193, 0.1192, 0.9505],
    ]
)

SRGB_KNEE = 0.04045
LAB_EPS = (6.0 / 29.0) ** 3


def _check_raster(data: np.ndarray, channels: int, name: str) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim != 3 or data.shape[2] != channels:
        raise ValueError(f"{name} expects an HxWx{channels} array, got {data.shape}")
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise ValueError(f"{name} must hold at least one pixel")
    if data.dtype != np.uint8:
        raise ValueError(f"{name} expects uint8 data, got {data.dtype}")
    return data


@dataclass(frozen=True)
class Bgr8Image:
    """8-bit BGR raster (camera byte order)."""

    data: np.ndarray

    def __post_init__(self):
        data = _check_raster(self.data, 3, "Bgr8Image")
        object.__setattr__(self, "data", data)
        data.setflags(write=False)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class Lab8Image:
    """CIE LAB raster under 8-bit storage scaling; (128,128,128) is neutral."""

    data: np.ndarray

    def __post_init__(self):
        data = _check_raster(self.data, 3, "Lab8Image")
        object.__setattr__(self, "data", data)
        data.setflags(write=False)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def l_plane(self) -> np.ndarray:
        return self.data[:, :, 0]

    @property
    def a_plane(self) -> np.ndarray:
        return self.data[:, :, 1]

    @property
    def b_plane(self) -> np.ndarray:
        return self.data[:, :, 2]


@dataclass(frozen=True)
class Hsv8Image:
    """HSV raster with half-degree hue storage: H in [0,179], S,V in [0,255]."""

    data: np.ndarray

    def __post_init__(self):
        data = _check_raster(self.data, 3, "Hsv8Image")
        if data[:, :, 0].max(initial=0) > 179:
            raise ValueError("hue plane exceeds 179")
        object.__setattr__(self, "data", data)
        data.setflags(write=False)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def h_plane(self) -> np.ndarray:
        return self.data[:, :, 0]

    @property
    def s_plane(self) -> np.ndarray:
        return self.data[:, :, 1]

    @property
    def v_plane(self) -> np.ndarray:
        return self.data[:, :, 2]


@dataclass(frozen=True)
class ChannelGains:
    """Per-channel gray-world gains and the gray reference they target."""

    g_b: float
    g_g: float
    g_r: float
    reference_gray: float

    def __post_init__(self):
        if min(self.g_b, self.g_g, self.g_r) <= 0:
            raise ValueError("channel gains must be positive")

    def as_dict(self) -> dict:
        return {
            "b": self.g_b,
            "g": self.g_g,
            "r": self.g_r,
            "reference_gray": self.reference_gray,
        }


def srgb_to_linear(v):
    """Linearize an 8-bit sRGB channel value to [0, 1].

    Scalar or array input; piecewise gamma with the knee at v/255 = 0.04045.
    """
    vhat = np.asarray(v, dtype=np.float64) / 255.0
    low = vhat / 12.92
    high = ((vhat + 0.055) / 1.055) ** 2.4
    out = np.where(vhat <= SRGB_KNEE, low, high)
    if out.ndim == 0:
        return float(out)
    return out


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(
        t > LAB_EPS,
        np.cbrt(t),
        (1.0 / 3.0) * (29.0 / 6.0) ** 2 * t + 4.0 / 29.0,
    )


def bgr_to_lab8(img: Bgr8Image) -> Lab8Image:
    """Full sRGB -> XYZ(D65) -> LAB pipeline with 8-bit storage scaling."""
    bgr = img.data.astype(np.float64)
    lin = srgb_to_linear(bgr)  # still B,G,R order
    rgb_lin = lin[:, :, ::-1]
    xyz = rgb_lin @ RGB_TO_XYZ.T
    fx = _lab_f(xyz[:, :, 0] / D65_XN)
    fy = _lab_f(xyz[:, :, 1] / D65_YN)
    fz = _lab_f(xyz[:, :, 2] / D65_ZN)
    l_star = 116.0 * fy - 16.0
    a_star = 500.0 * (fx - fy)
    b_star = 200.0 * (fy - fz)
    out = np.stack(
        [l_star * (255.0 / 100.0), a_star + 128.0, b_star + 128.0], axis=2
    )
    return Lab8Image(to_uint8(out))


def bgr_to_hsv8(img: Bgr8Image) -> Hsv8Image:
    """Hexcone HSV with half-degree hue storage.

    Achromatic pixels (max == min) store H = 0 and S = 0; V = 0 pixels
    store S = 0.
    """
    bgr = img.data.astype(np.float64)
    b, g, r = bgr[:, :, 0], bgr[:, :, 1], bgr[:, :, 2]
    v = np.maximum(np.maximum(b, g), r)
    mn = np.minimum(np.minimum(b, g), r)
    delta = v - mn

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v > 0, 255.0 * delta / v, 0.0)
        h_r = 60.0 * (g - b) / delta
        h_g = 120.0 + 60.0 * (b - r) / delta
        h_b = 240.0 + 60.0 * (r - g) / delta
    h = np.select([v == r, v == g], [h_r, h_g], default=h_b)
    h = np.where(delta == 0, 0.0, h)
    h = np.where(h < 0, h + 360.0, h)
    h_half = round_half_away(h / 2.0).astype(np.int64) % 180

    out = np.stack([h_half.astype(np.float64), s, v], axis=2)
    return Hsv8Image(to_uint8(out))


def gray_world_correct(img: Bgr8Image) -> tuple[Bgr8Image, ChannelGains]:
    """Gray-world white balance: scale each channel toward the mean gray.

    Gains use whole-image channel means; output is saturation-clipped to
    [0, 255]. Raises ZeroChannelMean on a degenerate all-zero channel.
    """
    data = img.data.astype(np.float64)
    means = data.reshape(-1, 3).mean(axis=0)
    if np.any(means == 0):
        raise ZeroChannelMean("cannot balance an all-zero channel")
    ref = float(means.mean())
    gains = ref / means
    corrected = to_uint8(data * gains)
    return Bgr8Image(corrected), ChannelGains(
        g_b=float(gains[0]), g_g=float(gains[1]), g_r=float(gains[2]),
        reference_gray=ref,
    )
