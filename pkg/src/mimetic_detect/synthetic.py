"""Vendored piecewise-smooth test raster.

A stand-in for the classical peppers test image when that file is not
available: smooth illumination plus flat objects with sharp boundaries and
a little band-limited texture, i.e. the gradient statistics the detector
cares about.  The 8-bit PGM under assets/ is the frozen artifact;
`synthetic_image` is the generator that produced it and doubles as a
transcription check in the test suite.
"""

from importlib import resources

import numpy as np

from .imaging import decode_image

ASSET_NAME = "synthetic_128.pgm"

_OBJECTS = [
    # (cx, cy, radius, level)
    (0.34, 0.38, 0.17, 0.72),
    (0.70, 0.72, 0.13, 0.18),
    (0.16, 0.20, 0.09, 0.55),
    (0.82, 0.42, 0.07, 0.30),
    (0.52, 0.86, 0.08, 0.78),
    (0.28, 0.66, 0.06, 0.25),
    (0.62, 0.18, 0.05, 0.82),
    (0.10, 0.52, 0.05, 0.68),
]


def _gaussian_blur(a: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge replication."""
    radius = int(np.ceil(4.0 * sigma))
    t = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (t / sigma) ** 2)
    kernel /= kernel.sum()
    padded = np.pad(a, radius, mode="edge")
    out = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="valid"), 1, padded)
    out = np.apply_along_axis(lambda c: np.convolve(c, kernel, mode="valid"), 0, out)
    return out


def synthetic_image(size: int = 128) -> np.ndarray:
    """Deterministic piecewise-smooth raster in [0.08, 0.92]."""
    j, i = np.mgrid[0:size, 0:size]
    x = (i + 0.5) / size
    y = (j + 0.5) / size
    img = 0.42 + 0.18 * np.sin(2.3 * x + 0.7) * np.cos(1.7 * y + 0.3) + 0.10 * (x - y)
    for cx, cy, r, level in _OBJECTS:
        img[(x - cx) ** 2 + (y - cy) ** 2 < r * r] = level
    img[(x > 0.58) & (x < 0.86) & (y > 0.12) & (y < 0.34)] = 0.60
    img[(x + y > 1.55) & (y < 0.9)] = 0.33
    img[(x > 0.05) & (x < 0.45) & (y > 0.90) & (y < 0.97)] = 0.50
    img[(x > 0.40) & (x < 0.47) & (y > 0.40) & (y < 0.80)] = 0.65
    img += 0.12 * np.exp(-(((x - 0.18) ** 2 + (y - 0.78) ** 2) / 0.012))
    texture = _gaussian_blur(np.random.default_rng(7).standard_normal((size, size)), 1.5)
    img += 0.22 * texture
    return np.clip(img, 0.08, 0.92)


def load_vendored_image() -> np.ndarray:
    """The frozen 128x128 test raster shipped with the package."""
    data = resources.files(__package__).joinpath("assets", ASSET_NAME).read_bytes()
    return decode_image(data, "pgm")
