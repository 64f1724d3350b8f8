"""The two perturbation families used in the experiments.

`sign_noise` is the attack surrogate: an i.i.d. +/-eps sign pattern drawn
from seeded Gaussian noise, matching the pixel-level signature of
gradient-sign attacks.  `smooth_control` has the same amplitude budget but
a single low spatial frequency, to show the detector reacts to frequency
content rather than amplitude.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Perturbation:
    """Additive noise field with a declared l-infinity budget."""

    delta: np.ndarray
    eps: float
    kind: str  # "sign-noise" | "smooth-control"
    seed: int | None = None

    @property
    def shape(self):
        return self.delta.shape


def sign_noise(height: int, width: int, eps: float, seed: int) -> Perturbation:
    """+/-eps per pixel from the sign of seeded standard Gaussian noise.

    Every entry has magnitude exactly eps; sign(0) counts as +.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    eta = np.random.default_rng(seed).standard_normal((height, width))
    delta = np.where(eta >= 0.0, eps, -eps)
    return Perturbation(delta=delta, eps=eps, kind="sign-noise", seed=seed)


def smooth_control(height: int, width: int, eps: float) -> Perturbation:
    """eps * sin(4*pi*i/W) * sin(4*pi*j/H), i over width, j over height."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    si = np.sin(4.0 * np.pi * np.arange(width) / width)
    sj = np.sin(4.0 * np.pi * np.arange(height) / height)
    delta = eps * np.outer(sj, si)
    return Perturbation(delta=delta, eps=eps, kind="smooth-control")


def apply_and_clip(img: np.ndarray, p: Perturbation) -> np.ndarray:
    """Perturbed image with pixel values clipped back to [0, 1]."""
    a = np.asarray(img, dtype=float)
    if a.shape != p.delta.shape:
        raise ValueError(f"shape mismatch: image {a.shape} vs perturbation {p.delta.shape}")
    return np.clip(a + p.delta, 0.0, 1.0)


def to_unit_raster(p: Perturbation) -> np.ndarray:
    """Map [-eps, eps] affinely onto [0, 1] for image export."""
    if p.eps == 0:
        return np.full_like(p.delta, 0.5)
    return (p.delta + p.eps) / (2.0 * p.eps)
