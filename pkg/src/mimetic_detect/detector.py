"""The gradient-energy ratio statistic and its calibration.

For an H x W image x, the statistic is

    T = sum_f P_f (G u)_f**2  /  sum_ij x_ij**2

with u the replicate-padded, x-fastest-vectorized extended field, G the
order-k staggered gradient and P its diagonal quadrature.  T is
dimensionless and invariant under x -> a*x; sign-pattern perturbations
raise it by a factor that grows with k while equal-amplitude smooth
perturbations leave it nearly unchanged.

Operators are cached per (k, H, W): construction costs far more than the
single sparse mat-vec each evaluation needs, and batch callers hit the
same shape repeatedly.  Cached operators are immutable and safe to share.
"""

import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .imaging import pad_and_vectorize
from .operators import Grad2D, Weights2D, build_grad_2d, build_weights_2d

_cache_lock = threading.Lock()
_operator_cache: dict = {}

VERDICT_CLEAN = "clean"
VERDICT_ADVERSARIAL = "adversarial"
VERDICT_UNTHRESHOLDED = "unthresholded"


def get_operators(k: int, height: int, width: int) -> tuple[Grad2D, Weights2D]:
    """Cached (gradient, weights) pair for an image shape."""
    key = (k, height, width)
    with _cache_lock:
        hit = _operator_cache.get(key)
    if hit is not None:
        return hit
    pair = (build_grad_2d(k, width, height), build_weights_2d(k, width, height))
    with _cache_lock:
        # first build wins so concurrent callers share one instance
        hit = _operator_cache.setdefault(key, pair)
    return hit


def clear_operator_cache() -> None:
    with _cache_lock:
        _operator_cache.clear()


def _check_image(img: np.ndarray, k: int) -> np.ndarray:
    a = np.asarray(img, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2D grayscale image, got shape {a.shape}")
    h, w = a.shape
    if h < 2 * k or w < 2 * k:
        raise ValueError(f"image {h}x{w} too small for order {k} (needs >= {2 * k})")
    return a


def gradient_energy(img: np.ndarray, k: int) -> float:
    """Weighted squared norm of the mimetic gradient of the padded image."""
    a = _check_image(img, k)
    g2d, w2d = get_operators(k, a.shape[0], a.shape[1])
    faces = g2d.matrix @ pad_and_vectorize(a)
    return float(np.dot(faces * faces, w2d.values))


def pixel_energy(img: np.ndarray) -> float:
    """Plain sum of squared pixel values (ghost cells excluded).

    A return of 0.0 flags the all-zero image, for which the ratio
    statistic is undefined.
    """
    a = np.asarray(img, dtype=float).ravel()
    return float(np.dot(a, a))


def classify(t: float, tau: float) -> str:
    """Strict threshold rule: adversarial iff t > tau (tie counts clean)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return VERDICT_ADVERSARIAL if t > tau else VERDICT_CLEAN


@dataclass(frozen=True)
class DetectorReport:
    """Per-image record of the energies, the ratio, and the verdict."""

    k: int
    e_h1: float
    e_l2: float
    t: float
    tau: float | None
    verdict: str

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "e_h1": self.e_h1,
            "e_l2": self.e_l2,
            "t": self.t,
            "tau": self.tau,
            "verdict": self.verdict,
        }


def statistic(img: np.ndarray, k: int, tau: float | None = None) -> DetectorReport:
    """Evaluate T on one image; verdict is thresholded only when tau is set.

    No clipping happens here: scaling the image scales both energies alike,
    so T(a*x) == T(x) for any a != 0.
    """
    a = _check_image(img, k)
    e_l2 = pixel_energy(a)
    if e_l2 == 0.0:
        raise ValueError("statistic undefined for zero image")
    e_h1 = gradient_energy(a, k)
    t = e_h1 / e_l2
    verdict = classify(t, tau) if tau is not None else VERDICT_UNTHRESHOLDED
    return DetectorReport(k=k, e_h1=e_h1, e_l2=e_l2, t=t, tau=tau, verdict=verdict)


@dataclass(frozen=True)
class Calibration:
    """Threshold calibrated from clean-image statistics.

    tau is the conservative upper empirical quantile: the order statistic
    of rank ceil((1-alpha)(N+1)), clamped to [1, N], of the stored Ts.
    """

    k: int
    alpha: float
    tau: float
    n: int
    ts: tuple = field(repr=False)

    def to_dict(self) -> dict:
        return {"k": self.k, "alpha": self.alpha, "tau": self.tau,
                "n": self.n, "ts": list(self.ts)}

    @classmethod
    def from_dict(cls, d: dict) -> "Calibration":
        return cls(k=int(d["k"]), alpha=float(d["alpha"]), tau=float(d["tau"]),
                   n=int(d["n"]), ts=tuple(float(t) for t in d["ts"]))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Calibration":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


MIN_CALIBRATION_SAMPLES = 20


def quantile_rank(n: int, alpha: float) -> int:
    """1-based rank ceil((1-alpha)(n+1)) clamped to [1, n]."""
    # tiny slack so float representation of alpha cannot bump an exact
    # integer rank up by one
    r = math.ceil((1.0 - alpha) * (n + 1) - 1e-9)
    return max(1, min(n, r))


def calibrate(clean_ts, alpha: float, k: int) -> Calibration:
    """Pick tau as an upper empirical quantile of clean statistics."""
    ts = [float(t) for t in clean_ts]
    if len(ts) < MIN_CALIBRATION_SAMPLES:
        raise ValueError(
            f"need at least {MIN_CALIBRATION_SAMPLES} clean samples, got {len(ts)}"
        )
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if min(ts) <= 0:
        raise ValueError("clean statistics must be positive")
    tau = sorted(ts)[quantile_rank(len(ts), alpha) - 1]
    return Calibration(k=k, alpha=alpha, tau=tau, n=len(ts), ts=tuple(ts))


def gradient_magnitude_map(img: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """Cell-centered gradient magnitude, rescaled to [0, 1].

    Each cell averages its two adjacent faces per axis before taking the
    Euclidean magnitude.  Returns (map, scale) where scale is the maximum
    magnitude, so maps of different images can be compared in absolute
    units after multiplying back.
    """
    a = _check_image(img, k)
    g2d, _ = get_operators(k, a.shape[0], a.shape[1])
    xb, yb = g2d.split_faces(g2d.matrix @ pad_and_vectorize(a))
    gx = 0.5 * (xb[:, :-1] + xb[:, 1:])
    gy = 0.5 * (yb[:-1, :] + yb[1:, :])
    mag = np.hypot(gx, gy)
    scale = float(mag.max())
    if scale > 0.0:
        mag = mag / scale
    return mag, scale
