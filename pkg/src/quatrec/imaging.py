"""Color image I/O, quaternion encoding, observation masks, quality metrics.

Pixels live in [0, 255] throughout: the metric constants and the solver
tunables are calibrated to that range.  One pixel becomes one pure
quaternion (R, G, B in the three imaginary parts), so a mask entry always
covers the whole pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.signal import fftconvolve

from .quat import QuaternionMatrix

__all__ = [
    "ColorImage",
    "ObservationMask",
    "load_image",
    "save_image",
    "rgb_to_quaternion",
    "quaternion_to_rgb",
    "random_mask",
    "text_mask",
    "load_mask",
    "save_mask",
    "psnr",
    "ssim",
]

ColorImage = np.ndarray  # (M, N, 3) float64 in [0, 255]

_IMAGE_SUFFIXES = {".png", ".ppm", ".pgm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff"}


def load_image(path) -> ColorImage:
    """Read any PIL-supported image (PNG and binary PPM included) as RGB."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64)


def save_image(img: ColorImage, path) -> None:
    """Clamp to [0, 255], round, and write by file extension."""
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 255.0)
    Image.fromarray(np.round(arr).astype(np.uint8), mode="RGB").save(path)


def rgb_to_quaternion(img: ColorImage) -> QuaternionMatrix:
    """Pure quaternion matrix with channels in the imaginary planes."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (M, N, 3) image, got {img.shape}")
    zero = np.zeros(img.shape[:2])
    return QuaternionMatrix.from_planes(zero, img[..., 0], img[..., 1], img[..., 2])


def quaternion_to_rgb(mat: QuaternionMatrix) -> ColorImage:
    """Drop the real plane, clamp the channels back to pixel range."""
    return np.clip(np.stack([mat.q1, mat.q2, mat.q3], axis=-1), 0.0, 255.0)


@dataclass(frozen=True)
class ObservationMask:
    """Boolean pixel mask; True marks an observed pixel."""

    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def sampling_rate(self) -> float:
        return float(self.mask.mean())


def random_mask(rows: int, cols: int, sr: float, seed: int) -> ObservationMask:
    """I.i.d. Bernoulli(sr) pixel mask from the given seed."""
    if not 0.0 < sr <= 1.0:
        raise ValueError("sampling rate must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    return ObservationMask(rng.random((rows, cols)) < sr)


def text_mask(img: ColorImage, threshold: float = 128.0) -> ObservationMask:
    """Pixels darker than the threshold (e.g. overlaid text) count as missing."""
    img = np.asarray(img, dtype=np.float64)
    gray = img.mean(axis=2) if img.ndim == 3 else img
    return ObservationMask(gray >= threshold)


def save_mask(mask: ObservationMask, path) -> None:
    """Write a mask as an image (white = observed) or as the text grid
    format: a header line `M N`, then M rows of 0/1."""
    path = Path(path)
    if path.suffix.lower() in _IMAGE_SUFFIXES:
        arr = np.where(mask.mask, 255, 0).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(path)
        return
    m, n = mask.shape
    rows = [" ".join("1" if v else "0" for v in row) for row in mask.mask]
    path.write_text(f"{m} {n}\n" + "\n".join(rows) + "\n")


def load_mask(path, threshold: float = 128.0) -> ObservationMask:
    """Read a mask image (thresholded) or the text grid format."""
    path = Path(path)
    if path.suffix.lower() in _IMAGE_SUFFIXES:
        with Image.open(path) as im:
            gray = np.asarray(im.convert("L"), dtype=np.float64)
        return ObservationMask(gray >= threshold)
    lines = path.read_text().strip().splitlines()
    m, n = (int(tok) for tok in lines[0].split())
    if len(lines) != m + 1:
        raise ValueError(f"mask header says {m} rows, file has {len(lines) - 1}")
    grid = np.empty((m, n), dtype=bool)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) == 1 and n > 1:
            tokens = list(tokens[0])  # contiguous 0/1 row
        if len(tokens) != n:
            raise ValueError(f"mask row {i} has {len(tokens)} entries, expected {n}")
        grid[i] = [t == "1" for t in tokens]
    return ObservationMask(grid)


def psnr(img: ColorImage, ref: ColorImage) -> float:
    """Peak signal-to-noise ratio in dB against a 255 peak; +inf when equal."""
    img = np.asarray(img, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if img.shape != ref.shape:
        raise ValueError(f"dimension mismatch: {img.shape} vs {ref.shape}")
    mse = float(np.mean((img - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_window(radius: int = 5, sigma: float = 1.5) -> np.ndarray:
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(t**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(img: ColorImage, ref: ColorImage) -> float:
    """Structural similarity with the standard 11x11 Gaussian window
    (sigma 1.5) and constants from a 255 dynamic range, computed per
    channel over valid windows and averaged."""
    img = np.asarray(img, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if img.shape != ref.shape:
        raise ValueError(f"dimension mismatch: {img.shape} vs {ref.shape}")
    if img.ndim == 2:
        img = img[:, :, None]
        ref = ref[:, :, None]
    if min(img.shape[0], img.shape[1]) < 11:
        raise ValueError("images must be at least 11x11 for the SSIM window")

    kernel = _gaussian_window()
    c1 = (0.01 * 255.0) ** 2
    c2 = (0.03 * 255.0) ** 2

    def smooth(a):
        return fftconvolve(a, kernel, mode="valid")

    scores = []
    for c in range(img.shape[2]):
        x, y = img[..., c], ref[..., c]
        mu_x, mu_y = smooth(x), smooth(y)
        var_x = smooth(x * x) - mu_x**2
        var_y = smooth(y * y) - mu_y**2
        cov = smooth(x * y) - mu_x * mu_y
        num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
        den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))
