"""Left-handed quaternion discrete cosine transform and its inverse.

The transform runs through the Cayley-Dickson form: an orthonormal 2-D
DCT-II on each complex part, reassembly, then a left multiplication of every
entry by a pure unit quaternion axis u.  Since |u| = 1 and the DCT kernel is
orthonormal, the whole map is energy preserving, which is what lets the
solver move quadratic penalties between the spatial and transform domains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .quat import Quaternion, QuaternionMatrix, cd_join, cd_split, left_qsmul

__all__ = [
    "TransformAxis",
    "TransformPlan",
    "default_axis",
    "complex_dct2",
    "complex_idct2",
    "qdct_l",
    "iqdct_l",
]


@dataclass(frozen=True)
class TransformAxis:
    """Pure unit quaternion axis with u^2 = -1."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        nrm = float(np.sqrt(self.x**2 + self.y**2 + self.z**2))
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ValueError("transform axis must be a nonzero pure quaternion")
        object.__setattr__(self, "x", self.x / nrm)
        object.__setattr__(self, "y", self.y / nrm)
        object.__setattr__(self, "z", self.z / nrm)

    @property
    def quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    @property
    def inverse(self) -> Quaternion:
        # pure unit: u^-1 = conj(u) = -u
        return Quaternion(0.0, -self.x, -self.y, -self.z)


def default_axis() -> TransformAxis:
    """The gray-line axis (i + j + k)/sqrt(3), symmetric in the channels."""
    return TransformAxis(1.0, 1.0, 1.0)


@dataclass(frozen=True)
class TransformPlan:
    """Dimensions plus axis; the DCT kernel is implied by the sizes."""

    rows: int
    cols: int
    axis: TransformAxis = field(default_factory=default_axis)

    def check(self, mat: QuaternionMatrix) -> None:
        if mat.shape != (self.rows, self.cols):
            raise ValueError(f"plan is {self.rows}x{self.cols}, matrix is "
                             f"{mat.shape[0]}x{mat.shape[1]}")


def complex_dct2(x: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II, applied to real and imaginary parts alike."""
    return scipy.fft.dctn(x, type=2, norm="ortho")


def complex_idct2(x: np.ndarray) -> np.ndarray:
    """Inverse of complex_dct2 (orthonormal DCT-III)."""
    return scipy.fft.idctn(x, type=2, norm="ortho")


def qdct_l(mat: QuaternionMatrix, plan: TransformPlan) -> QuaternionMatrix:
    """Forward transform: split, DCT both complex parts, reassemble, then
    left-multiply every entry by the axis quaternion."""
    plan.check(mat)
    fp, fq = cd_split(mat)
    staged = cd_join(complex_dct2(fp), complex_dct2(fq))
    return left_qsmul(plan.axis.quaternion, staged)


def iqdct_l(mat: QuaternionMatrix, plan: TransformPlan) -> QuaternionMatrix:
    """Inverse transform: left-multiply by u^-1 = -u first, then undo the
    complex DCTs part by part."""
    plan.check(mat)
    staged = left_qsmul(plan.axis.inverse, mat)
    gp, gq = cd_split(staged)
    return cd_join(complex_idct2(gp), complex_idct2(gq))
