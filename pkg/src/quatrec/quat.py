"""Quaternion scalar and matrix algebra on real component planes.

A quaternion q = w + x*i + y*j + z*k is stored as four reals; a quaternion
matrix is stored as four parallel real planes (struct-of-arrays), which keeps
the Cayley-Dickson split and the complex-adjoint embedding copy-light and
lets every elementwise operation run as plain numpy plane arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quaternion",
    "QuaternionMatrix",
    "qmul",
    "qmat_mul",
    "conj_transpose",
    "frobenius_norm",
    "cd_split",
    "cd_join",
    "to_adjoint",
    "from_adjoint",
    "real_inner",
    "left_qsmul",
    "entry_moduli",
    "qtrace",
    "randn_qmatrix",
]


@dataclass(frozen=True)
class Quaternion:
    """Scalar quaternion w + x*i + y*j + z*k."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __abs__(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    __rmul__ = __mul__

    @property
    def is_pure(self) -> bool:
        return self.w == 0.0


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product p*q (non-commutative; i*j = k, j*i = -k)."""
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


class QuaternionMatrix:
    """M x N quaternion matrix held as a (4, M, N) float64 plane stack.

    Instances are treated as immutable: every operation returns a new
    matrix, so values can be shared freely across threads.
    """

    __slots__ = ("planes",)

    def __init__(self, planes: np.ndarray):
        planes = np.asarray(planes, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[0] != 4:
            raise ValueError(f"expected (4, M, N) plane stack, got {planes.shape}")
        self.planes = planes

    # -- construction -----------------------------------------------------

    @classmethod
    def from_planes(cls, q0, q1, q2, q3) -> "QuaternionMatrix":
        q0, q1, q2, q3 = (np.asarray(p, dtype=np.float64) for p in (q0, q1, q2, q3))
        if not (q0.shape == q1.shape == q2.shape == q3.shape) or q0.ndim != 2:
            raise ValueError("component planes must share one 2-D shape")
        return cls(np.stack([q0, q1, q2, q3]))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QuaternionMatrix":
        return cls(np.zeros((4, rows, cols)))

    @classmethod
    def eye(cls, n: int) -> "QuaternionMatrix":
        planes = np.zeros((4, n, n))
        planes[0] = np.eye(n)
        return cls(planes)

    # -- views -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1], self.planes.shape[2]

    @property
    def q0(self) -> np.ndarray:
        return self.planes[0]

    @property
    def q1(self) -> np.ndarray:
        return self.planes[1]

    @property
    def q2(self) -> np.ndarray:
        return self.planes[2]

    @property
    def q3(self) -> np.ndarray:
        return self.planes[3]

    @property
    def is_pure(self) -> bool:
        return not np.any(self.planes[0])

    def copy(self) -> "QuaternionMatrix":
        return QuaternionMatrix(self.planes.copy())

    def __getitem__(self, ij) -> Quaternion:
        i, j = ij
        return Quaternion(*(float(self.planes[c, i, j]) for c in range(4)))

    # -- real-linear arithmetic --------------------------------------------

    def __add__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        return QuaternionMatrix(self.planes + other.planes)

    def __sub__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        return QuaternionMatrix(self.planes - other.planes)

    def __mul__(self, s: float) -> "QuaternionMatrix":
        return QuaternionMatrix(self.planes * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "QuaternionMatrix":
        return QuaternionMatrix(self.planes / float(s))

    def __neg__(self) -> "QuaternionMatrix":
        return QuaternionMatrix(-self.planes)

    def __repr__(self) -> str:
        m, n = self.shape
        return f"QuaternionMatrix({m}x{n})"


def qmat_mul(a: QuaternionMatrix, b: QuaternionMatrix) -> QuaternionMatrix:
    """Matrix product with Hamilton-product entries; factor order preserved."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    a0, a1, a2, a3 = a.planes
    b0, b1, b2, b3 = b.planes
    return QuaternionMatrix(np.stack([
        a0 @ b0 - a1 @ b1 - a2 @ b2 - a3 @ b3,
        a0 @ b1 + a1 @ b0 + a2 @ b3 - a3 @ b2,
        a0 @ b2 - a1 @ b3 + a2 @ b0 + a3 @ b1,
        a0 @ b3 + a1 @ b2 - a2 @ b1 + a3 @ b0,
    ]))


def conj_transpose(a: QuaternionMatrix) -> QuaternionMatrix:
    """A^H: transpose with entrywise conjugation."""
    q0, q1, q2, q3 = a.planes
    return QuaternionMatrix(np.stack([q0.T, -q1.T, -q2.T, -q3.T]))


def frobenius_norm(a: QuaternionMatrix) -> float:
    """sqrt of the summed squared entry moduli."""
    return float(np.sqrt(np.sum(a.planes * a.planes)))


def entry_moduli(a: QuaternionMatrix) -> np.ndarray:
    """M x N array of entry moduli |q_ij|."""
    return np.sqrt(np.sum(a.planes * a.planes, axis=0))


def real_inner(a: QuaternionMatrix, b: QuaternionMatrix) -> float:
    """Re(tr(A^H B)); equals the flat dot product of the plane stacks."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a.planes * b.planes))


def left_qsmul(s: Quaternion, a: QuaternionMatrix) -> QuaternionMatrix:
    """Left-multiply every entry by the scalar quaternion s."""
    a0, a1, a2, a3 = a.planes
    return QuaternionMatrix(np.stack([
        s.w * a0 - s.x * a1 - s.y * a2 - s.z * a3,
        s.w * a1 + s.x * a0 + s.y * a3 - s.z * a2,
        s.w * a2 - s.x * a3 + s.y * a0 + s.z * a1,
        s.w * a3 + s.x * a2 - s.y * a1 + s.z * a0,
    ]))


# -- Cayley-Dickson form and the complex adjoint ----------------------------


def cd_split(a: QuaternionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Cayley-Dickson pair (Qp, Qq) with A = Qp + Qq * j."""
    return a.q0 + 1j * a.q1, a.q2 + 1j * a.q3


def cd_join(qp: np.ndarray, qq: np.ndarray) -> QuaternionMatrix:
    """Inverse of cd_split; exact (re/im extraction loses nothing)."""
    if qp.shape != qq.shape:
        raise ValueError("Cayley-Dickson parts must share a shape")
    return QuaternionMatrix(np.stack([qp.real, qp.imag, qq.real, qq.imag]))


def to_adjoint(a: QuaternionMatrix) -> np.ndarray:
    """2M x 2N complex adjoint [[Qp, Qq], [-conj(Qq), conj(Qp)]].

    The embedding is an algebra homomorphism: it maps quaternion matrix
    products, conjugate transposes and Frobenius norms (up to sqrt(2)) to
    their complex counterparts.
    """
    qp, qq = cd_split(a)
    return np.block([[qp, qq], [-qq.conj(), qp.conj()]])


def from_adjoint(qc: np.ndarray, tol: float = 1e-12) -> QuaternionMatrix:
    """Invert to_adjoint, averaging the two redundant block copies.

    Raises ValueError on odd dimensions or when the block structure is
    violated beyond ``tol`` (relative to the largest entry).
    """
    qc = np.asarray(qc)
    if qc.ndim != 2 or qc.shape[0] % 2 or qc.shape[1] % 2:
        raise ValueError(f"adjoint must be 2M x 2N, got {qc.shape}")
    m, n = qc.shape[0] // 2, qc.shape[1] // 2
    tl, tr = qc[:m, :n], qc[:m, n:]
    bl, br = qc[m:, :n], qc[m:, n:]
    scale = max(1.0, float(np.abs(qc).max()))
    if (np.abs(bl + tr.conj()).max() > tol * scale
            or np.abs(br - tl.conj()).max() > tol * scale):
        raise ValueError("array does not have quaternion adjoint block structure")
    qp = 0.5 * (tl + br.conj())
    qq = 0.5 * (tr - bl.conj())
    return cd_join(qp, qq)


def qtrace(a: QuaternionMatrix) -> Quaternion:
    """Quaternion-valued trace of a square matrix."""
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"trace needs a square matrix, got {a.shape}")
    return Quaternion(*(float(np.trace(p)) for p in a.planes))


def randn_qmatrix(rows: int, cols: int, rng: np.random.Generator) -> QuaternionMatrix:
    """Quaternion matrix with i.i.d. standard normal component planes."""
    return QuaternionMatrix(rng.standard_normal((4, rows, cols)))
