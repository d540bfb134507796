"""Quaternion SVD and the proximal operators built on it.

The QSVD is computed through the 2M x 2N complex adjoint: its singular
values are those of the quaternion matrix, each appearing twice, and each
quaternion singular vector corresponds to a pair of adjoint columns related
by the antilinear map u -> -J conj(u) with J = [[0, I], [-I, 0]].  Repeated
singular values make the complex SVD return an arbitrary basis of the paired
subspace, so extraction runs group-wise with a quaternion-compatible
Gram-Schmidt instead of trusting a fixed column stride.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quat import QuaternionMatrix, cd_join, conj_transpose, from_adjoint, entry_moduli, qmat_mul, to_adjoint

__all__ = [
    "QSVDFactors",
    "TruncatedFactors",
    "qsvd",
    "singular_values",
    "nuclear_norm",
    "qtnn",
    "svt",
    "svt_values",
    "soft_threshold",
    "truncated_factors",
]


@dataclass
class QSVDFactors:
    """Unitary factors u (M x M), v (N x N) and sorted singular values."""

    u: QuaternionMatrix
    sigma: np.ndarray
    v: QuaternionMatrix

    def reconstruct(self) -> QuaternionMatrix:
        """U * diag(sigma) * V^H."""
        k = self.sigma.size
        uk = QuaternionMatrix(self.u.planes[:, :, :k] * self.sigma[None, None, :])
        vk = QuaternionMatrix(self.v.planes[:, :, :k])
        return qmat_mul(uk, conj_transpose(vk))


@dataclass
class TruncatedFactors:
    """Conjugate-transposed leading singular vectors: a (r x M), b (r x N)."""

    a: QuaternionMatrix
    b: QuaternionMatrix
    r: int


def _partner(c: np.ndarray) -> np.ndarray:
    """-J conj(c): the adjoint column paired with c under the embedding."""
    m = c.shape[0] // 2
    return np.concatenate([-c[m:].conj(), c[:m].conj()])


def _pick_largest(cols: np.ndarray) -> tuple[int, float]:
    norms = np.linalg.norm(cols, axis=0)
    k = int(np.argmax(norms))
    return k, float(norms[k])


def _extract_matched(ug: np.ndarray, vg: np.ndarray, count: int):
    """Pull `count` quaternion-compatible column pairs out of one singular
    group, keeping the left/right columns matched (same recombination
    coefficients on both sides preserves Q v = sigma u exactly)."""
    u_work, v_work = ug.copy(), vg.copy()
    out_u, out_v = [], []
    for _ in range(count):
        k, nrm = _pick_largest(u_work)
        u = u_work[:, k] / nrm
        v = v_work[:, k] / nrm
        u2, v2 = _partner(u), _partner(v)
        out_u.append(u)
        out_v.append(v)
        alpha = u.conj() @ u_work
        beta = u2.conj() @ u_work
        u_work = u_work - np.outer(u, alpha) - np.outer(u2, beta)
        v_work = v_work - np.outer(v, alpha) - np.outer(v2, beta)
        u_work = np.delete(u_work, k, axis=1)
        v_work = np.delete(v_work, k, axis=1)
    return out_u, out_v


def _extract_one_sided(g: np.ndarray, count: int):
    """Same idea for a null-space group, where left and right columns are
    unconstrained by each other."""
    work = g.copy()
    out = []
    for _ in range(count):
        k, nrm = _pick_largest(work)
        u = work[:, k] / nrm
        u2 = _partner(u)
        out.append(u)
        work = work - np.outer(u, u.conj() @ work) - np.outer(u2, u2.conj() @ work)
        work = np.delete(work, k, axis=1)
    return out


def _adjoint_col_to_cd(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Adjoint column [up; -conj(uq)] -> Cayley-Dickson pair (up, uq)."""
    m = c.shape[0] // 2
    return c[:m].copy(), -c[m:].conj()


def _cd_rmul(p: np.ndarray, q: np.ndarray, fp: complex, fq: complex):
    """Right-multiply a CD column (p + q*j) by the scalar (fp + fq*j)."""
    return p * fp - q * np.conj(fq), p * fq + q * np.conj(fp)


def _canonical_phase(p: np.ndarray, q: np.ndarray) -> tuple[complex, complex]:
    """Unit quaternion f (CD form) making the largest entry of the column
    real and positive; gives a deterministic sign/phase convention."""
    mod2 = np.abs(p) ** 2 + np.abs(q) ** 2
    ell = int(np.argmax(mod2))
    r = np.sqrt(mod2[ell])
    if r == 0.0:
        return 1.0 + 0.0j, 0.0 + 0.0j
    # conj(p + q*j) = conj(p) - q*j, scaled to unit modulus
    return np.conj(p[ell]) / r, -q[ell] / r


def _complete_basis(cols_p: list, cols_q: list, dim: int) -> None:
    """Extend quaternion-orthonormal columns (CD form) to a full basis of
    H^dim using standard basis candidates and two-pass Gram-Schmidt."""
    for cand in range(dim):
        if len(cols_p) == dim:
            return
        p = np.zeros(dim, dtype=complex)
        q = np.zeros(dim, dtype=complex)
        p[cand] = 1.0
        for _ in range(2):
            for wp, wq in zip(cols_p, cols_q):
                # coefficient w^H c as a quaternion scalar in CD form
                cp = wp.conj() @ p + wq @ q.conj()
                cq = wp.conj() @ q - wq @ p.conj()
                dp, dq = _cd_rmul(wp, wq, cp, cq)
                p, q = p - dp, q - dq
        nrm = np.sqrt(np.sum(np.abs(p) ** 2 + np.abs(q) ** 2))
        if nrm > 1e-6:
            cols_p.append(p / nrm)
            cols_q.append(q / nrm)
    if len(cols_p) != dim:
        raise RuntimeError("failed to complete quaternion basis")


def qsvd(mat: QuaternionMatrix) -> QSVDFactors:
    """Full quaternion SVD with square unitary factors.

    Singular values come from the adjoint's SVD with the pairwise
    duplicates collapsed; ties within 1e-12 (relative to the largest value)
    are treated as one degenerate group and re-orthonormalized jointly.
    """
    m, n = mat.shape
    k = min(m, n)
    uc, sc, vch = np.linalg.svd(to_adjoint(mat), full_matrices=False)
    vc = vch.conj().T
    sigma = sc[0::2].copy()

    scale = float(sigma[0]) if sigma.size and sigma[0] > 0 else 1.0
    group_tol = 1e-12 * scale
    zero_tol = 2 * max(m, n) * np.finfo(np.float64).eps * scale

    u_cd: list[tuple[np.ndarray, np.ndarray]] = []
    v_cd: list[tuple[np.ndarray, np.ndarray]] = []
    i = 0
    while i < k:
        j = i + 1
        while j < k and sigma[j - 1] - sigma[j] <= group_tol:
            j += 1
        ug, vg = uc[:, 2 * i:2 * j], vc[:, 2 * i:2 * j]
        if sigma[i] <= zero_tol:
            us = _extract_one_sided(ug, j - i)
            vs = _extract_one_sided(vg, j - i)
            for u_col, v_col in zip(us, vs):
                up, uq = _adjoint_col_to_cd(u_col)
                vp, vq = _adjoint_col_to_cd(v_col)
                u_cd.append(_cd_rmul(up, uq, *_canonical_phase(up, uq)))
                v_cd.append(_cd_rmul(vp, vq, *_canonical_phase(vp, vq)))
        else:
            us, vs = _extract_matched(ug, vg, j - i)
            for u_col, v_col in zip(us, vs):
                up, uq = _adjoint_col_to_cd(u_col)
                vp, vq = _adjoint_col_to_cd(v_col)
                # one shared phase keeps u sigma v^H invariant
                fp, fq = _canonical_phase(up, uq)
                u_cd.append(_cd_rmul(up, uq, fp, fq))
                v_cd.append(_cd_rmul(vp, vq, fp, fq))
        i = j

    u_p = [p for p, _ in u_cd]
    u_q = [q for _, q in u_cd]
    v_p = [p for p, _ in v_cd]
    v_q = [q for _, q in v_cd]
    _complete_basis(u_p, u_q, m)
    _complete_basis(v_p, v_q, n)

    u = cd_join(np.stack(u_p, axis=1), np.stack(u_q, axis=1))
    v = cd_join(np.stack(v_p, axis=1), np.stack(v_q, axis=1))
    return QSVDFactors(u=u, sigma=sigma, v=v)


def singular_values(mat: QuaternionMatrix) -> np.ndarray:
    """Sorted (descending) singular values without computing the factors."""
    sc = np.linalg.svd(to_adjoint(mat), compute_uv=False)
    return sc[0::2].copy()


def nuclear_norm(mat: QuaternionMatrix) -> float:
    """Sum of all singular values."""
    return float(singular_values(mat).sum())


def qtnn(mat: QuaternionMatrix, r: int) -> float:
    """Sum of the min(M,N) - r smallest singular values."""
    s = singular_values(mat)
    if not 0 <= r <= s.size:
        raise ValueError(f"truncation {r} out of range [0, {s.size}]")
    return float(s[r:].sum())


def svt(mat: QuaternionMatrix, tau: float) -> QuaternionMatrix:
    """Singular value shrinkage U * diag(max(sigma - tau, 0)) * V^H."""
    return svt_values(mat, tau)[0]


def svt_values(mat: QuaternionMatrix, tau: float) -> tuple[QuaternionMatrix, np.ndarray]:
    """svt plus the shrunk singular values of the result.

    Computed as a singular-value function of the complex adjoint (pairs
    shrink identically), which is basis-independent and therefore safe for
    degenerate spectra without any vector extraction.
    """
    if tau < 0:
        raise ValueError("shrinkage level must be nonnegative")
    uc, sc, vch = np.linalg.svd(to_adjoint(mat), full_matrices=False)
    shrunk = np.maximum(sc - tau, 0.0)
    nnz = int(np.count_nonzero(shrunk))
    if nnz == 0:
        return QuaternionMatrix.zeros(*mat.shape), shrunk[0::2].copy()
    rec = (uc[:, :nnz] * shrunk[:nnz]) @ vch[:nnz, :]
    # structure deviation is LAPACK roundoff; symmetrize rather than reject
    return from_adjoint(rec, tol=1e-8), shrunk[0::2].copy()


def soft_threshold(mat: QuaternionMatrix, tau: float) -> QuaternionMatrix:
    """Entrywise modulus shrinkage (q / |q|) * max(|q| - tau, 0)."""
    if tau < 0:
        raise ValueError("shrinkage level must be nonnegative")
    mod = entry_moduli(mat)
    with np.errstate(invalid="ignore", divide="ignore"):
        gain = np.where(mod > tau, (mod - tau) / mod, 0.0)
    return QuaternionMatrix(mat.planes * gain[None, :, :])


def truncated_factors(factors: QSVDFactors, r: int) -> TruncatedFactors:
    """Rows of a/b are the conjugate-transposed first r singular vectors,
    so a a^H = b b^H = I_r."""
    m = factors.u.shape[0]
    n = factors.v.shape[0]
    if not 1 <= r < min(m, n):
        raise ValueError(f"truncation {r} out of range [1, {min(m, n) - 1}]")
    a = conj_transpose(QuaternionMatrix(factors.u.planes[:, :, :r]))
    b = conj_transpose(QuaternionMatrix(factors.v.planes[:, :, :r]))
    return TruncatedFactors(a=a, b=b, r=r)
