"""QSVD, norms, shrinkage operators: examples, properties, brute-force oracles."""

import numpy as np
import pytest

from quatrec.quat import (
    Quaternion,
    QuaternionMatrix,
    conj_transpose,
    entry_moduli,
    frobenius_norm,
    qmat_mul,
    randn_qmatrix,
    to_adjoint,
)
from quatrec.qsvd import (
    QSVDFactors,
    nuclear_norm,
    qsvd,
    qtnn,
    singular_values,
    soft_threshold,
    svt,
    truncated_factors,
)


def real_diag(*vals):
    d = np.diag(np.asarray(vals, dtype=float))
    z = np.zeros_like(d)
    return QuaternionMatrix.from_planes(d, z, z, z)


def rel_err(a: QuaternionMatrix, b: QuaternionMatrix) -> float:
    return frobenius_norm(a - b) / max(frobenius_norm(b), 1e-300)


def unitarity_defect(u: QuaternionMatrix) -> float:
    n = u.shape[1]
    gram = qmat_mul(conj_transpose(u), u)
    return float(np.abs(gram.planes - QuaternionMatrix.eye(n).planes).max())


def quat_trace(a: QuaternionMatrix) -> Quaternion:
    return Quaternion(*(float(np.trace(p)) for p in a.planes))


class TestQSVD:
    def test_real_diag(self):
        f = qsvd(real_diag(3.0, 1.0))
        assert np.allclose(f.sigma, [3.0, 1.0], atol=1e-14)
        assert np.allclose(f.u.planes, QuaternionMatrix.eye(2).planes, atol=1e-12)
        assert np.allclose(f.v.planes, QuaternionMatrix.eye(2).planes, atol=1e-12)

    def test_sigma_matches_paired_adjoint_values(self):
        rng = np.random.default_rng(20)
        q = randn_qmatrix(9, 6, rng)
        sc = np.linalg.svd(to_adjoint(q), compute_uv=False)  # independent route
        s = singular_values(q)
        assert np.abs(np.repeat(s, 2) - sc).max() <= 1e-10 * max(sc[0], 1.0)

    def test_rank_one_outer_product(self):
        rng = np.random.default_rng(21)
        u = randn_qmatrix(5, 1, rng)
        u = u / frobenius_norm(u)
        v = randn_qmatrix(7, 1, rng)
        v = v / frobenius_norm(v)
        f = qsvd(qmat_mul(u, conj_transpose(v)))
        assert abs(f.sigma[0] - 1.0) <= 1e-12
        assert np.abs(f.sigma[1:]).max() <= 1e-12

    def test_reconstruction_and_unitarity_random(self):
        rng = np.random.default_rng(22)
        for m, n in [(20, 15), (15, 20), (8, 8), (1, 5), (6, 1)]:
            q = randn_qmatrix(m, n, rng)
            f = qsvd(q)
            assert rel_err(f.reconstruct(), q) <= 1e-10
            assert unitarity_defect(f.u) <= 1e-10
            assert unitarity_defect(f.v) <= 1e-10
            assert np.all(f.sigma >= 0)
            assert np.all(np.diff(f.sigma) <= 1e-12)

    def test_degenerate_spectra(self):
        # repeated and zero singular values exercise the grouped extraction
        for q in [real_diag(2.0, 2.0), QuaternionMatrix.eye(4),
                  QuaternionMatrix.zeros(3, 5), real_diag(5.0, 5.0, 1.0, 0.0)]:
            f = qsvd(q)
            assert frobenius_norm(f.reconstruct() - q) <= 1e-10 * max(1.0, frobenius_norm(q))
            assert unitarity_defect(f.u) <= 1e-10
            assert unitarity_defect(f.v) <= 1e-10


class TestNorms:
    def test_diag_nuclear_and_truncated(self):
        d = real_diag(3.0, 1.0)
        assert nuclear_norm(d) == pytest.approx(4.0, abs=1e-12)
        assert qtnn(d, 1) == pytest.approx(1.0, abs=1e-12)

    def test_full_truncation_is_zero(self):
        rng = np.random.default_rng(23)
        q = randn_qmatrix(5, 4, rng)
        assert qtnn(q, 4) == pytest.approx(0.0, abs=1e-12)

    def test_qtnn_zero_equals_nuclear(self):
        rng = np.random.default_rng(24)
        q = randn_qmatrix(4, 4, rng)
        assert qtnn(q, 0) == pytest.approx(nuclear_norm(q), rel=1e-13)

    def test_qtnn_complement_identity(self):
        rng = np.random.default_rng(25)
        q = randn_qmatrix(6, 4, rng)
        s = singular_values(q)
        assert qtnn(q, 2) == pytest.approx(nuclear_norm(q) - s[:2].sum(), rel=1e-12)
        # cross-check the values against an independent adjoint SVD
        sc = np.linalg.svd(to_adjoint(q), compute_uv=False)
        assert qtnn(q, 2) == pytest.approx(sc[::2][2:].sum(), rel=1e-10)

    def test_qtnn_range_checked(self):
        rng = np.random.default_rng(26)
        q = randn_qmatrix(4, 4, rng)
        with pytest.raises(ValueError):
            qtnn(q, 5)
        with pytest.raises(ValueError):
            qtnn(q, -1)


class TestSVT:
    def test_zero_shrinkage_is_identity(self):
        rng = np.random.default_rng(27)
        q = randn_qmatrix(6, 5, rng)
        assert rel_err(svt(q, 0.0), q) <= 1e-10

    def test_real_diag_example(self):
        out = svt(real_diag(3.0, 1.0), 2.0)
        assert np.allclose(out.planes, real_diag(1.0, 0.0).planes, atol=1e-12)

    def test_singular_values_shrunk(self):
        rng = np.random.default_rng(28)
        q = randn_qmatrix(7, 5, rng)
        tau = 0.8 * singular_values(q)[2]
        s_out = singular_values(svt(q, tau))
        expected = np.maximum(singular_values(q) - tau, 0.0)
        assert np.abs(s_out - expected).max() <= 1e-8 * max(1.0, expected[0])

    def test_random_probe_prox_oracle(self):
        # svt(Q, tau) minimizes tau*||X||_* + 0.5*||X - Q||_F^2
        rng = np.random.default_rng(29)
        q = randn_qmatrix(6, 5, rng)
        tau = 1.2
        x = svt(q, tau)

        def objective(m):
            return tau * nuclear_norm(m) + 0.5 * frobenius_norm(m - q) ** 2

        f_star = objective(x)
        for scale in (1e-3, 1e-2, 1e-1, 1.0):
            for _ in range(50):
                probe = x + scale * randn_qmatrix(6, 5, rng)
                assert f_star <= objective(probe) + 1e-12

    def test_nonexpansive(self):
        rng = np.random.default_rng(30)
        for _ in range(10):
            p = randn_qmatrix(5, 5, rng)
            q = randn_qmatrix(5, 5, rng)
            tau = float(rng.uniform(0, 2))
            lhs = frobenius_norm(svt(p, tau) - svt(q, tau))
            assert lhs <= frobenius_norm(p - q) + 1e-10

    def test_negative_tau_rejected(self):
        with pytest.raises(ValueError):
            svt(QuaternionMatrix.zeros(2, 2), -0.1)


def prox_objective(x_pts: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """lam*|x| + |y - x|^2 on a (P, 4) block of scalar quaternions."""
    mod = np.sqrt(np.sum(x_pts * x_pts, axis=1))
    return lam * mod + np.sum((x_pts - y) ** 2, axis=1)


def grid_prox_minimum(y: np.ndarray, lam: float, step: float = 0.01):
    """Brute-force minimizer of the scalar prox objective: coarse 4-D grid
    bracketing {0, y} and beyond, then a dense step-sized local grid."""
    lo = np.minimum(0.0, y) - 0.6 * lam - 0.05
    hi = np.maximum(0.0, y) + 0.6 * lam + 0.05
    axes = [np.linspace(lo[c], hi[c], 17) for c in range(4)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    center = pts[np.argmin(prox_objective(pts, y, lam))]
    axes = [center[c] + np.arange(-8, 9) * step for c in range(4)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    vals = prox_objective(pts, y, lam)
    best = int(np.argmin(vals))
    return pts[best], float(vals[best])


class TestSoftThreshold:
    def test_scalar_pure_i(self):
        q = QuaternionMatrix.from_planes([[0.0]], [[3.0]], [[0.0]], [[0.0]])
        out = soft_threshold(q, 2.0)
        assert np.allclose(out.planes[:, 0, 0], [0, 1, 0, 0], atol=1e-14)

    def test_scalar_direction_kept(self):
        q = QuaternionMatrix.from_planes([[1.0]], [[1.0]], [[1.0]], [[1.0]])
        out = soft_threshold(q, 1.0)  # modulus 2 -> 1
        assert np.allclose(out.planes[:, 0, 0], [0.5, 0.5, 0.5, 0.5], atol=1e-14)

    def test_zero_entries_stay_zero(self):
        q = QuaternionMatrix.zeros(3, 3)
        assert not soft_threshold(q, 0.5).planes.any()

    def test_entrywise_independence(self):
        rng = np.random.default_rng(31)
        q = randn_qmatrix(4, 3, rng)
        full = soft_threshold(q, 0.7)
        for i in range(4):
            for j in range(3):
                one = QuaternionMatrix(q.planes[:, i:i + 1, j:j + 1].copy())
                assert np.allclose(soft_threshold(one, 0.7).planes[:, 0, 0],
                                   full.planes[:, i, j], atol=1e-14)

    def test_grid_oracle_confirms_closed_form(self):
        # The prox of lam*||x||_1 + ||y - x||_F^2 shrinks the modulus by
        # lam/2.  A dense 4-D grid search never finds a better point, and
        # comes within grid resolution of the closed form.
        rng = np.random.default_rng(32)
        for _ in range(100):
            y = rng.standard_normal(4) * 1.5
            for lam in (0.1, 1.0):
                ym = QuaternionMatrix(y.reshape(4, 1, 1).copy())
                closed = soft_threshold(ym, lam / 2).planes.reshape(1, 4)
                f_closed = float(prox_objective(closed, y, lam)[0])
                _, f_grid = grid_prox_minimum(y, lam)
                assert f_closed <= f_grid + 1e-9
                assert f_grid - f_closed <= 0.05  # grid resolution slack


class TestTruncatedFactors:
    def test_axis_selectors_on_diag(self):
        q = real_diag(3.0, 2.0, 1.0)
        tf = truncated_factors(qsvd(q), 2)
        prod = qmat_mul(qmat_mul(tf.a, q), conj_transpose(tf.b))
        assert abs(quat_trace(prod)) == pytest.approx(5.0, abs=1e-10)

    def test_row_orthonormality(self):
        rng = np.random.default_rng(33)
        q = randn_qmatrix(8, 6, rng)
        tf = truncated_factors(qsvd(q), 3)
        for mat, r in [(tf.a, 3), (tf.b, 3)]:
            gram = qmat_mul(mat, conj_transpose(mat))
            assert np.abs(gram.planes - QuaternionMatrix.eye(r).planes).max() <= 1e-10

    def test_trace_equals_leading_sigma_sum(self):
        rng = np.random.default_rng(34)
        q = randn_qmatrix(6, 6, rng)
        f = qsvd(q)
        tf = truncated_factors(f, 2)
        prod = qmat_mul(qmat_mul(tf.a, q), conj_transpose(tf.b))
        assert abs(quat_trace(prod)) == pytest.approx(f.sigma[:2].sum(), rel=1e-8)

    def test_range_checked(self):
        rng = np.random.default_rng(35)
        f = qsvd(randn_qmatrix(4, 5, rng))
        with pytest.raises(ValueError):
            truncated_factors(f, 0)
        with pytest.raises(ValueError):
            truncated_factors(f, 4)


class TestTraceBound:
    def test_random_feasible_pairs_never_exceed(self):
        # |tr(A Q B^H)| <= sum of the r largest singular values for any
        # orthonormal-row pair; equality for the truncation factors.
        rng = np.random.default_rng(36)
        for _ in range(20):
            q = randn_qmatrix(8, 8, rng)
            s = singular_values(q)
            for r in (1, 2, 4):
                bound = s[:r].sum()
                a = truncated_factors(qsvd(randn_qmatrix(8, 8, rng)), r).a
                b = truncated_factors(qsvd(randn_qmatrix(8, 8, rng)), r).b
                t = quat_trace(qmat_mul(qmat_mul(a, q), conj_transpose(b)))
                assert abs(t) <= bound + 1e-8
            tf = truncated_factors(qsvd(q), 4)
            t = quat_trace(qmat_mul(qmat_mul(tf.a, q), conj_transpose(tf.b)))
            assert abs(t) == pytest.approx(s[:4].sum(), rel=1e-8)
