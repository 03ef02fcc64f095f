import warnings

import numpy as np
import pytest

from gaugeword.errors import (
    DegenerateSpectrum,
    NotPositiveDefinite,
    RankDeficientV,
    ShapeMismatch,
    SingularTransform,
)
from gaugeword.evaluation import cosine
from gaugeword.gauge import (
    FactorPair,
    apply_transform,
    canonicalize,
    sum_tie,
    symmetric_tie,
    whiten,
)
from gaugeword.lsa import lsa_solve
from gaugeword.matcore import Transform, same_orbit, sample_transform


def random_pair(rng, d=None):
    d = d or int(rng.integers(2, 7))
    n, p = rng.integers(d, 21, size=2)
    return FactorPair(rng.standard_normal((n, d)), rng.standard_normal((d, p)))


def svd_canonical_oracle(pair):
    """Canonical form read off the SVD of UV, with the sign rule applied to U."""
    a, s, bt = np.linalg.svd(pair.product(), full_matrices=False)
    d = pair.d
    u = a[:, :d] * s[:d]
    v = bt[:d].copy()
    for j in range(d):
        first = u[np.flatnonzero(np.abs(u[:, j]) > 1e-10)[0], j]
        if first < 0:
            u[:, j] *= -1
            v[j] *= -1
    return u, v, s[:d] ** 2


class TestApplyTransform:
    def test_identity(self):
        rng = np.random.default_rng(0)
        pair = random_pair(rng)
        out = apply_transform(np.eye(pair.d), pair)
        np.testing.assert_array_equal(out.U, pair.U)
        np.testing.assert_array_equal(out.V, pair.V)

    def test_orthogonal_preserves_cosines(self):
        rng = np.random.default_rng(1)
        pair = random_pair(rng, 4)
        q = sample_transform("orthogonal", 4, 5)
        out = apply_transform(q, pair)
        p = pair.V.shape[1]
        for i in range(p):
            for j in range(p):
                assert cosine(out.V[:, i], out.V[:, j]) == pytest.approx(
                    cosine(pair.V[:, i], pair.V[:, j]), abs=1e-10
                )

    def test_product_preserved(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            pair = random_pair(rng)
            out = apply_transform(rng.standard_normal((pair.d, pair.d)), pair)
            x = pair.product()
            assert np.max(np.abs(out.product() - x)) < 1e-9 * np.max(np.abs(x))

    def test_singular(self):
        pair = FactorPair(np.eye(2), np.eye(2))
        with pytest.raises(SingularTransform):
            apply_transform(np.ones((2, 2)), pair)

    def test_shape(self):
        with pytest.raises(ShapeMismatch):
            FactorPair(np.ones((3, 2)), np.ones((3, 4)))
        with pytest.raises(ShapeMismatch):
            apply_transform(np.eye(3), FactorPair(np.eye(2), np.eye(2)))


class TestCanonicalize:
    def test_fixed_point(self):
        pair = FactorPair(np.diag([2.0, 1.0]), np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        can = canonicalize(pair)
        np.testing.assert_allclose(can.pair.U, pair.U, atol=1e-12)
        np.testing.assert_allclose(can.pair.V, pair.V, atol=1e-12)
        np.testing.assert_allclose(can.spectrum, [4, 1], atol=1e-12)

    def test_hand_example(self):
        pair = FactorPair(np.eye(2), np.array([[2.0, 0, 0], [0, 1.0, 0]]))
        can = canonicalize(pair)
        np.testing.assert_allclose(can.pair.U, np.diag([2.0, 1.0]), atol=1e-12)
        np.testing.assert_allclose(can.pair.V, [[1, 0, 0], [0, 1, 0]], atol=1e-12)

    def test_invariants_and_svd_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pair = random_pair(rng)
            can = canonicalize(pair)
            u, v = can.pair.U, can.pair.V
            d = pair.d
            np.testing.assert_allclose(v @ v.T, np.eye(d), atol=1e-8)
            utu = u.T @ u
            np.testing.assert_allclose(utu - np.diag(np.diag(utu)), 0, atol=1e-8)
            assert np.all(np.diff(np.diag(utu)) <= 1e-8)
            for j in range(d):
                assert u[np.flatnonzero(np.abs(u[:, j]) > 1e-10)[0], j] > 0
            x = pair.product()
            assert np.max(np.abs(can.pair.product() - x)) < 1e-8 * np.max(np.abs(x))
            u_o, v_o, spec_o = svd_canonical_oracle(pair)
            np.testing.assert_allclose(u, u_o, atol=1e-7)
            np.testing.assert_allclose(v, v_o, atol=1e-7)
            np.testing.assert_allclose(can.spectrum, spec_o, rtol=1e-8)

    def test_gauge_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            pair = random_pair(rng)
            c = rng.standard_normal((pair.d, pair.d))
            a = canonicalize(pair).pair
            b = canonicalize(apply_transform(c, pair)).pair
            np.testing.assert_allclose(a.U, b.U, atol=1e-6)
            np.testing.assert_allclose(a.V, b.V, atol=1e-6)

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            once = canonicalize(random_pair(rng))
            twice = canonicalize(once.pair)
            np.testing.assert_allclose(twice.pair.U, once.pair.U, atol=1e-8)
            np.testing.assert_allclose(twice.pair.V, once.pair.V, atol=1e-8)

    def test_independent_canonicalizations_agree(self):
        rng = np.random.default_rng(6)
        pair = random_pair(rng, 5)
        v1 = canonicalize(apply_transform(sample_transform("general", 5, 1), pair)).pair.V
        v2 = canonicalize(apply_transform(sample_transform("upper_triangular", 5, 2), pair)).pair.V
        # the orthogonal relating two points of the constrained set is forced to I
        np.testing.assert_allclose(v1 @ v2.T, np.eye(5), atol=1e-6)
        np.testing.assert_allclose(v1, v2, atol=1e-6)

    def test_consistent_with_whitening(self):
        rng = np.random.default_rng(7)
        pair = random_pair(rng, 4)
        vc = canonicalize(pair).pair.V
        vw = whiten(pair.V)
        # vc = Q vw with Q = vc vw^T orthogonal
        q = same_orbit(vc @ vw.T, np.eye(4))
        assert q is not None
        np.testing.assert_allclose(q.matrix @ vw, vc, atol=1e-8)

    def test_degenerate_spectrum_flagged(self):
        pair = FactorPair(np.eye(3)[:, :2], np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        with pytest.warns(DegenerateSpectrum):
            can = canonicalize(pair)
        assert can.degenerate == [(0, 1)]
        assert not can.unique

    def test_zero_column_flagged(self):
        u = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
        pair = FactorPair(u, np.eye(2))
        with warnings.catch_warnings(record=True):
            warnings.simplefilter("always")
            can = canonicalize(pair)
        assert can.zero_columns == [1]

    def test_rank_deficient_v(self):
        pair = FactorPair(np.eye(3)[:, :2], np.array([[1.0, 2, 3], [2.0, 4, 6]]))
        with pytest.raises(RankDeficientV):
            canonicalize(pair)


class TestWhiten:
    def test_already_white(self):
        v = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        np.testing.assert_allclose(whiten(v), v, atol=1e-10)

    def test_diagonal(self):
        v = np.array([[2.0, 0, 0], [0, 1.0, 0]])
        np.testing.assert_allclose(whiten(v), [[1, 0, 0], [0, 1, 0]], atol=1e-12)

    def test_orbit(self):
        rng = np.random.default_rng(8)
        v = rng.standard_normal((4, 12))
        q = sample_transform("orthogonal", 4, 3).matrix
        a = whiten(q @ v)
        b = whiten(v)
        np.testing.assert_allclose(a @ a.T, np.eye(4), atol=1e-8)
        w = same_orbit(a @ b.T, np.eye(4))
        assert w is not None
        np.testing.assert_allclose(w.matrix @ b, a, atol=1e-8)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientV):
            whiten(np.array([[1.0, 1.0], [1.0, 1.0]]))


class TestTies:
    def test_already_tied(self):
        rng = np.random.default_rng(9)
        v = rng.standard_normal((3, 6))
        tie = symmetric_tie(FactorPair(v.T, v))
        np.testing.assert_allclose(tie.C.matrix, np.eye(3), atol=1e-10)
        assert tie.residual < 1e-12

    def test_hand_example(self):
        pair = lsa_solve(np.diag([4.0, 1.0]), 2, 0.0)
        np.testing.assert_allclose(np.abs(pair.U), np.eye(2))
        tie = symmetric_tie(pair)
        np.testing.assert_allclose(tie.C.matrix, np.diag([0.5, 1.0]), atol=1e-12)
        np.testing.assert_allclose(np.abs(tie.V_tied), np.diag([2.0, 1.0]), atol=1e-12)

    def test_symmetric_psd_matches_half_alpha(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            n = int(rng.integers(2, 11))
            g = rng.standard_normal((n, n))
            x = g @ g.T
            d = int(rng.integers(1, n + 1))
            for alpha in (0.0, 0.3, 1.0):
                tie = symmetric_tie(lsa_solve(x, d, alpha))
                half = lsa_solve(x, d, 0.5).V
                assert tie.residual < 1e-8
                signs = np.sign(np.sum(tie.V_tied * half, axis=1))
                np.testing.assert_allclose(signs[:, None] * tie.V_tied, half, atol=1e-6)
                u_tied = np.linalg.solve(tie.C.matrix.T, lsa_solve(x, d, alpha).U.T)
                np.testing.assert_allclose(u_tied, tie.V_tied, atol=1e-8)

    def test_not_tieable(self):
        # U^T = -V has M = -I
        v = np.eye(2)
        with pytest.raises(NotPositiveDefinite) as info:
            symmetric_tie(FactorPair(-v, v))
        np.testing.assert_allclose(info.value.eigenvalues, [-1, -1])

    def test_sum_tie(self):
        rng = np.random.default_rng(11)
        v = rng.standard_normal((3, 5))
        np.testing.assert_array_equal(sum_tie(FactorPair(v.T, v)), 2 * v)
        np.testing.assert_array_equal(sum_tie(FactorPair(np.zeros((5, 3)), v)), v)
        u = rng.standard_normal((5, 3))
        np.testing.assert_array_equal(sum_tie(FactorPair(u, v)), u.T + v)
        with pytest.raises(ShapeMismatch):
            sum_tie(FactorPair(np.ones((4, 3)), v))


def test_proposition_one_witness():
    v1, v2 = np.array([1.0, 0.0]), np.array([1.0, 1.0])
    lam = np.diag([2.0, 1.0])
    assert cosine(v1, v2) == pytest.approx(0.707107, abs=1e-6)
    assert cosine(lam @ v1, lam @ v2) == pytest.approx(0.894427, abs=1e-6)
    rng = np.random.default_rng(12)
    v = rng.standard_normal((3, 6))
    c = -2.5 * np.eye(3)
    for i in range(6):
        for j in range(6):
            assert cosine(c @ v[:, i], c @ v[:, j]) == pytest.approx(cosine(v[:, i], v[:, j]), abs=1e-12)


def test_transform_kind_passthrough():
    t = Transform(np.diag([2.0, 3.0]), "diagonal")
    out = apply_transform(t, FactorPair(np.eye(2), np.eye(2)))
    np.testing.assert_allclose(out.U, np.diag([0.5, 1 / 3]))
