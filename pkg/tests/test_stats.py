import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.cluster.hierarchy import linkage as scipy_linkage
from scipy.spatial.distance import pdist

from groindex.stats import (Dendrogram, Distance, Linkage, StatsError, covariance_pca, hcluster,
                            jacobi_eigh, log_transform, ols, pearson, rank_desc)
from groindex.synthetic import planted_profiles

finite = st.floats(-1e3, 1e3, allow_nan=False)


def canonical(labels):
    seen = {}
    return [seen.setdefault(l, len(seen)) for l in labels]


class TestPearson:
    def test_exact_linear(self):
        x = np.arange(1, 11)
        assert pearson(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-15)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-15)

    def test_hand(self):
        # cov = 0.5, var_x = var_y = 1 (sample), so r = 0.5
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, rel=1e-15)

    def test_errors(self):
        with pytest.raises(StatsError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(StatsError):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(StatsError):
            pearson([1], [1])

    @given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30),
           st.floats(0.01, 100), st.floats(-100, 100), st.floats(0.01, 100), st.floats(-100, 100))
    def test_affine_invariance(self, pts, a, b, c, d):
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
            return
        assert pearson(a * x + b, c * y + d) == pytest.approx(pearson(x, y), abs=1e-9)


class TestOls:
    def test_through_origin(self):
        x = np.arange(10)
        fit = ols(x, 2 * x)
        assert fit.slope == pytest.approx(2, rel=1e-12)
        assert fit.intercept == pytest.approx(0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1, abs=1e-12)
        assert fit.n_points == 10

    def test_two_points(self):
        fit = ols([0, 1], [0, 5])
        assert (fit.slope, fit.intercept) == pytest.approx((5, 0))
        assert fit.r_squared == pytest.approx(1, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(StatsError):
            ols([2, 2, 2], [1, 2, 3])

    def test_r_squared_is_pearson_squared(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=40)
        y = x + rng.normal(size=40)
        assert ols(x, y).r_squared == pytest.approx(pearson(x, y) ** 2, rel=1e-12)
        # numpy's least squares as an independent check of the coefficients
        slope, intercept = np.polyfit(x, y, 1)
        fit = ols(x, y)
        assert (fit.slope, fit.intercept) == pytest.approx((slope, intercept), rel=1e-10)

    @given(st.floats(-50, 50), st.floats(-50, 50), st.lists(finite, min_size=2, max_size=20, unique=True))
    def test_noiseless_recovery(self, a, b, xs):
        x = np.array(xs)
        if np.ptp(x) < 1e-2:
            return
        fit = ols(x, a * x + b)
        assert fit.slope == pytest.approx(a, rel=1e-10, abs=1e-9)
        assert fit.intercept == pytest.approx(b, rel=1e-10, abs=1e-7)
        assert 0 <= fit.r_squared <= 1


class TestLog:
    def test_values(self):
        assert log_transform([1])[0] == 0
        assert log_transform([math.e])[0] == pytest.approx(1, abs=1e-15)
        assert log_transform([20049])[0] == pytest.approx(9.906, abs=1e-3)

    def test_nonpositive_names_entity(self):
        with pytest.raises(StatsError, match="KEN"):
            log_transform([3.0, 0.0], labels=["USA", "KEN"])


def random_cov(p, seed):
    x = np.random.default_rng(seed).normal(size=(10, p))
    return np.cov(x, rowvar=False)


class TestJacobi:
    @pytest.mark.parametrize("seed", range(5))
    def test_against_lapack(self, seed):
        a = random_cov(6, seed)
        vals, vecs, _ = jacobi_eigh(a)
        assert np.sort(vals) == pytest.approx(np.linalg.eigvalsh(a), abs=1e-12)
        assert vecs.T @ vecs == pytest.approx(np.eye(6), abs=1e-12)
        assert a @ vecs == pytest.approx(vecs * vals, abs=1e-10)

    def test_diagonal_is_fixed_point(self):
        vals, vecs, sweeps = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
        assert list(vals) == [3.0, 1.0, 2.0]
        assert sweeps == 0

    def test_rejects_asymmetric(self):
        with pytest.raises(StatsError):
            jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_large_scale_converges(self):
        a = random_cov(22, 4) * 1e7
        vals, _, _ = jacobi_eigh(a)
        assert np.sort(vals) == pytest.approx(np.linalg.eigvalsh(a), rel=1e-9, abs=1e-6)


class TestPca:
    def test_rank_one(self):
        x = np.arange(10.0)
        res = covariance_pca(np.column_stack([x, 3 * x]))
        assert res.explained_fraction[0] == pytest.approx(1.0, abs=1e-12)
        assert res.eigenvalues[1] <= 1e-10 * res.eigenvalues[0]

    def test_isotropic(self):
        pts = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float) * math.sqrt(1.5)
        res = covariance_pca(pts)
        assert res.covariance == pytest.approx(np.eye(2), abs=1e-12)
        assert res.eigenvalues == pytest.approx([1, 1], abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_reconstruction(self, seed):
        x = np.random.default_rng(seed).normal(size=(10, 5))
        res = covariance_pca(x)
        v, lam = res.components, res.eigenvalues
        assert v @ np.diag(lam) @ v.T == pytest.approx(np.cov(x, rowvar=False), abs=1e-9)
        assert list(lam) == sorted(lam, reverse=True)
        assert lam.sum() == pytest.approx(np.trace(res.covariance), rel=1e-9)
        assert res.scores.mean(axis=0) == pytest.approx(np.zeros(5), abs=1e-10)
        assert res.scores.var(axis=0, ddof=1).sum() == pytest.approx(lam.sum(), rel=1e-9)

    def test_sign_convention(self):
        x = np.random.default_rng(9).normal(size=(20, 4))
        for res in (covariance_pca(x), covariance_pca(x[::-1])):
            for j in range(4):
                col = res.components[:, j]
                assert col[np.argmax(np.abs(col))] > 0

    def test_too_few_rows(self):
        with pytest.raises(StatsError):
            covariance_pca(np.ones((1, 3)))

    def test_nan(self):
        with pytest.raises(StatsError):
            covariance_pca(np.array([[1.0, np.nan], [2.0, 3.0]]))


def scipy_heights(x, method, metric):
    return scipy_linkage(pdist(x, metric=metric), method=method)[:, 2]


class TestHcluster:
    def test_two_clouds(self):
        rng = np.random.default_rng(0)
        a = rng.normal(0, 1, size=(6, 2))
        b = rng.normal(100, 1, size=(6, 2))
        x = np.vstack([a, b])
        for link in Linkage:
            labels = hcluster(x, link, Distance.EUCLIDEAN).cut(2)
            assert labels == [0] * 6 + [1] * 6

    def test_identical_points(self):
        d = hcluster(np.zeros((3, 2)), Linkage.AVERAGE, Distance.EUCLIDEAN)
        assert [m.height for m in d.merges[:2]] == [0, 0]
        assert (d.merges[0].a, d.merges[0].b) == (0, 1)

    def test_planted_groups(self):
        x, groups = planted_profiles(seed=3)
        d = hcluster(x)  # defaults: average linkage, 1 - pearson
        assert canonical(d.cut(5)) == canonical(groups)

    @pytest.mark.parametrize("method", ["average", "complete", "ward"])
    @pytest.mark.parametrize("seed", range(3))
    def test_heights_match_scipy(self, method, seed):
        x = np.random.default_rng(seed).normal(size=(15, 4))
        d = hcluster(x, method, "euclidean")
        assert [m.height for m in d.merges] == pytest.approx(list(scipy_heights(x, method, "euclidean")), rel=1e-10)
        assert [m.size for m in d.merges][-1] == 15

    def test_pearson_matches_scipy_correlation(self):
        x = np.random.default_rng(5).normal(size=(12, 7))
        d = hcluster(x, "average", "one_minus_pearson")
        assert [m.height for m in d.merges] == pytest.approx(
            list(scipy_heights(x, "average", "correlation")), rel=1e-9, abs=1e-12)

    def test_cut_bounds(self):
        x = np.random.default_rng(2).normal(size=(8, 3))
        d = hcluster(x, "complete", "euclidean")
        assert d.cut(1) == [0] * 8
        assert d.cut(8) == list(range(8))
        with pytest.raises(StatsError):
            d.cut(0)

    def test_heights_nondecreasing(self):
        x = np.random.default_rng(4).normal(size=(20, 5))
        for link in Linkage:
            h = [m.height for m in hcluster(x, link, "euclidean").merges]
            assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.permutations(list(range(10))))
    def test_permutation_invariance(self, seed, perm):
        x = np.random.default_rng(seed).normal(size=(10, 4))
        base = hcluster(x, "average", "euclidean").cut(3)
        permuted = hcluster(x[perm], "average", "euclidean").cut(3)
        # map permuted labels back to original item order
        back = [None] * 10
        for new_pos, orig in enumerate(perm):
            back[orig] = permuted[new_pos]
        assert canonical(back) == canonical(base)

    def test_rejects_bad_input(self):
        with pytest.raises(StatsError):
            hcluster(np.array([[1.0, np.inf], [0.0, 1.0]]))
        with pytest.raises(StatsError):
            hcluster(np.ones((1, 3)))
        with pytest.raises(StatsError):
            hcluster(np.array([[1.0, 1.0, 1.0], [0.0, 1.0, 2.0]]))  # constant row under pearson

    def test_text(self):
        d = hcluster(np.array([[0.0], [1.0], [5.0]]), "average", "euclidean")
        text = d.to_text(["a", "b", "c"])
        assert "a + b" in text and "c + #3" in text


class TestRank:
    def test_simple(self):
        assert rank_desc({"a": 3, "b": 1, "c": 2}) == {"a": 1, "c": 2, "b": 3}
        assert list(rank_desc({"a": 3, "b": 1, "c": 2})) == ["a", "c", "b"]

    def test_ties(self):
        assert rank_desc({"b": 5, "a": 5, "c": 1}) == {"a": 1, "b": 1, "c": 3}
        assert list(rank_desc({"b": 5, "a": 5, "c": 1})) == ["a", "b", "c"]

    def test_empty(self):
        with pytest.raises(StatsError):
            rank_desc({})

    @given(st.dictionaries(st.text(min_size=1, max_size=3), st.floats(-1e6, 1e6), min_size=1))
    def test_monotone_transform(self, values):
        transformed = {k: math.atan(v / 1e3) * 7 + 3 for k, v in values.items()}
        a = rank_desc(values)
        b = rank_desc(transformed)
        # atan can merge nearby values in floating point; only strict orderings must agree
        for k1 in a:
            for k2 in a:
                if values[k1] > values[k2] and transformed[k1] > transformed[k2]:
                    assert a[k1] < a[k2] and b[k1] < b[k2]

    def test_strictly_increasing_exact(self):
        values = {f"e{i}": float(v) for i, v in enumerate([5, 3, 3, 9, 1, 7])}
        assert rank_desc(values) == rank_desc({k: 2 * v + 1 for k, v in values.items()})
