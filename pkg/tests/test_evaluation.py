import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gaugeword.errors import ConstantInput, LengthMismatch, MalformedLine, TooFewPairs, ZeroVector
from gaugeword.evaluation import (
    Embedding,
    SimilarityTestSet,
    cosine,
    evaluate,
    load_testset,
    model_cosines,
    pearson,
    rankdata,
    spearman,
)
from gaugeword.matcore import sample_transform


class TestCosine:
    def test_values(self):
        assert cosine([1, 0], [0, 1]) == 0
        assert cosine([1, 1], [1, 0]) == pytest.approx(0.707107, abs=1e-6)
        assert cosine([2, 2], [3, 3]) == 1.0

    def test_zero(self):
        with pytest.raises(ZeroVector):
            cosine([0, 0], [1, 0])

    def test_scaled_orthogonal_invariance(self):
        rng = np.random.default_rng(0)
        for i in range(50):
            d = int(rng.integers(1, 8))
            v1, v2 = rng.standard_normal((2, d))
            q = sample_transform("orthogonal", d, i).matrix
            c = rng.uniform(-5, 5)
            assert cosine(c * q @ v1, c * q @ v2) == pytest.approx(cosine(v1, v2), abs=1e-10)


class TestCorrelations:
    def test_spearman_examples(self):
        assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
        assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
        assert spearman([1, 2, 2], [1, 2, 3]) == pytest.approx(0.866025, abs=1e-6)

    def test_pearson_examples(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(0.981981, abs=1e-6)
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)

    def test_rankdata_ties(self):
        np.testing.assert_array_equal(rankdata([1, 2, 2]), [1, 2.5, 2.5])
        np.testing.assert_array_equal(rankdata([3, 1, 3, 3]), [3, 1, 3, 3])

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(
            st.tuples(st.integers(-5, 5), st.floats(-100, 100, allow_nan=False)),
            min_size=2,
            max_size=40,
        )
    )
    def test_against_scipy(self, rows):
        x = np.array([r[0] for r in rows], float)
        y = np.array([r[1] for r in rows], float)
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            with pytest.raises(ConstantInput):
                spearman(x, y)
            return
        assert spearman(x, y) == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-9)
        if np.std(y) > 1e-6:
            assert pearson(x, y) == pytest.approx(stats.pearsonr(x, y)[0], abs=1e-9)

    def test_errors(self):
        with pytest.raises(ConstantInput):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(LengthMismatch):
            spearman([1, 2], [1, 2, 3])
        with pytest.raises(TooFewPairs):
            pearson([1], [2])


def toy():
    emb = Embedding(("a", "b", "c"), np.array([[1.0, 0.6, -0.2], [0.1, 0.8, 1.0]]))
    ts = SimilarityTestSet("toy", [("a", "b", 7.0), ("a", "c", 1.5), ("b", "c", 4.0)])
    return emb, ts


def brute_force_spearman(x, y):
    """Rank by counting, no sorting; valid without ties."""
    rx = [sum(v < xi for v in x) + 1 for xi in x]
    ry = [sum(v < yi for v in y) + 1 for yi in y]
    n = len(x)
    return 1 - 6 * sum((a - b) ** 2 for a, b in zip(rx, ry)) / (n * (n * n - 1))


class TestEvaluate:
    def test_toy_against_hand_cosines(self):
        emb, ts = toy()
        v = emb.V
        cos = [cosine(v[:, i], v[:, j]) for i, j in [(0, 1), (0, 2), (1, 2)]]
        rep = evaluate(emb, ts, "spearman")
        assert rep.score == pytest.approx(brute_force_spearman(cos, [7.0, 1.5, 4.0]))
        assert (rep.pairs_used, rep.pairs_skipped_oov) == (3, 0)
        assert model_cosines(emb, ts) == pytest.approx(cos)

    def test_toy_invariance(self):
        emb, ts = toy()
        q = sample_transform("orthogonal", 2, 0).matrix
        moved = emb.with_vectors(3.7 * q @ emb.V)
        for method in ("spearman", "pearson"):
            assert evaluate(moved, ts, method).score == pytest.approx(
                evaluate(emb, ts, method).score, abs=1e-9
            )

    def test_tied_cosines_survive_rotation(self):
        emb = Embedding(("n", "ne", "e"), np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]))
        ts = SimilarityTestSet("t", [("n", "ne", 8), ("n", "e", 1), ("ne", "e", 5)])
        base = evaluate(emb, ts).score
        for seed in range(20):
            q = sample_transform("orthogonal", 2, seed).matrix
            assert evaluate(emb.with_vectors(q @ emb.V), ts).score == pytest.approx(base, abs=1e-12)

    def test_all_oov(self):
        emb, _ = toy()
        ts = SimilarityTestSet("x", [("zz", "a", 1.0), ("b", "yy", 2.0)])
        with pytest.raises(TooFewPairs):
            evaluate(emb, ts)

    def test_oov_and_zero_counted(self):
        emb = Embedding(("a", "b", "c", "z"), np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 2.0, 0.0]]))
        ts = SimilarityTestSet(
            "x",
            [("a", "b", 1.0), ("a", "c", 2.0), ("b", "c", 3.0), ("a", "q", 4.0), ("z", "a", 5.0)],
        )
        rep = evaluate(emb, ts, "pearson")
        assert (rep.pairs_used, rep.pairs_skipped_oov, rep.pairs_skipped_zero) == (3, 1, 1)
        assert rep.total == len(ts)

    def test_case_normalisation(self):
        emb = Embedding(("Apple", "pear", "fig"), np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 1.0]]))
        ts = SimilarityTestSet("x", [("apple", "PEAR", 3.0), ("Fig", "apple", 1.0), ("pear", "fig", 2.0)])
        assert evaluate(emb, ts).pairs_used == 3

    def test_pure_and_repeatable(self):
        emb, ts = toy()
        assert evaluate(emb, ts) == evaluate(emb, ts)

    def test_rejects_unknown_policy(self):
        emb, ts = toy()
        with pytest.raises(ValueError):
            evaluate(emb, ts, oov_policy="average")


class TestTestsetFile:
    def test_wordsim_style_csv(self, tmp_path):
        f = tmp_path / "combined.csv"
        f.write_text("Word 1,Word 2,Human (mean)\nlove,sex,6.77\ntiger,cat,7.35\n")
        ts = load_testset(f)
        assert ts.name == "combined"
        assert ts.pairs == (("love", "sex", 6.77), ("tiger", "cat", 7.35))

    def test_tabs_comments_extra_fields(self, tmp_path):
        f = tmp_path / "t.tsv"
        f.write_text("# comment\nold\tnew\t1.58\tA\n\nsmart\tintelligent\t9.2\tA\n")
        ts = load_testset(f, name="simlex")
        assert ts.name == "simlex"
        assert ts.pairs[1] == ("smart", "intelligent", 9.2)

    def test_bad_score_after_data(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b,1\nc,d,x\n")
        with pytest.raises(MalformedLine) as info:
            load_testset(f)
        assert info.value.lineno == 2

    def test_too_few_fields(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n")
        with pytest.raises(MalformedLine):
            load_testset(f)


def test_embedding_validation():
    with pytest.raises(ValueError):
        Embedding(("a", "a"), np.eye(2))
    with pytest.raises(ValueError):
        Embedding(("a",), np.eye(2))


def test_permutation_oracle_small():
    # exhaustive check of rank correlation on all orderings of 4 distinct values
    base = [0.1, 0.4, 0.2, 0.9]
    for perm in itertools.permutations(range(4)):
        y = [base[i] for i in perm]
        assert spearman(base, y) == pytest.approx(brute_force_spearman(base, y), abs=1e-12)
