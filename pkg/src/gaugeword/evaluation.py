"""Word-similarity evaluation: cosine similarity scored by rank or linear correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    ConstantInput,
    LengthMismatch,
    MalformedLine,
    ShapeMismatch,
    TooFewPairs,
    ZeroVector,
)
from .matcore import as_matrix

ZERO_TOL = 1e-12
COSINE_DECIMALS = 12
METHODS = ("spearman", "pearson")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Vocabulary plus a d x p matrix whose column j is the vector of ``vocab[j]``."""

    vocab: tuple
    V: np.ndarray
    U: Optional[np.ndarray] = None

    def __post_init__(self):
        vocab = tuple(self.vocab)
        if len(set(vocab)) != len(vocab):
            raise ValueError("duplicate words in embedding vocabulary")
        v = as_matrix(self.V, "V")
        if v.shape[1] != len(vocab):
            raise ShapeMismatch(f"V has {v.shape[1]} columns for {len(vocab)} words")
        v.setflags(write=False)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "V", v)
        if self.U is not None:
            u = as_matrix(self.U, "U")
            if u.shape[1] != v.shape[0]:
                raise ShapeMismatch(f"U has {u.shape[1]} columns, V has {v.shape[0]} rows")
            object.__setattr__(self, "U", u)
        # lookup is on lowercased words; the first spelling wins
        index = {}
        for j, w in enumerate(vocab):
            index.setdefault(w.lower(), j)
        object.__setattr__(self, "_index", index)

    @property
    def d(self) -> int:
        return self.V.shape[0]

    def __len__(self):
        return len(self.vocab)

    def lookup(self, word: str) -> Optional[int]:
        return self._index.get(word.lower())

    def with_vectors(self, v) -> "Embedding":
        """Same vocabulary, new word matrix (U is dropped)."""
        return Embedding(self.vocab, v)


@dataclass(frozen=True)
class SimilarityTestSet:
    name: str
    pairs: tuple

    def __post_init__(self):
        pairs = tuple((str(a), str(b), float(s)) for a, b, s in self.pairs)
        if not pairs:
            raise ValueError("test set has no pairs")
        if not all(math.isfinite(s) for _, _, s in pairs):
            raise ValueError("test set scores must be finite")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def subset(self, indices, name=None) -> "SimilarityTestSet":
        return SimilarityTestSet(name or self.name, tuple(self.pairs[i] for i in indices))


@dataclass(frozen=True)
class EvalReport:
    testset: str
    method: str
    score: float
    pairs_used: int
    pairs_skipped_oov: int
    pairs_skipped_zero: int = 0

    @property
    def total(self) -> int:
        return self.pairs_used + self.pairs_skipped_oov + self.pairs_skipped_zero


def _is_number(s: str) -> bool:
    try:
        return math.isfinite(float(s))
    except ValueError:
        return False


def load_testset(path, name: Optional[str] = None) -> SimilarityTestSet:
    """Read ``word1 SEP word2 SEP score`` lines, SEP being a tab or a comma.

    ``#`` lines and blank lines are ignored, as is a single header line at
    the top (recognised by a non-numeric score field). Extra trailing
    fields are ignored.
    """
    pairs = []
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split("\t" if "\t" in line else ",")]
            if len(fields) < 3:
                raise MalformedLine(f"expected word1, word2, score; got {line!r}", lineno)
            if not _is_number(fields[2]):
                if not pairs and not header_seen:
                    header_seen = True
                    continue
                raise MalformedLine(f"score {fields[2]!r} is not a number", lineno)
            pairs.append((fields[0], fields[1], float(fields[2])))
    if name is None:
        name = Path(path).stem
    return SimilarityTestSet(name, tuple(pairs))


def cosine(v1, v2) -> float:
    """Cosine similarity, clamped to [-1, 1]."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 < ZERO_TOL or n2 < ZERO_TOL:
        raise ZeroVector("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(v1, v2) / (n1 * n2), -1.0, 1.0))


def rankdata(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    xs = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"lengths differ: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise TooFewPairs("correlation needs at least two observations")
    return x, y


def pearson(x, y) -> float:
    """Sample (Pearson) correlation coefficient."""
    x, y = _check_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        raise ConstantInput("correlation with a constant sequence is undefined")
    return float(np.clip((dx @ dy) / (sx * sy), -1.0, 1.0))


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    x, y = _check_pair(x, y)
    return pearson(rankdata(x), rankdata(y))


_CORRELATIONS = {"spearman": spearman, "pearson": pearson}


def correlation(method: str):
    try:
        return _CORRELATIONS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}") from None


@dataclass
class PairScorer:
    """Resolves a test set against a vocabulary once, then scores word matrices.

    Useful when the same pairs are scored against many transformed copies
    of one embedding. The result for a given matrix is identical to
    :func:`evaluate`.
    """

    embedding: Embedding
    testset: SimilarityTestSet
    method: str = "spearman"
    left: np.ndarray = field(init=False)
    right: np.ndarray = field(init=False)
    human: np.ndarray = field(init=False)
    skipped_oov: int = field(init=False)

    def __post_init__(self):
        self._corr = correlation(self.method)
        left, right, human = [], [], []
        for a, b, s in self.testset.pairs:
            ia = self.embedding.lookup(a)
            ib = self.embedding.lookup(b)
            if ia is None or ib is None:
                continue
            left.append(ia)
            right.append(ib)
            human.append(s)
        self.left = np.array(left, dtype=int)
        self.right = np.array(right, dtype=int)
        self.human = np.array(human)
        self.skipped_oov = len(self.testset) - len(left)

    def report(self, v=None) -> EvalReport:
        v = self.embedding.V if v is None else np.asarray(v, dtype=float)
        a = v[:, self.left]
        b = v[:, self.right]
        na = np.sqrt(np.einsum("ij,ij->j", a, a))
        nb = np.sqrt(np.einsum("ij,ij->j", b, b))
        ok = (na >= ZERO_TOL) & (nb >= ZERO_TOL)
        model = np.einsum("ij,ij->j", a[:, ok], b[:, ok]) / (na[ok] * nb[ok])
        # snap to a 1e-12 grid so rounding noise cannot reorder tied cosines
        model = np.round(np.clip(model, -1.0, 1.0), COSINE_DECIMALS)
        used = int(ok.sum())
        if used < 2:
            raise TooFewPairs(
                f"{used} usable pairs in {self.testset.name!r} "
                f"({self.skipped_oov} out of vocabulary, {len(ok) - used} zero vectors)"
            )
        score = self._corr(model, self.human[ok])
        return EvalReport(
            self.testset.name, self.method, score, used, self.skipped_oov, len(ok) - used
        )

    def score(self, v=None) -> float:
        return self.report(v).score


def evaluate(
    emb: Embedding, testset: SimilarityTestSet, method: str = "spearman", oov_policy: str = "skip"
) -> EvalReport:
    """Correlate embedding cosines with human similarity scores.

    Pairs with a word missing from the vocabulary are skipped and counted;
    pairs involving a zero vector are skipped and counted separately.
    """
    if oov_policy != "skip":
        raise ValueError(f"unsupported OOV policy {oov_policy!r}")
    return PairScorer(emb, testset, method).report()


def model_cosines(emb: Embedding, testset: SimilarityTestSet) -> list:
    """Cosine per test pair, or None where the pair cannot be scored."""
    out = []
    for a, b, _ in testset.pairs:
        ia, ib = emb.lookup(a), emb.lookup(b)
        if ia is None or ib is None:
            out.append(None)
            continue
        try:
            out.append(cosine(emb.V[:, ia], emb.V[:, ib]))
        except ZeroVector:
            out.append(None)
    return out

