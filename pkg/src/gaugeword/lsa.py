"""Document-term matrices and the truncated-SVD (LSA) factorisation."""
from __future__ import annotations

import csv
import re
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSpectrum, EmptyVocabulary, RankRequestTooLarge, ShapeMismatch
from .gauge import FactorPair
from .matcore import as_matrix, svd_thin

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN.findall(text.lower())


def read_corpus(path) -> list:
    """One document per line of a UTF-8 text file, tokenized."""
    with open(path, encoding="utf-8") as fh:
        return [tokenize(line) for line in fh]


@dataclass(frozen=True, eq=False)
class DocTermMatrix:
    vocab: tuple
    matrix: np.ndarray

    def __post_init__(self):
        vocab = tuple(self.vocab)
        if len(set(vocab)) != len(vocab):
            raise ValueError("duplicate words in vocabulary")
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[1] != len(vocab):
            raise ShapeMismatch(f"matrix shape {m.shape} does not match {len(vocab)} words")
        m.setflags(write=False)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "matrix", m)


def build_doc_term(
    corpus: Iterable[Sequence[str]], min_count: int = 1, max_vocab: int = 5000
) -> DocTermMatrix:
    """Count words per document.

    Words occurring at least `min_count` times overall are kept, ordered
    by descending count with ties broken lexicographically, and the list is
    cut to `max_vocab` words.
    """
    if min_count < 1:
        raise ValueError("min_count must be at least 1")
    docs = [list(doc) for doc in corpus]
    totals = Counter(tok for doc in docs for tok in doc)
    kept = sorted((w for w, c in totals.items() if c >= min_count), key=lambda w: (-totals[w], w))
    kept = kept[:max_vocab]
    if not kept:
        raise EmptyVocabulary(f"no word occurs at least {min_count} times")
    index = {w: j for j, w in enumerate(kept)}
    x = np.zeros((len(docs), len(kept)))
    for i, doc in enumerate(docs):
        for tok in doc:
            j = index.get(tok)
            if j is not None:
                x[i, j] += 1
    return DocTermMatrix(tuple(kept), x)


def write_doc_term_csv(dtm: DocTermMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dtm.vocab)
        for row in dtm.matrix:
            writer.writerow(f"{v:.17g}" for v in row)


def read_doc_term_csv(path) -> DocTermMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    vocab = rows[0]
    x = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(len(rows) - 1, len(vocab))
    return DocTermMatrix(tuple(vocab), x)


def lsa_solve(x, d: int, alpha: float = 0.0) -> FactorPair:
    """Rank-d LSA factorisation ``U = A_d S^alpha``, ``V = S^(1-alpha) B_d^T``.

    Every alpha gives a minimiser of ``||X - UV||_F``; ``alpha = 0`` is the
    "simple SVD" solution. Raises if the d-th singular value is exactly
    zero, since the optimal rank-d factorisation is then not of this form.
    """
    if isinstance(x, DocTermMatrix):
        x = x.matrix
    a, sigma, b = svd_thin(x, d)
    s = np.diag(sigma)
    if s[-1] == 0:
        raise RankRequestTooLarge(f"X has rank below {d}")
    if s[-1] / s[0] < 1e-10:
        warnings.warn(
            f"sigma_d / sigma_1 = {s[-1] / s[0]:.3g}; factorisation is ill-conditioned",
            DegenerateSpectrum,
            stacklevel=2,
        )
    return FactorPair(a * s ** alpha, (s ** (1 - alpha))[:, None] * b.T)


def reconstruction_error(x, pair: FactorPair) -> float:
    """Frobenius norm ``||X - UV||``."""
    if isinstance(x, DocTermMatrix):
        x = x.matrix
    x = as_matrix(x, "X")
    if x.shape != (pair.U.shape[0], pair.V.shape[1]):
        raise ShapeMismatch(f"X is {x.shape}, UV is {(pair.U.shape[0], pair.V.shape[1])}")
    return float(np.linalg.norm(x - pair.product()))
