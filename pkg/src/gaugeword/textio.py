"""Reading and writing word vectors in word2vec/GloVe text format, and plain matrices."""
from __future__ import annotations

import warnings

import numpy as np

from .errors import DimensionMismatch, DuplicateWord, MalformedLine, ShapeMismatch
from .evaluation import Embedding
from .matcore import as_matrix

FORMATS = ("auto", "word2vec", "glove")


def _is_int(tok: str) -> bool:
    try:
        int(tok)
    except ValueError:
        return False
    return True


def load_embedding_text(path, format: str = "auto") -> Embedding:
    """Load ``word v1 ... vd`` rows into an Embedding with V of shape (d, p).

    word2vec files start with a ``count dim`` header line; GloVe files do
    not. With ``format="auto"`` a first line of exactly two integers is
    taken as the header. Repeated words keep their first vector and a
    :class:`DuplicateWord` warning reports how many were dropped.
    """
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    words, rows = [], []
    seen = set()
    duplicates = 0
    dim = None
    declared = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.rstrip("\r\n").rstrip(" ").split(" ")
            if lineno == 1 and format != "glove":
                header = len(parts) == 2 and all(_is_int(t) for t in parts)
                if format == "word2vec" and not header:
                    raise MalformedLine("expected a 'count dim' header", lineno)
                if header:
                    declared, dim = int(parts[0]), int(parts[1])
                    continue
            if parts == [""]:
                continue
            if len(parts) < 2:
                raise MalformedLine("expected a word followed by its vector", lineno)
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise DimensionMismatch(f"expected {dim} values, found {len(values)}", lineno)
            try:
                vec = [float(t) for t in values]
            except ValueError as exc:
                raise MalformedLine(str(exc), lineno) from None
            if word in seen:
                duplicates += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if not words:
        raise MalformedLine(f"{path}: no word vectors found")
    if declared is not None and declared != len(words) + duplicates:
        warnings.warn(f"header declares {declared} words, file has {len(words) + duplicates}")
    if duplicates:
        warnings.warn(f"{duplicates} duplicate words ignored in {path}", DuplicateWord, stacklevel=2)
    return Embedding(tuple(words), np.array(rows).T)


def save_embedding_text(emb: Embedding, path, format: str = "glove") -> None:
    """Write one ``word v1 ... vd`` line per word, values at 17 significant digits."""
    if format not in ("word2vec", "glove"):
        raise ValueError("format must be 'word2vec' or 'glove'")
    if len(emb.vocab) == 0:
        raise ShapeMismatch("cannot save an empty embedding")
    with open(path, "w", encoding="utf-8") as fh:
        if format == "word2vec":
            fh.write(f"{len(emb.vocab)} {emb.d}\n")
        for j, word in enumerate(emb.vocab):
            fh.write(word + " " + " ".join(format_value(x) for x in emb.V[:, j]) + "\n")


def format_value(x: float) -> str:
    return format(float(x), ".17g")


def load_matrix(path) -> np.ndarray:
    """Numeric matrix from whitespace- or comma-separated text.

    A file whose rows start with a word is read as word vectors and its
    rows are returned, so a context matrix may be stored either way.
    """
    with open(path, encoding="utf-8") as fh:
        first = ""
        for first in fh:
            if first.strip() and not first.startswith("#"):
                break
    delim = "," if "," in first else None
    tok = first.replace(",", " ").split()
    try:
        [float(t) for t in tok]
    except ValueError:
        return load_embedding_text(path).V.T
    try:
        m = np.loadtxt(path, delimiter=delim, ndmin=2, comments="#")
    except ValueError as exc:
        raise MalformedLine(f"{path}: {exc}") from None
    return as_matrix(m, str(path))


def save_matrix(m, path) -> None:
    m = as_matrix(m)
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(" ".join(format_value(x) for x in row) + "\n")
