"""Score curves along one-parameter subgroups and under random transforms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import GaugeWordError
from .evaluation import Embedding, PairScorer, SimilarityTestSet
from .matcore import Transform, make_rng, sample_transform

SWEEP_COLUMNS = ("alpha", "lambda", "testset", "method", "score")
TRIAL_COLUMNS = ("trial", "score")
STUDY_KINDS = ("diagonal", "upper_triangular", "orthogonal")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    lambda_label: str
    testset: str
    method: str
    score: float
    error: Optional[str] = None


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def curve(self, lambda_label, testset, method):
        """(alphas, scores) for one group of rows."""
        sel = [
            r for r in self.rows
            if (r.lambda_label, r.testset, r.method) == (lambda_label, testset, method)
        ]
        return np.array([r.alpha for r in sel]), np.array([r.score for r in sel])


@dataclass
class TrialDistribution:
    """Scores of ``R_i V`` for random transforms ``R_i``; NaN marks a failed trial."""

    kind: str
    scores: list
    base_score: float
    seed: int
    failures: list = field(default_factory=list)

    @property
    def summary(self):
        """(mean, sd, min, max) over successful trials; None when there are none.

        sd is the population standard deviation.
        """
        ok = np.array([s for s in self.scores if not math.isnan(s)])
        if ok.size == 0:
            return None
        return float(ok.mean()), float(ok.std()), float(ok.min()), float(ok.max())

    @property
    def spread(self) -> float:
        s = self.summary
        return float("nan") if s is None else s[3] - s[2]


def lambda_presets(d: int, sigma=None, seed: int = 0) -> dict:
    """Diagonal matrices for alpha sweeps.

    ``sigma`` (the leading singular values, as a vector or a diagonal
    transform), ``linear`` with entries 1..d, ``uniform`` with U(0, 1)
    entries and ``absnormal`` with |N(0, 1)| entries. Draws come from a
    single generator seeded with `seed`: uniform first, then absnormal.
    ``sigma`` is omitted when no singular values are supplied.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = make_rng(seed)
    out = {}
    if sigma is not None:
        s = np.diag(sigma.matrix) if isinstance(sigma, Transform) else np.asarray(sigma, float)
        if s.shape != (d,):
            raise ValueError(f"expected {d} singular values, got {s.shape}")
        out["sigma"] = sigma if isinstance(sigma, Transform) else Transform(np.diag(s), "diagonal")
    out["linear"] = Transform(np.diag(np.arange(1.0, d + 1)), "diagonal")
    u = rng.uniform(size=d)
    while np.any(u < 1e-12):
        bad = u < 1e-12
        u[bad] = rng.uniform(size=int(bad.sum()))
    out["uniform"] = Transform(np.diag(u), "diagonal")
    a = np.abs(rng.standard_normal(d))
    while np.any(a <= 0):
        bad = a <= 0
        a[bad] = np.abs(rng.standard_normal(int(bad.sum())))
    out["absnormal"] = Transform(np.diag(a), "diagonal")
    return out


def alpha_sweep(
    emb: Embedding,
    lambdas: Union[Transform, Mapping[str, Transform]],
    alphas: Sequence[float],
    testsets: Sequence[SimilarityTestSet],
    methods: Union[str, Sequence[str]] = "spearman",
) -> SweepResult:
    """Evaluate ``Lambda^alpha V`` over a grid of alphas.

    Rows are grouped by (lambda, testset, method) with alphas increasing.
    A failed evaluation yields a NaN row carrying the error message
    instead of aborting the sweep.
    """
    if isinstance(lambdas, Transform):
        lambdas = {"lambda": lambdas}
    if isinstance(methods, str):
        methods = [methods]
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    v = emb.V
    result = SweepResult()
    for label, lam in lambdas.items():
        if lam.kind != "diagonal":
            raise ValueError(f"Lambda {label!r} must be a diagonal transform")
        diag = np.diag(lam.matrix)
        for ts in testsets:
            for method in methods:
                scorer = PairScorer(emb, ts, method)
                for alpha in alphas:
                    try:
                        # row scaling keeps alpha = 0 bit-identical to V
                        score = scorer.score((diag ** alpha)[:, None] * v)
                        err = None
                    except (GaugeWordError, FloatingPointError, ValueError) as exc:
                        score, err = float("nan"), str(exc)
                    result.rows.append(SweepRow(alpha, label, ts.name, method, score, err))
    return result


def _apply_rows(m: Transform, v: np.ndarray) -> np.ndarray:
    if m.kind == "diagonal":
        return np.diag(m.matrix)[:, None] * v
    return m.matrix @ v


def random_transform_study(
    emb: Embedding,
    kind: str,
    n_runs: int,
    seed: int,
    testset: SimilarityTestSet,
    method: str = "spearman",
) -> TrialDistribution:
    """Score ``R_i V`` for ``R_i = sample_transform(kind, d, seed + i)``.

    Trial i depends only on ``seed + i``, so any subset of trials can be
    recomputed on its own.
    """
    if kind not in STUDY_KINDS:
        raise ValueError(f"kind must be one of {STUDY_KINDS}")
    if n_runs < 0:
        raise ValueError("n_runs must be non-negative")
    scorer = PairScorer(emb, testset, method)
    base = scorer.score()
    scores, failures = [], []
    for i in range(n_runs):
        try:
            r = sample_transform(kind, emb.d, seed + i)
            scores.append(scorer.score(_apply_rows(r, emb.V)))
        except (GaugeWordError, ValueError) as exc:
            scores.append(float("nan"))
            failures.append((i, str(exc)))
    return TrialDistribution(kind, scores, base, seed, failures)


def trial_score(emb, kind, seed, trial, testset, method="spearman") -> float:
    """Recompute a single trial of :func:`random_transform_study`."""
    r = sample_transform(kind, emb.d, seed + trial)
    return PairScorer(emb, testset, method).score(_apply_rows(r, emb.V))


def emit_csv(result: Union[SweepResult, TrialDistribution], destination) -> None:
    """Write a sweep or a trial distribution as CSV, floats at 17 significant digits.

    `destination` is a path or a text file object.
    """
    if hasattr(destination, "write"):
        _write_csv(result, destination)
        return
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        _write_csv(result, fh)


def _write_csv(result, fh):
    writer = csv.writer(fh, lineterminator="\n")
    if isinstance(result, SweepResult):
        writer.writerow(SWEEP_COLUMNS)
        for r in result.rows:
            writer.writerow([fmt(r.alpha), r.lambda_label, r.testset, r.method, fmt(r.score)])
    elif isinstance(result, TrialDistribution):
        fh.write(f"# seed={result.seed}\n")
        fh.write(f"# kind={result.kind}\n")
        fh.write(f"# base_score={fmt(result.base_score)}\n")
        summary = result.summary
        if summary is None:
            fh.write("# summary=undefined\n")
        else:
            fh.write("# summary=mean:{},sd:{},min:{},max:{}\n".format(*map(fmt, summary)))
        writer.writerow(TRIAL_COLUMNS)
        for i, s in enumerate(result.scores):
            writer.writerow([i, fmt(s)])
    else:
        raise TypeError(f"cannot write {type(result).__name__} as CSV")


def read_sweep_csv(path) -> SweepResult:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = [
            SweepRow(float(r["alpha"]), r["lambda"], r["testset"], r["method"], float(r["score"]))
            for r in reader
        ]
    return SweepResult(rows)


def read_trials_csv(path) -> TrialDistribution:
    meta = {}
    body = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                body.append(line)
    rows = list(csv.DictReader(body))
    scores = [float(r["score"]) for r in rows]
    return TrialDistribution(meta["kind"], scores, float(meta["base_score"]), int(meta["seed"]))
