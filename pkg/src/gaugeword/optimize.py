"""Maximising evaluation score over diagonal (or triangular) gauge transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import BadK, GaugeWordError, NonFiniteObjective
from .evaluation import Embedding, PairScorer, SimilarityTestSet
from .matcore import Transform, make_rng

PARAMETRIZATIONS = ("diagonal", "upper_triangular")


@dataclass(frozen=True)
class OptimizerOptions:
    """Nelder-Mead settings. ``max_evals=None`` means 500 per parameter.

    ``xtol`` bounds the simplex size at convergence (largest coordinate
    distance from the best vertex); ``xtol=inf`` stops on ``ftol`` alone.
    """

    max_evals: Optional[int] = None
    ftol: float = 1e-8
    xtol: float = 1e-6
    initial_step: float = 0.1
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5

    def __post_init__(self):
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be positive")
        if not self.expansion > max(1.0, self.reflection):
            raise ValueError("expansion coefficient must exceed 1 and the reflection coefficient")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")
        if not (self.ftol >= 0 and self.xtol >= 0):
            raise ValueError("ftol and xtol must be non-negative")
        if self.initial_step == 0:
            raise ValueError("initial_step must be nonzero")

    def budget(self, k: int) -> int:
        n = 500 * k if self.max_evals is None else self.max_evals
        if n < k + 1:
            raise ValueError(f"max_evals={n} cannot cover the initial simplex of {k + 1} points")
        return n


class NelderMeadResult(NamedTuple):
    x: np.ndarray
    fun: float
    nfev: int
    nit: int
    converged: bool


class _BudgetExhausted(Exception):
    pass


def nelder_mead(
    objective: Callable[[np.ndarray], float], x0, opts: Optional[OptimizerOptions] = None
) -> NelderMeadResult:
    """Minimise `objective` with the Nelder-Mead simplex method.

    The initial simplex is `x0` plus ``x0 + initial_step * e_i``. The run
    stops when the spread of function values over the simplex falls below
    ``ftol`` while the simplex lies within ``xtol`` of its best vertex, or
    when the evaluation budget is spent. Vertices are kept sorted
    with a stable sort, so equal values favour the older vertex and the
    trajectory is fully deterministic. The returned value never exceeds
    ``objective(x0)``.
    """
    opts = opts or OptimizerOptions()
    x0 = np.asarray(x0, dtype=float).ravel()
    k = x0.size
    max_evals = opts.budget(k)
    nfev = 0

    def f(x):
        nonlocal nfev
        if nfev >= max_evals:
            raise _BudgetExhausted
        nfev += 1
        val = float(objective(x))
        return val if math.isfinite(val) else math.inf

    sim = np.vstack([x0, x0 + opts.initial_step * np.eye(k)])
    fs = np.empty(k + 1)
    for i in range(k + 1):
        nfev += 1
        fs[i] = float(objective(sim[i]))
        if not math.isfinite(fs[i]):
            raise NonFiniteObjective(f"objective is {fs[i]} at initial vertex {i}")

    nit = 0
    converged = False
    try:
        while True:
            order = np.argsort(fs, kind="stable")
            sim, fs = sim[order], fs[order]
            if fs[-1] - fs[0] < opts.ftol and (
                opts.xtol == math.inf or np.max(np.abs(sim[1:] - sim[0])) < opts.xtol
            ):
                converged = True
                break
            nit += 1
            centroid = sim[:-1].mean(axis=0)
            worst = sim[-1]
            xr = centroid + opts.reflection * (centroid - worst)
            fr = f(xr)
            if fr < fs[0]:
                xe = centroid + opts.expansion * (xr - centroid)
                fe = f(xe)
                sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
                continue
            if fr < fs[-2]:
                sim[-1], fs[-1] = xr, fr
                continue
            if fr < fs[-1]:
                xc = centroid + opts.contraction * (xr - centroid)
                fc = f(xc)
                if fc <= fr:
                    sim[-1], fs[-1] = xc, fc
                    continue
            else:
                xc = centroid + opts.contraction * (worst - centroid)
                fc = f(xc)
                if fc < fs[-1]:
                    sim[-1], fs[-1] = xc, fc
                    continue
            for i in range(1, k + 1):
                sim[i] = sim[0] + opts.shrink * (sim[i] - sim[0])
                fs[i] = f(sim[i])
    except _BudgetExhausted:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
    return NelderMeadResult(sim[0].copy(), float(fs[0]), nfev, nit, converged)


@dataclass
class DiagOptResult:
    lambda_star: Transform
    train_score: float
    init_score: float
    evals_used: int
    holdout_score: Optional[float] = None


def _unpack(x: np.ndarray, d: int, parametrization: str) -> np.ndarray:
    """Parameter vector -> transform matrix; x = 0 maps to the identity."""
    if parametrization == "diagonal":
        return np.diag(np.exp(x))
    m = np.zeros((d, d))
    m[np.diag_indices(d)] = np.exp(x[:d])
    m[np.triu_indices(d, 1)] = x[d:]
    return m


def _n_params(d: int, parametrization: str) -> int:
    if parametrization not in PARAMETRIZATIONS:
        raise ValueError(f"parametrization must be one of {PARAMETRIZATIONS}")
    return d if parametrization == "diagonal" else d * (d + 1) // 2


def _apply(m: np.ndarray, v: np.ndarray, parametrization: str) -> np.ndarray:
    if parametrization == "diagonal":
        return np.diag(m)[:, None] * v
    return m @ v


def optimize_diag(
    emb: Embedding,
    train: SimilarityTestSet,
    method: str = "spearman",
    opts: Optional[OptimizerOptions] = None,
    parametrization: str = "diagonal",
) -> DiagOptResult:
    """Maximise the score of ``Lambda V`` over positive diagonal Lambda.

    Lambda is searched as ``exp(x)`` starting from the identity. Negative
    entries are unnecessary since sign flips do not change cosines. The
    reported Lambda is rescaled to geometric mean 1, which leaves the
    score unchanged; the reported training score is the score of that
    rescaled Lambda, and never below the identity's.

    ``parametrization="upper_triangular"`` searches upper triangular
    transforms with positive diagonal instead (``d(d+1)/2`` parameters).
    """
    opts = opts or OptimizerOptions()
    d = emb.d
    k = _n_params(d, parametrization)
    scorer = PairScorer(emb, train, method)
    v = emb.V
    init_score = scorer.score()

    def objective(x):
        try:
            return -scorer.score(_apply(_unpack(x, d, parametrization), v, parametrization))
        except GaugeWordError:
            return math.inf

    res = nelder_mead(objective, np.zeros(k), opts)
    x = res.x.copy()
    # fix the scale gauge: geometric mean of the diagonal becomes 1
    shift = x[:d].mean()
    x[:d] -= shift
    m = _unpack(x, d, parametrization)
    if parametrization == "upper_triangular":
        m[np.triu_indices(d, 1)] *= math.exp(-shift)
    try:
        train_score = scorer.score(_apply(m, v, parametrization))
    except GaugeWordError:
        train_score = -math.inf
    if not train_score >= init_score:
        m, train_score = np.eye(d), init_score
    kind = "diagonal" if parametrization == "diagonal" else "upper_triangular"
    return DiagOptResult(Transform(m, kind), train_score, init_score, res.nfev)


def apply_lambda(emb: Embedding, lam: Transform) -> Embedding:
    """Embedding with word matrix ``Lambda V``, computed as :func:`optimize_diag` does."""
    p = "diagonal" if lam.kind == "diagonal" else "upper_triangular"
    return emb.with_vectors(_apply(lam.matrix, emb.V, p))


def kfold_split(pairs, k: int, seed: int) -> list:
    """Shuffle and deal items into k folds whose sizes differ by at most one.

    Items keep their original relative order inside each fold.
    """
    items = list(pairs)
    n = len(items)
    if not 2 <= k <= n:
        raise BadK(f"k={k} must lie between 2 and the number of items ({n})")
    perm = make_rng(seed).permutation(n)
    return [[items[i] for i in sorted(perm[f::k])] for f in range(k)]


@dataclass
class FoldResult:
    fold: int
    train: DiagOptResult
    holdout_score: Optional[float]
    holdout_init_score: Optional[float]
    holdout_error: Optional[str] = None


@dataclass
class CrossValidationResult:
    folds: list = field(default_factory=list)

    @property
    def mean_holdout(self) -> Optional[float]:
        vals = [f.holdout_score for f in self.folds if f.holdout_score is not None]
        return float(np.mean(vals)) if vals else None


def cross_validated_optimize(
    emb: Embedding,
    testset: SimilarityTestSet,
    method: str = "spearman",
    k: int = 5,
    seed: int = 0,
    opts: Optional[OptimizerOptions] = None,
    parametrization: str = "diagonal",
) -> CrossValidationResult:
    """Optimise Lambda on k-1 folds and score it on the held-out fold, for each fold.

    Training errors propagate. A held-out fold that cannot be scored (for
    instance a single pair under leave-one-out) gets ``holdout_score=None``
    and the reason in ``holdout_error``; it is left out of the mean.
    """
    folds = kfold_split(range(len(testset)), k, seed)
    out = CrossValidationResult()
    for i, held in enumerate(folds):
        train_idx = sorted(j for f, fold in enumerate(folds) if f != i for j in fold)
        train = testset.subset(train_idx, f"{testset.name}[train {i}]")
        hold = testset.subset(held, f"{testset.name}[fold {i}]")
        res = optimize_diag(emb, train, method, opts, parametrization)
        try:
            scorer = PairScorer(emb, hold, method)
            h_init = scorer.score()
            h = scorer.score(apply_lambda(emb, res.lambda_star).V)
            err = None
        except GaugeWordError as exc:
            h_init = h = None
            err = str(exc)
        res.holdout_score = h
        out.folds.append(FoldResult(i, res, h, h_init, err))
    return out
