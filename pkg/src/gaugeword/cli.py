"""``gaugeword`` command line.

Exit status is 0 on success, 2 on usage errors and 1 on data or numerical
errors. Every output file gets a ``<output>.manifest.json`` next to it;
runs without output files print their manifest to stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GaugeWordError
from .evaluation import METHODS, Embedding, evaluate, load_testset
from .explore import alpha_sweep, emit_csv, lambda_presets, random_transform_study
from .gauge import FactorPair, apply_transform, canonicalize, sum_tie, symmetric_tie, whiten
from .lsa import build_doc_term, lsa_solve, read_corpus, reconstruction_error, write_doc_term_csv
from .matcore import Transform, sample_transform, singular_values
from .optimize import OptimizerOptions, cross_validated_optimize, optimize_diag
from .textio import load_embedding_text, load_matrix, save_embedding_text, save_matrix

SEED_ENV = "GAUGEWORD_SEED"
KIND_ALIASES = {
    "diagonal": "diagonal",
    "upper": "upper_triangular",
    "orthogonal": "orthogonal",
    "general": "general",
}


class UsageError(Exception):
    pass


def file_digest(path) -> str:
    """64-bit BLAKE2b content hash, hex encoded."""
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    seed: int | None
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    tool_version: str = __version__
    wall_time_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


class Run:
    """Tracks inputs and outputs of one invocation for its manifest."""

    def __init__(self, argv, seed=None):
        self.started = time.perf_counter()
        self.manifest = RunManifest(" ".join(["gaugeword", *argv]), seed)

    def input(self, path):
        self.manifest.inputs[str(path)] = file_digest(path)
        return path

    def output(self, path):
        self.manifest.outputs[str(path)] = None
        return path

    def finish(self):
        m = self.manifest
        m.wall_time_s = round(time.perf_counter() - self.started, 6)
        for path in m.outputs:
            m.outputs[path] = file_digest(path)
        text = m.to_json()
        if not m.outputs:
            sys.stderr.write(text)
        for path in m.outputs:
            Path(str(path) + ".manifest.json").write_text(text, encoding="utf-8")


def _dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def parse_alphas(spec: str) -> list:
    """``a0:a1:step`` -> [a0, a0 + step, ..., a1] (a1 included when on the grid)."""
    try:
        a0, a1, step = (float(t) for t in spec.split(":"))
    except ValueError:
        raise UsageError(f"--alphas expects a0:a1:step, got {spec!r}") from None
    if not step > 0 or a1 < a0:
        raise UsageError("--alphas needs step > 0 and a1 >= a0")
    n = int(math.floor((a1 - a0) / step + 1e-9)) + 1
    return [round(a0 + i * step, 12) for i in range(n)]


def _load_v(run, path) -> Embedding:
    return load_embedding_text(run.input(path))


def _load_u(run, path) -> np.ndarray:
    return load_matrix(run.input(path))


# -- subcommands -------------------------------------------------------------


def cmd_build_lsa(args, run):
    corpus = read_corpus(run.input(args.corpus))
    dtm = build_doc_term(corpus, args.min_count, args.max_vocab)
    pair = lsa_solve(dtm, args.dim, args.alpha)
    save_embedding_text(Embedding(dtm.vocab, pair.V), run.output(args.out_v), args.format)
    if args.out_u:
        save_matrix(pair.U, run.output(args.out_u))
    if args.out_dtm:
        write_doc_term_csv(dtm, run.output(args.out_dtm))
    err = reconstruction_error(dtm, pair)
    print(f"documents={dtm.matrix.shape[0]} vocab={len(dtm.vocab)} d={args.dim} "
          f"alpha={args.alpha} reconstruction_error={err:.17g}")


def cmd_transform(args, run):
    emb = _load_v(run, args.v)
    kind = KIND_ALIASES[args.kind]
    if args.matrix:
        c = Transform(load_matrix(run.input(args.matrix)), kind)
    else:
        run.manifest.seed = _seed(args)
        c = sample_transform(kind, emb.d, run.manifest.seed)
    if c.d != emb.d:
        raise GaugeWordError(f"transform is {c.d}x{c.d} but embedding has d={emb.d}")
    if args.u:
        pair = apply_transform(c, FactorPair(_load_u(run, args.u), emb.V))
        save_matrix(pair.U, run.output(args.out_u))
        v = pair.V
    else:
        v = c.matrix @ emb.V
    save_embedding_text(emb.with_vectors(v), run.output(args.out), args.format)
    if args.out_matrix:
        save_matrix(c.matrix, run.output(args.out_matrix))


def cmd_canonicalize(args, run):
    emb = _load_v(run, args.v)
    pair = FactorPair(_load_u(run, args.u), emb.V)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        can = canonicalize(pair)
    out = can.pair
    save_embedding_text(emb.with_vectors(out.V), run.output(args.out_v), args.format)
    save_matrix(out.U, run.output(args.out_u))
    x = pair.product()
    scale = max(float(np.max(np.abs(x))), np.finfo(float).tiny)
    report = {
        "spectrum": can.spectrum.tolist(),
        "degenerate_spectrum": [list(ij) for ij in can.degenerate],
        "zero_u_columns": can.zero_columns,
        "unique": can.unique,
        "product_residual": float(np.max(np.abs(out.product() - x)) / scale),
        "vvt_residual": float(np.max(np.abs(out.V @ out.V.T - np.eye(out.d)))),
    }
    _dump_json(report, run.output(args.report))


def cmd_whiten(args, run):
    emb = _load_v(run, args.v)
    save_embedding_text(emb.with_vectors(whiten(emb.V)), run.output(args.out), args.format)


def cmd_tie(args, run):
    emb = _load_v(run, args.v)
    pair = FactorPair(_load_u(run, args.u), emb.V)
    if args.mode == "sum":
        v = sum_tie(pair)
    else:
        tie = symmetric_tie(pair)
        v = tie.V_tied
        print(f"residual={tie.residual:.17g}")
    save_embedding_text(emb.with_vectors(v), run.output(args.out), args.format)


def cmd_evaluate(args, run):
    emb = _load_v(run, args.v)
    ts = load_testset(run.input(args.testset))
    rep = evaluate(emb, ts, args.method, args.oov)
    print(f"{rep.testset}\t{rep.method}\t{rep.score:.17g}\tused={rep.pairs_used}"
          f"\toov={rep.pairs_skipped_oov}\tzero={rep.pairs_skipped_zero}")
    if args.out:
        _dump_json(asdict(rep), run.output(args.out))


def _lambdas(args, emb, seed):
    choice = args.lambda_
    if choice.startswith("file:"):
        path = choice[5:]
        diag = np.loadtxt(path, ndmin=1).ravel()
        if diag.shape != (emb.d,):
            raise GaugeWordError(f"{path}: expected {emb.d} values, found {diag.size}")
        return {"file": Transform(np.diag(diag), "diagonal")}, path
    # singular values of V equal Sigma_d for the alpha = 0 LSA embedding
    presets = lambda_presets(emb.d, singular_values(emb.V), seed)
    return {choice: presets[choice]}, None


def cmd_sweep_alpha(args, run):
    emb = _load_v(run, args.v)
    seed = _seed(args)
    run.manifest.seed = seed
    lambdas, lam_file = _lambdas(args, emb, seed)
    if lam_file:
        run.input(lam_file)
    testsets = [load_testset(run.input(t)) for t in args.testset]
    methods = args.method or ["spearman"]
    result = alpha_sweep(emb, lambdas, args.alphas, testsets, methods)
    emit_csv(result, run.output(args.out))


def cmd_study_random(args, run):
    emb = _load_v(run, args.v)
    seed = _seed(args)
    run.manifest.seed = seed
    ts = load_testset(run.input(args.testset))
    dist = random_transform_study(emb, KIND_ALIASES[args.kind], args.runs, seed, ts, args.method)
    emit_csv(dist, run.output(args.out))
    s = dist.summary
    if s is not None:
        print(f"base={dist.base_score:.17g} mean={s[0]:.17g} sd={s[1]:.17g} "
              f"min={s[2]:.17g} max={s[3]:.17g} failed={len(dist.failures)}")


def _opt_json(res):
    return {
        "lambda_star": np.diag(res.lambda_star.matrix).tolist()
        if res.lambda_star.kind == "diagonal"
        else res.lambda_star.matrix.tolist(),
        "train_score": res.train_score,
        "init_score": res.init_score,
        "evals_used": res.evals_used,
        "holdout_score": res.holdout_score,
    }


def cmd_optimize_diag(args, run):
    emb = _load_v(run, args.v)
    seed = _seed(args)
    run.manifest.seed = seed
    ts = load_testset(run.input(args.testset))
    opts = OptimizerOptions(max_evals=args.max_evals)
    param = KIND_ALIASES[args.parametrization]
    if args.kfold:
        cv = cross_validated_optimize(emb, ts, args.method, args.kfold, seed, opts, param)
        out = {
            "method": args.method,
            "testset": ts.name,
            "kfold": args.kfold,
            "seed": seed,
            "folds": [
                {
                    "fold": f.fold,
                    **_opt_json(f.train),
                    "holdout_init_score": f.holdout_init_score,
                    "holdout_error": f.holdout_error,
                }
                for f in cv.folds
            ],
            "mean_holdout": cv.mean_holdout,
        }
    else:
        res = optimize_diag(emb, ts, args.method, opts, param)
        out = {"method": args.method, "testset": ts.name, "seed": seed, **_opt_json(res)}
        print(f"init={res.init_score:.17g} train={res.train_score:.17g} evals={res.evals_used}")
    _dump_json(out, run.output(args.out))


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gaugeword",
        description="Gauge transforms, canonical forms and evaluation of word embeddings.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def fmt_flag(sp):
        sp.add_argument("--format", choices=["glove", "word2vec"], default="glove",
                        help="text format of written embeddings (default: glove)")

    sp = sub.add_parser("build-lsa", help="LSA embedding from a one-document-per-line corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--min-count", type=int, default=1)
    sp.add_argument("--max-vocab", type=int, default=5000)
    sp.add_argument("--out-v", required=True)
    sp.add_argument("--out-u")
    sp.add_argument("--out-dtm", help="also write the document-term matrix as CSV")
    fmt_flag(sp)
    sp.set_defaults(func=cmd_build_lsa, inputs=["corpus"])

    sp = sub.add_parser("transform", help="apply a given or random gauge transform")
    sp.add_argument("--v", required=True)
    sp.add_argument("--u")
    sp.add_argument("--kind", choices=list(KIND_ALIASES), required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--seed", type=int)
    g.add_argument("--matrix")
    sp.add_argument("--out", required=True)
    sp.add_argument("--out-u")
    sp.add_argument("--out-matrix")
    fmt_flag(sp)
    sp.set_defaults(func=cmd_transform, inputs=["v", "u", "matrix"])

    sp = sub.add_parser("canonicalize", help="unique representative with VV^T = I")
    sp.add_argument("--v", required=True)
    sp.add_argument("--u", required=True)
    sp.add_argument("--out-v", required=True)
    sp.add_argument("--out-u", required=True)
    sp.add_argument("--report", required=True)
    fmt_flag(sp)
    sp.set_defaults(func=cmd_canonicalize, inputs=["v", "u"])

    sp = sub.add_parser("whiten", help="replace V by (VV^T)^(-1/2) V")
    sp.add_argument("--v", required=True)
    sp.add_argument("--out", required=True)
    fmt_flag(sp)
    sp.set_defaults(func=cmd_whiten, inputs=["v"])

    sp = sub.add_parser("tie", help="tie U^T and V for a symmetric corpus matrix")
    sp.add_argument("--v", required=True)
    sp.add_argument("--u", required=True)
    sp.add_argument("--mode", choices=["solve", "sum"], default="solve")
    sp.add_argument("--out", required=True)
    fmt_flag(sp)
    sp.set_defaults(func=cmd_tie, inputs=["v", "u"])

    sp = sub.add_parser("evaluate", help="score an embedding on a similarity test set")
    sp.add_argument("--v", required=True)
    sp.add_argument("--testset", required=True)
    sp.add_argument("--method", choices=METHODS, default="spearman")
    sp.add_argument("--oov", choices=["skip"], default="skip")
    sp.add_argument("--out", help="also write the report as JSON")
    sp.set_defaults(func=cmd_evaluate, inputs=["v", "testset"])

    sp = sub.add_parser("sweep-alpha", help="scores of Lambda^alpha V over a grid of alphas")
    sp.add_argument("--v", required=True)
    sp.add_argument("--lambda", dest="lambda_", required=True,
                    help="sigma | linear | uniform | absnormal | file:PATH")
    sp.add_argument("--alphas", type=str, required=True, help="a0:a1:step")
    sp.add_argument("--testset", action="append", required=True)
    sp.add_argument("--method", action="append", choices=METHODS)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sweep_alpha, inputs=["v", "testset"])

    sp = sub.add_parser("study-random", help="score distribution under random transforms")
    sp.add_argument("--v", required=True)
    sp.add_argument("--kind", choices=["diagonal", "upper", "orthogonal"], required=True)
    sp.add_argument("--runs", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--testset", required=True)
    sp.add_argument("--method", choices=METHODS, default="spearman")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_study_random, inputs=["v", "testset"])

    sp = sub.add_parser("optimize-diag", help="maximise the score over diagonal Lambda")
    sp.add_argument("--v", required=True)
    sp.add_argument("--testset", required=True)
    sp.add_argument("--method", choices=METHODS, default="spearman")
    sp.add_argument("--kfold", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--max-evals", type=int)
    sp.add_argument("--parametrization", choices=["diagonal", "upper"], default="diagonal")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_optimize_diag, inputs=["v", "testset"])
    return p


def _validate(args):
    for name in args.inputs:
        value = getattr(args, name, None)
        for path in value if isinstance(value, list) else [value]:
            if path is not None and not Path(path).is_file():
                raise UsageError(f"--{name.replace('_', '-')}: no such file: {path}")
    if getattr(args, "alphas", None) is not None:
        args.alphas = parse_alphas(args.alphas)
    lam = getattr(args, "lambda_", None)
    if lam is not None:
        if lam.startswith("file:"):
            if not Path(lam[5:]).is_file():
                raise UsageError(f"--lambda: no such file: {lam[5:]}")
        elif lam not in ("sigma", "linear", "uniform", "absnormal"):
            raise UsageError(f"--lambda: unknown choice {lam!r}")
    if args.command == "transform" and bool(args.u) != bool(args.out_u):
        raise UsageError("transform: --u and --out-u must be given together")
    if getattr(args, "runs", 0) is not None and getattr(args, "runs", 0) < 0:
        raise UsageError("--runs must be non-negative")
    if getattr(args, "kfold", None) is not None and args.kfold < 2:
        raise UsageError("--kfold must be at least 2")
    if getattr(args, "dim", 1) < 1:
        raise UsageError("--dim must be positive")


def _join_alphas(argv):
    """Let ``--alphas -1:1:0.1`` through; argparse would read it as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--alphas":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--alphas={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_alphas(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
        _seed(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gaugeword: error: {exc}", file=sys.stderr)
        return 2
    run = Run(argv, getattr(args, "seed", None))
    try:
        args.func(args, run)
        run.finish()
    except (GaugeWordError, OSError, ValueError) as exc:
        print(f"gaugeword {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
