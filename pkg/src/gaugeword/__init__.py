"""Gauge freedom of factorised word embeddings.

Build LSA embeddings, move along and canonicalise their solution sets,
and measure how word-similarity scores change across equally optimal
solutions.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .evaluation import (  # noqa: E402
    EvalReport,
    Embedding,
    SimilarityTestSet,
    cosine,
    evaluate,
    load_testset,
    pearson,
    spearman,
)
from .explore import (  # noqa: E402
    SweepResult,
    TrialDistribution,
    alpha_sweep,
    emit_csv,
    lambda_presets,
    random_transform_study,
)
from .gauge import (  # noqa: E402
    CanonicalPair,
    FactorPair,
    apply_transform,
    canonicalize,
    sum_tie,
    symmetric_tie,
    whiten,
)
from .lsa import (  # noqa: E402
    DocTermMatrix,
    build_doc_term,
    lsa_solve,
    reconstruction_error,
    tokenize,
)
from .matcore import (  # noqa: E402
    Transform,
    maximal_invariant,
    power_diag,
    qr_positive,
    same_orbit,
    sample_transform,
    svd_thin,
    sym_eig_desc,
    sym_inv_sqrt,
    sym_sqrt,
)
from .optimize import (  # noqa: E402
    OptimizerOptions,
    cross_validated_optimize,
    kfold_split,
    nelder_mead,
    optimize_diag,
)
from .textio import load_embedding_text, save_embedding_text  # noqa: E402
