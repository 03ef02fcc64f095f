"""Dense decompositions, matrix functions and random transforms.

Everything here works on plain ``numpy`` float arrays. Randomness comes
from numpy's PCG64 bit generator (``numpy.random.default_rng``), seeded by
an integer, so a given seed reproduces the same draws bit for bit on one
platform.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    InvalidTransform,
    NonpositiveDiagonal,
    NotPositiveDefinite,
    RankRequestTooLarge,
    ShapeMismatch,
    SingularInput,
)

#: relative threshold on sigma_min / sigma_max below which a matrix is singular
SINGULAR_RTOL = 1e-12
ORTHO_TOL = 1e-10

KINDS = ("general", "orthogonal", "upper_triangular", "diagonal", "scaled_identity")


def as_matrix(x, name="matrix") -> np.ndarray:
    """Return `x` as a finite 2-d float array, or raise."""
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-d, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _square(x, name) -> np.ndarray:
    a = as_matrix(x, name)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def is_nonsingular(a: np.ndarray, rtol: float = SINGULAR_RTOL) -> bool:
    s = np.linalg.svd(a, compute_uv=False)
    return bool(s[0] > 0 and s[-1] > rtol * s[0])


def _require_nonsingular(a, name):
    if not is_nonsingular(a):
        raise SingularInput(f"{name} is singular to relative tolerance {SINGULAR_RTOL:g}")


def orthogonality_error(q: np.ndarray) -> float:
    """max |Q^T Q - I|."""
    return float(np.max(np.abs(q.T @ q - np.eye(q.shape[1]))))


@dataclass(frozen=True, eq=False)
class Transform:
    """A d x d nonsingular matrix tagged with the class it belongs to.

    Validation is done on construction. For ``upper_triangular`` and
    ``diagonal`` kinds a strictly positive diagonal already guarantees
    invertibility, so no conditioning test is applied: random upper
    triangular matrices at large d are legitimately ill-conditioned.
    """

    matrix: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        m = _square(self.matrix, "transform")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        k = self.kind
        if k not in KINDS:
            raise ValueError(f"unknown transform kind {k!r}; expected one of {KINDS}")
        d = m.shape[0]
        if k in ("upper_triangular", "diagonal"):
            off = np.tril(m, -1) if k == "upper_triangular" else m - np.diag(np.diag(m))
            if np.any(off != 0):
                raise InvalidTransform(f"{k} transform has nonzero entries outside its pattern")
            if np.any(np.diag(m) <= 0):
                raise InvalidTransform(f"{k} transform needs a strictly positive diagonal")
            return
        if not is_nonsingular(m):
            raise SingularInput("transform is singular to tolerance")
        if k == "orthogonal" and orthogonality_error(m) >= ORTHO_TOL:
            raise InvalidTransform("matrix is not orthogonal to tolerance")
        if k == "scaled_identity" and np.any(m != m[0, 0] * np.eye(d)):
            raise InvalidTransform("matrix is not a multiple of the identity")

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)


def qr_positive(c):
    """QR decomposition with a strictly positive diagonal in R.

    This is the unique factorisation ``C = Q R`` with Q orthogonal and R in
    the group of upper triangular matrices with positive diagonal. R is a
    cross-section of the orbits ``{QC : Q orthogonal}``.

    Returns
    -------
    (Transform, Transform)
        ``(Q, R)`` with kinds ``orthogonal`` and ``upper_triangular``.
    """
    c = _square(c, "C")
    _require_nonsingular(c, "C")
    q, r = np.linalg.qr(c)
    s = np.sign(np.diag(r))
    q = q * s
    r = np.triu(s[:, None] * r)
    return Transform(q, "orthogonal"), Transform(r, "upper_triangular")


def svd_thin(x, d: int):
    """Leading rank-d SVD factors ``(A_d, Sigma_d, B_d)`` of an n x p matrix.

    ``A_d @ Sigma_d @ B_d.T`` is a best rank-d Frobenius approximant of `x`.
    Singular values are descending; the sign of each singular pair is
    whatever LAPACK returns.
    """
    x = as_matrix(x, "X")
    n, p = x.shape
    if not 1 <= d <= min(n, p):
        raise RankRequestTooLarge(f"rank {d} requested for a {n}x{p} matrix")
    a, s, bt = np.linalg.svd(x, full_matrices=False)
    return a[:, :d], np.diag(s[:d]), bt[:d].T


def singular_values(x) -> np.ndarray:
    return np.linalg.svd(as_matrix(x, "X"), compute_uv=False)


def sym_eig_desc(s):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns ``(E, w)`` with E orthogonal and ``E @ diag(w) @ E.T == S``.
    Within a repeated eigenvalue any orthonormal basis may be returned.
    """
    s = _square(s, "S")
    scale = max(1.0, float(np.max(np.abs(s))))
    if np.max(np.abs(s - s.T)) >= 1e-8 * scale:
        raise ShapeMismatch("S is not symmetric")
    s = (s + s.T) / 2
    w, e = np.linalg.eigh(s)
    return e[:, ::-1], w[::-1]


def _spd_eig(w_mat, name):
    e, w = sym_eig_desc(w_mat)
    if not (w[-1] > SINGULAR_RTOL * w[0] and w[0] > 0):
        raise NotPositiveDefinite(f"{name} is not positive definite", eigenvalues=w)
    return e, w


def sym_sqrt(w_mat) -> np.ndarray:
    """Symmetric positive-definite square root of an SPD matrix."""
    e, w = _spd_eig(w_mat, "W")
    r = (e * np.sqrt(w)) @ e.T
    return (r + r.T) / 2


def sym_inv_sqrt(w_mat) -> np.ndarray:
    """Inverse of :func:`sym_sqrt`, so that ``R @ W @ R == I``."""
    e, w = _spd_eig(w_mat, "W")
    r = (e / np.sqrt(w)) @ e.T
    return (r + r.T) / 2


def maximal_invariant(c) -> np.ndarray:
    """``C^T C``; constant exactly on orbits ``{QC : Q orthogonal}``."""
    c = _square(c, "C")
    return c.T @ c


def same_orbit(c1, c2, tol: float = 1e-8) -> Optional[Transform]:
    """Orthogonal Q with ``c1 == Q @ c2``, or None if there is none.

    The candidate ``c1 @ inv(c2)`` is accepted when its orthogonality
    error is below `tol`; it is then snapped to the nearest orthogonal
    matrix so the returned Transform passes the strict orthogonal check.
    """
    c1 = _square(c1, "C1")
    c2 = _square(c2, "C2")
    if c1.shape != c2.shape:
        raise ShapeMismatch(f"shapes differ: {c1.shape} vs {c2.shape}")
    _require_nonsingular(c1, "C1")
    _require_nonsingular(c2, "C2")
    q = np.linalg.solve(c2.T, c1.T).T
    if orthogonality_error(q) >= tol:
        return None
    if orthogonality_error(q) >= ORTHO_TOL:
        u, _, vt = np.linalg.svd(q)
        q = u @ vt
    return Transform(q, "orthogonal")


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for an integer seed."""
    return np.random.default_rng(seed)


def sample_transform(kind: str, d: int, rng_seed: int) -> Transform:
    """Draw a random transform of the given kind.

    ``diagonal`` and ``upper_triangular`` fill their non-zero pattern
    (diagonal included) with i.i.d. ``|N(0, 1)|`` draws. ``orthogonal`` is
    the Q factor of :func:`qr_positive` applied to a standard Gaussian
    matrix, which is Haar distributed. ``general`` is a standard Gaussian
    matrix, redrawn from the same stream while singular to tolerance.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = make_rng(rng_seed)
    if kind == "diagonal":
        while True:
            diag = np.abs(rng.standard_normal(d))
            if np.all(diag > 0):
                return Transform(np.diag(diag), "diagonal")
    if kind == "upper_triangular":
        iu = np.triu_indices(d)
        while True:
            m = np.zeros((d, d))
            m[iu] = np.abs(rng.standard_normal(len(iu[0])))
            if np.all(np.diag(m) > 0):
                return Transform(m, "upper_triangular")
    if kind in ("orthogonal", "general"):
        while True:
            g = rng.standard_normal((d, d))
            if is_nonsingular(g):
                break
        if kind == "general":
            return Transform(g, "general")
        q, _ = qr_positive(g)
        return q
    raise ValueError(f"cannot sample transforms of kind {kind!r}")


def power_diag(lam, alpha: float) -> Transform:
    """Entry-wise power of a positive diagonal transform."""
    m = lam.matrix if isinstance(lam, Transform) else _square(lam, "Lambda")
    diag = np.diag(m)
    if np.any(m - np.diag(diag) != 0):
        raise InvalidTransform("Lambda must be diagonal")
    if np.any(diag <= 0):
        raise NonpositiveDiagonal("Lambda must have a strictly positive diagonal")
    return Transform(np.diag(diag ** alpha), "diagonal")
