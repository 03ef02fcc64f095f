"""Gauge transforms of factor pairs and canonical representatives.

A factor pair ``(U, V)`` with U of shape (n, d) and V of shape (d, p) is
only determined by its product ``UV``: ``(U C^-1, C V)`` fits the data
equally well for every invertible C. The functions here move along that
orbit and pick distinguished points on it.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSpectrum,
    NotPositiveDefinite,
    RankDeficientV,
    ShapeMismatch,
    SingularInput,
    SingularTransform,
    ZeroFactor,
)
from .matcore import (
    SINGULAR_RTOL,
    Transform,
    as_matrix,
    sym_eig_desc,
    sym_sqrt,
)

SIGN_TOL = 1e-10
DEGENERATE_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class FactorPair:
    """Context matrix U (n x d) and word matrix V (d x p); word j is ``V[:, j]``."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.U, "U")
        v = as_matrix(self.V, "V")
        if u.shape[1] != v.shape[0]:
            raise ShapeMismatch(f"inner dimensions differ: U {u.shape}, V {v.shape}")
        n, d = u.shape
        p = v.shape[1]
        if d > min(n, p):
            raise ShapeMismatch(f"d={d} exceeds min(n, p)={min(n, p)}")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "V", v)

    @property
    def d(self) -> int:
        return self.V.shape[0]

    def product(self) -> np.ndarray:
        return self.U @ self.V


@dataclass(frozen=True, eq=False)
class CanonicalPair:
    """The unique representative with ``VV^T = I`` and ``U^T U`` diagonal descending.

    `spectrum` holds the diagonal of ``U^T U``, i.e. the generalised
    eigenvalues of ``U^T U`` relative to ``V V^T`` for the input pair.
    `degenerate` lists index pairs ``(i, i+1)`` whose spectrum values
    coincide to relative tolerance, where the representative is not unique.
    `zero_columns` lists columns of U too small for the sign convention.
    """

    pair: FactorPair
    spectrum: np.ndarray
    degenerate: list = field(default_factory=list)
    zero_columns: list = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return not self.degenerate and not self.zero_columns


def _transform_matrix(c) -> np.ndarray:
    if isinstance(c, Transform):
        return c.matrix
    try:
        return Transform(c, "general").matrix
    except SingularInput as exc:
        raise SingularTransform(str(exc)) from exc


def apply_transform(c, pair: FactorPair) -> FactorPair:
    """Return ``(U C^-1, C V)``; the product UV is unchanged."""
    m = _transform_matrix(c)
    if m.shape[0] != pair.d:
        raise ShapeMismatch(f"transform is {m.shape[0]}x{m.shape[0]}, pair has d={pair.d}")
    u = np.linalg.solve(m.T, pair.U.T).T
    return FactorPair(u, m @ pair.V)


def _row_svd(v: np.ndarray):
    """Thin SVD ``V = P diag(s) Qt``; roots of ``V V^T`` come from it without squaring."""
    p, s, qt = np.linalg.svd(v, full_matrices=False)
    if not (s[0] > 0 and s[-1] > SINGULAR_RTOL * s[0]):
        raise RankDeficientV("V does not have full row rank")
    return p, s, qt


def _degenerate_indices(spectrum: np.ndarray) -> list:
    scale = max(float(np.max(np.abs(spectrum))), np.finfo(float).tiny)
    gaps = np.abs(np.diff(spectrum))
    return [(int(i), int(i) + 1) for i in np.flatnonzero(gaps < DEGENERATE_RTOL * scale)]


def canonicalize(pair: FactorPair) -> CanonicalPair:
    """Map a pair to the canonical point of its gauge orbit.

    The transform C simultaneously diagonalises ``V V^T`` (to I) and
    ``U^T U`` (to a descending diagonal). Columns of U are then signed so
    that their first entry of magnitude above 1e-10 is positive, with the
    matching row of V flipped too. A :class:`DegenerateSpectrum` warning is
    issued when the result is not unique.
    """
    pv, sv, _ = _row_svd(pair.V)
    utu = pair.U.T @ pair.U
    if not np.any(utu):
        raise ZeroFactor("U is identically zero; nothing to diagonalise")
    root = (pv * sv) @ pv.T
    e, lam = sym_eig_desc((root @ utu @ root + (root @ utu @ root).T) / 2)
    c = e.T @ ((pv / sv) @ pv.T)
    # C^-1 = W^{1/2} E since E is orthogonal
    u = pair.U @ (root @ e)
    v = c @ pair.V

    zero_columns = []
    for j in range(u.shape[1]):
        big = np.flatnonzero(np.abs(u[:, j]) > SIGN_TOL)
        if big.size == 0:
            zero_columns.append(j)
            continue
        if u[big[0], j] < 0:
            u[:, j] = -u[:, j]
            v[j, :] = -v[j, :]

    spectrum = np.einsum("ij,ij->j", u, u)
    degenerate = _degenerate_indices(lam)
    if degenerate or zero_columns:
        warnings.warn(
            f"canonical form not unique: tied spectrum at {degenerate}, "
            f"zero U columns {zero_columns}",
            DegenerateSpectrum,
            stacklevel=2,
        )
    return CanonicalPair(FactorPair(u, v), spectrum, degenerate, zero_columns)


def whiten(v) -> np.ndarray:
    """``(V V^T)^{-1/2} V``: impose orthonormal rows using V alone."""
    v = as_matrix(v, "V")
    p, _, qt = _row_svd(v)
    return p @ qt


@dataclass(frozen=True, eq=False)
class TieResult:
    V_tied: np.ndarray
    C: Transform
    residual: float


def symmetric_tie(pair: FactorPair) -> TieResult:
    """Find the gauge in which ``U^T == V``.

    Solves ``C^-T U^T = C V`` for symmetric positive definite ``M = C^T C``
    via least squares on ``M V = U^T``, symmetrises M and takes its square
    root. The relative residual of the tie equation is always returned.

    Raises
    ------
    NotPositiveDefinite
        If the symmetrised M is not SPD, i.e. the pair is not gauge
        equivalent to a tied pair. The eigenvalues are attached.
    """
    v = pair.V
    if pair.U.shape[0] != v.shape[1]:
        raise ShapeMismatch("tying U^T to V needs n == p")
    _row_svd(v)
    ut = pair.U.T
    m = np.linalg.lstsq(v.T, ut.T, rcond=None)[0].T
    m = (m + m.T) / 2
    ev = np.linalg.eigvalsh(m)[::-1]
    if not (ev[0] > 0 and ev[-1] > SINGULAR_RTOL * ev[0]):
        raise NotPositiveDefinite(
            f"symmetrised tie matrix is not positive definite (eigenvalues {ev})",
            eigenvalues=ev,
        )
    c = sym_sqrt(m)
    v_tied = c @ v
    lhs = np.linalg.solve(c.T, ut)
    residual = float(np.linalg.norm(lhs - v_tied) / np.linalg.norm(ut))
    return TieResult(v_tied, Transform(c, "general"), residual)


def sum_tie(pair: FactorPair) -> np.ndarray:
    """``U^T + V``, the additive symmetrisation used for GloVe vectors."""
    if pair.U.shape[0] != pair.V.shape[1]:
        raise ShapeMismatch(f"U^T is {pair.U.T.shape}, V is {pair.V.shape}")
    return pair.U.T + pair.V
