"""Desk-scale linear algebra: dense factorizations, a symmetric-definite
generalized eigensolver, and numerical plus exact integer rank.

Dense factorizations everywhere except the indefinite solver, which
keeps sparse saddle-point systems sparse.  LAPACK/SuperLU (via scipy)
do the heavy lifting; this module pins the contracts the rest of the
package relies on: symmetry checks, ascending B-orthonormal eigenpairs,
residual-verified solves, and a rank that can be cross-checked against
exact integer elimination for incidence matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

SYMMETRY_RTOL = 1e-12
RANK_RTOL = 1e-10


class NotSymmetricError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    pass


class SingularSystemError(ValueError):
    pass


def as_dense(A) -> np.ndarray:
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


def check_symmetric(A, name="matrix", rtol=SYMMETRY_RTOL) -> np.ndarray:
    A = as_dense(A)
    if A.shape[0] != A.shape[1]:
        raise NotSymmetricError(f"{name} is not square: {A.shape}")
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(A - A.T).max() > rtol * scale:
        raise NotSymmetricError(f"{name} is not symmetric within {rtol:g} relative tolerance")
    return 0.5 * (A + A.T)


def cholesky_solve(A, b) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A."""
    A = check_symmetric(A, "A")
    b = np.asarray(b, dtype=float)
    try:
        factor = sla.cho_factor(A, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix not positive definite") from exc
    return sla.cho_solve(factor, b, check_finite=False)


def symmetric_indefinite_solve(A, b, residual_rtol=1e-8) -> np.ndarray:
    """Solve A x = b for symmetric (possibly indefinite) A.

    LU with partial pivoting plus one step of iterative refinement; the
    relative residual is verified against `residual_rtol` and a failure
    is reported as a singular system.  Sparse input keeps a sparse
    factorization (saddle-point systems grow quadratically too fast for
    the dense path).
    """
    if sp.issparse(A):
        return _sparse_symmetric_solve(A, b, residual_rtol)
    A = check_symmetric(A, "A")
    b = np.asarray(b, dtype=float)
    try:
        with np.errstate(all="ignore"):
            lu, piv = sla.lu_factor(A, check_finite=False)
            x = sla.lu_solve((lu, piv), b, check_finite=False)
            x = x + sla.lu_solve((lu, piv), b - A @ x, check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularSystemError("singular system") from exc
    scale = max(np.abs(A).max() * max(np.abs(x).max(), 1.0), np.abs(b).max(), 1e-300)
    resid = np.abs(b - A @ x).max()
    if not np.isfinite(resid) or resid > residual_rtol * scale:
        raise SingularSystemError("singular system")
    return x


def _sparse_symmetric_solve(A, b, residual_rtol) -> np.ndarray:
    A = A.tocsc()
    scale_A = np.abs(A).max() if A.nnz else 0.0
    if (abs(A - A.T)).max() > SYMMETRY_RTOL * max(scale_A, 1e-300):
        raise NotSymmetricError("A is not symmetric")
    b = np.asarray(b, dtype=float)
    try:
        with np.errstate(all="ignore"):
            factor = spla.splu(A)
            x = factor.solve(b)
            x = x + factor.solve(b - A @ x)
    except (RuntimeError, ValueError) as exc:
        raise SingularSystemError("singular system") from exc
    scale = max(scale_A * max(np.abs(x).max(), 1.0), np.abs(b).max(), 1e-300)
    resid = np.abs(b - A @ x).max()
    if not np.isfinite(resid) or resid > residual_rtol * scale:
        raise SingularSystemError("singular system")
    return x


@dataclass
class Spectrum:
    """Ascending eigenvalues with B-orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        return iter((self.eigenvalues, self.eigenvectors))


def generalized_symmetric_eig(A, B) -> Spectrum:
    """Solve A x = lambda B x with A symmetric and B symmetric positive
    definite.  Dense reduction through the Cholesky factor of B."""
    A = check_symmetric(A, "A")
    B = check_symmetric(B, "B")
    try:
        vals, vecs = sla.eigh(A, B, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix not positive definite") from exc
    return Spectrum(vals, vecs)


def numerical_rank(A, rel_tol=RANK_RTOL) -> int:
    """Number of singular values above rel_tol times the largest one."""
    A = as_dense(A)
    if A.size == 0:
        return 0
    svals = sla.svdvals(A, check_finite=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.count_nonzero(svals > rel_tol * svals[0]))


def integer_rank(M) -> int:
    """Exact rank of an integer matrix via fraction-free elimination.

    Bareiss' algorithm keeps every intermediate entry an exact integer
    (a minor of M).  For incidence matrices these minors are tiny, so
    int64 suffices; a Python bigint fallback guards the general case.
    """
    M = as_dense(M)
    if M.size == 0:
        return 0
    R = np.rint(M).astype(np.int64)
    if np.abs(M - R).max() > 0:
        raise ValueError("integer_rank requires an integer matrix")
    try:
        return _bareiss_rank_int64(R.copy())
    except OverflowError:
        return _bareiss_rank_bigint([[int(x) for x in row] for row in R.tolist()])


def _bareiss_rank_int64(M: np.ndarray) -> int:
    nrows, ncols = M.shape
    prev = 1
    r = 0
    for c in range(ncols):
        pivots = np.nonzero(M[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        if p != r:
            M[[r, p]] = M[[p, r]]
        if np.abs(M).max() > 2**30:
            raise OverflowError
        piv = M[r, c]
        below = M[r + 1 :, :]
        below[:] = (below * piv - np.outer(M[r + 1 :, c], M[r])) // prev
        prev = piv
        r += 1
        if r == nrows:
            break
    return r


def _bareiss_rank_bigint(M: list[list[int]]) -> int:
    nrows = len(M)
    ncols = len(M[0])
    prev = 1
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        for i in range(r + 1, nrows):
            fac = M[i][c]
            M[i] = [(piv * M[i][j] - fac * M[r][j]) // prev for j in range(ncols)]
        prev = piv
        r += 1
        if r == nrows:
            break
    return r


def write_matrix_market(A, target) -> None:
    A = sp.coo_matrix(A) if not sp.issparse(A) else A.tocoo()
    scipy.io.mmwrite(target, A)


def read_matrix_market(source):
    return scipy.io.mmread(source)
