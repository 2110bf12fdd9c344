"""Dense linear-algebra helpers shared by every module."""

from typing import Sequence

import numpy as np
import scipy.linalg as la

from ..errors import DimensionMismatch, NotPSD, SingularSylvester

RANK_RTOL = 1e-8


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def as_vector(value, name: str = "vector") -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    return arr


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Count singular values above ``rtol`` times the largest one."""
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def logdet_pd(M: np.ndarray) -> float:
    """log det of a symmetric positive definite matrix via Cholesky."""
    if M.size == 0:
        return 0.0
    try:
        R = la.cholesky(symmetrize(M), lower=True)
    except la.LinAlgError as exc:
        min_eig = float(np.min(np.linalg.eigvalsh(symmetrize(M))))
        raise NotPSD(min_eig, f"Cholesky failed: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(R))))


def psd_sqrt(K: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Symmetric square root of a PSD matrix through its eigendecomposition."""
    K = symmetrize(as_matrix(K, "K"))
    w, V = np.linalg.eigh(K)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -tol * scale:
        raise NotPSD(float(w[0]))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def lower_toeplitz(column: Sequence[float], size: int) -> np.ndarray:
    """Lower-triangular Toeplitz matrix with the given first column (zero padded)."""
    c = np.zeros(size)
    col = np.asarray(column, dtype=float)[:size]
    c[:col.size] = col
    return la.toeplitz(c, np.zeros(size))


def is_strictly_lower(M: np.ndarray) -> bool:
    return bool(np.all(np.triu(M) == 0.0))


def strictly_lower(M: np.ndarray) -> np.ndarray:
    return np.tril(M, -1)


def observability_matrix(A: np.ndarray, C: np.ndarray, rows: int) -> np.ndarray:
    """Stack ``C' A^t`` for t = 0..rows-1."""
    n = A.shape[0]
    out = np.empty((rows, n))
    row = C.reshape(-1).copy()
    for t in range(rows):
        out[t] = row
        row = row @ A
    return out


def solve_sylvester_kron(left: np.ndarray, right: np.ndarray, rhs: np.ndarray,
                         rcond: float = 1e-12) -> np.ndarray:
    """Solve ``left X - X right = rhs`` as one dense system on vec(X).

    With column-major vectorisation the operator is
    ``kron(I, left) - kron(right.T, I)``.
    """
    p, q = left.shape[0], right.shape[0]
    if rhs.shape != (p, q):
        raise DimensionMismatch(f"right-hand side must be {(p, q)}, got {rhs.shape}")
    if p == 0 or q == 0:
        return np.zeros((p, q))
    op = np.kron(np.eye(q), left) - np.kron(right.T, np.eye(p))
    s = np.linalg.svd(op, compute_uv=False)
    if s[-1] <= rcond * max(s[0], 1.0):
        raise SingularSylvester(
            f"Sylvester operator is singular (smallest singular value {s[-1]:.3e}); "
            "the two spectra are not disjoint")
    vec = np.linalg.solve(op, rhs.reshape(-1, order="F"))
    return vec.reshape((p, q), order="F")


def orthogonal_residual(target: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Component of ``target`` orthogonal to the row space of ``rows``."""
    if rows.size == 0 or rows.shape[0] == 0:
        return target.copy()
    Q, R, _ = la.qr(rows.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return target.copy()
    rank = int(np.sum(diag > 1e-12 * diag[0]))
    Q = Q[:, :rank]
    residual = target - Q @ (Q.T @ target)
    # one re-orthogonalisation pass
    return residual - Q @ (Q.T @ residual)
