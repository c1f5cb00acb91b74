"""Complex dense linear algebra used by the reflection-matrix generators.

Everything here is a pure function of its inputs.  Matrices are plain
``numpy.ndarray`` objects; vectorization follows the column-major
(Fortran) convention throughout, so ``vec(A)[i + j*n] == A[i, j]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ContractViolation, DegenerateInputError, DimensionError

__all__ = [
    "TakagiDecomposition",
    "symmetrize",
    "takagi",
    "project_symmetric_unitary",
    "project_symmetric_unitary_batch",
    "duplication_matrix",
    "vech_indices",
    "vec",
    "unvec",
    "vech",
    "vecd",
    "symmetric_from_vech",
    "dominant_right_singular_vector",
    "fix_phase",
    "top_eigenpair",
    "phase_factor",
    "kron",
]

SYMMETRY_TOL = 1e-10
# Singular values closer than this (relative to the largest) are aligned blockwise.
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class TakagiDecomposition:
    """``S = U diag(values) U^T`` with unitary ``U`` and descending ``values``."""

    vectors: np.ndarray
    values: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def _square(A, name="matrix"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def symmetrize(A):
    """Return ``(A + A^T) / 2``; the result is exactly symmetric."""
    A = _square(A)
    return (A + A.T) / 2


def _symmetric_unitary_sqrt(W):
    """Return unitary ``Q`` with ``Q Q^T = W`` for a symmetric unitary ``W``.

    Real and imaginary parts of a symmetric unitary matrix are commuting
    real symmetric matrices, so one real orthogonal ``O`` diagonalizes both.
    A generic real combination of the two has the same eigenvectors.
    """
    W = (W + W.T) / 2
    _, O = np.linalg.eigh(W.real + 0.7548776662466927 * W.imag)
    d = np.einsum("ik,ij,jk->k", O, W, O)
    return O * np.sqrt(d / np.abs(d))


def takagi(S) -> TakagiDecomposition:
    """Takagi factorization of a complex symmetric matrix.

    Computed from the SVD ``S = A diag(s) B^H`` by rotating each left
    singular vector so that it also serves as the conjugate right one.
    For an isolated singular value the rotation is the square root of the
    phase of ``a_k^T b_k``; a cluster of (near-)equal singular values is
    aligned as a block.  Singular vectors of numerically zero singular
    values are kept as returned by the SVD: they do not affect the
    reconstruction and the Takagi vectors are not unique there.

    Raises
    ------
    DimensionError
        If ``S`` is not square.
    ContractViolation
        If ``||S - S^T||_F > 1e-10 ||S||_F``.
    """
    S = _square(S)
    norm = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > SYMMETRY_TOL * norm:
        raise ContractViolation("takagi requires a complex symmetric matrix")
    n = S.shape[0]
    A, s, Bh = np.linalg.svd(S.astype(complex, copy=False))
    if n == 0 or s[0] == 0.0:
        return TakagiDecomposition(np.eye(n, dtype=complex), np.zeros(n))

    null_tol = s[0] * n * np.finfo(float).eps
    U = A.copy()
    start = 0
    while start < n and s[start] > null_tol:
        stop = start + 1
        while stop < n and s[stop] > null_tol and s[stop - 1] - s[stop] <= CLUSTER_TOL * s[0]:
            stop += 1
        cols = slice(start, stop)
        # W = B_c^H conj(A_c); for exact data it is symmetric unitary.
        W = Bh[cols, :] @ A[:, cols].conj()
        if stop - start == 1:
            w = W[0, 0]
            U[:, start] = A[:, start] * np.sqrt(w / abs(w))
        else:
            U[:, cols] = A[:, cols] @ _symmetric_unitary_sqrt(W)
        start = stop
    return TakagiDecomposition(U, s)


def project_symmetric_unitary(S):
    """Closest symmetric unitary matrix ``U U^T`` from the Takagi factors of ``S``."""
    U = takagi(S).vectors
    theta = U @ U.T
    return (theta + theta.T) / 2


def project_symmetric_unitary_batch(S):
    """:func:`project_symmetric_unitary` over a stack of matrices (shape ``(k, n, n)``).

    Stacks whose singular values are all distinct and non-zero are handled
    in one vectorized pass; any matrix with a tie or a null singular value
    goes through the blockwise path of :func:`takagi`.
    """
    S = np.asarray(S, dtype=complex)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise DimensionError(f"expected a stack of square matrices, got shape {S.shape}")
    k, n, _ = S.shape
    if k == 0:
        return S.copy()
    norms = np.linalg.norm(S, axis=(1, 2))
    if np.any(np.linalg.norm(S - S.transpose(0, 2, 1), axis=(1, 2)) > SYMMETRY_TOL * norms):
        raise ContractViolation("takagi requires complex symmetric matrices")
    A, s, Bh = np.linalg.svd(S)
    top = s[:, :1]
    generic = np.all(s > top * n * np.finfo(float).eps, axis=1)
    if n > 1:
        generic &= np.all(-np.diff(s, axis=1) > CLUSTER_TOL * top, axis=1)
    out = np.empty_like(S)
    if np.any(generic):
        Ag, Bg = A[generic], Bh[generic]
        w = np.einsum("kij,kji->ki", Bg, Ag.conj())     # diag(B^H conj(A))
        U = Ag * np.sqrt(w / np.abs(w))[:, None, :]
        out[generic] = U @ U.transpose(0, 2, 1)
    for i in np.flatnonzero(~generic):
        U = takagi(S[i]).vectors
        out[i] = U @ U.T
    return (out + out.transpose(0, 2, 1)) / 2


def vech_indices(n):
    """Row and column indices of the lower triangle in ``vech`` order."""
    # triu_indices walks rows of the upper triangle, i.e. columns of the lower one
    cols, rows = np.triu_indices(n)
    return rows, cols


def duplication_matrix(n, sparse=False):
    """Binary ``n^2 x n(n+1)/2`` matrix with ``vec(S) = D @ vech(S)`` for symmetric ``S``.

    Column ``k`` is ``vec(T_ij)``, where ``(i, j)`` is the k-th lower-triangle
    position and ``T_ij`` has ones at ``(i, j)`` and ``(j, i)``.
    """
    if n < 1:
        raise DimensionError("duplication matrix needs n >= 1")
    rows, cols = vech_indices(n)
    k = np.arange(rows.size)
    lower = rows + cols * n
    upper = cols + rows * n
    off = rows != cols
    r = np.concatenate([lower, upper[off]])
    c = np.concatenate([k, k[off]])
    D = scipy.sparse.csr_matrix((np.ones(r.size), (r, c)), shape=(n * n, rows.size))
    return D if sparse else D.toarray()


def vec(A):
    A = np.asarray(A)
    if A.ndim != 2:
        raise DimensionError("vec expects a matrix")
    return A.reshape(-1, order="F")


def unvec(v, shape):
    v = np.asarray(v)
    if v.ndim != 1 or v.size != shape[0] * shape[1]:
        raise DimensionError(f"cannot reshape vector of length {v.size} to {shape}")
    return v.reshape(shape, order="F")


def vech(A):
    A = _square(A)
    rows, cols = vech_indices(A.shape[0])
    return A[rows, cols]


def vecd(A):
    return np.diag(_square(A)).copy()


def symmetric_from_vech(theta, n):
    """``unvec(D theta)`` without forming the duplication matrix."""
    theta = np.asarray(theta)
    if theta.ndim != 1 or theta.size != n * (n + 1) // 2:
        raise DimensionError(f"vech of an {n}x{n} matrix has {n * (n + 1) // 2} entries")
    rows, cols = vech_indices(n)
    out = np.zeros((n, n), dtype=theta.dtype)
    out[rows, cols] = theta
    out[cols, rows] = theta
    return out


def phase_factor(v, rel_tol=1e-8):
    """Unit scalar that makes the first non-negligible entry of ``v`` real and positive."""
    v = np.asarray(v)
    mag = np.abs(v)
    if mag.size == 0 or mag.max() == 0:
        return 1.0
    k = int(np.argmax(mag > rel_tol * mag.max()))
    return np.conj(v[k]) / mag[k]


def fix_phase(v, rel_tol=1e-8):
    """Rotate ``v`` so its first non-negligible entry is real and positive."""
    return np.asarray(v) * phase_factor(v, rel_tol)


def top_eigenpair(H):
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix."""
    n = H.shape[0]
    w, V = scipy.linalg.eigh(H, subset_by_index=[n - 1, n - 1])
    return float(w[0]), V[:, 0]


def dominant_right_singular_vector(A, with_value=False):
    """Unit vector ``v`` maximizing ``||A v||_2``.

    Tall inputs use a thin SVD.  Wide inputs use the small Gram matrix
    ``A A^H``: its top eigenvector ``u`` gives ``v = A^H u / sigma_1``.
    The phase is fixed with :func:`fix_phase` so repeated calls agree bit-for-bit.

    Returns ``v`` or, with ``with_value=True``, the pair ``(sigma_1, v)``.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise DimensionError("expected a matrix")
    if A.size == 0 or not np.any(A):
        raise DegenerateInputError("dominant singular vector of an all-zero matrix")
    m, n = A.shape
    if m >= n:
        _, s, Vh = np.linalg.svd(A, full_matrices=False)
        sigma, v = s[0], Vh[0].conj()
    else:
        _, u = top_eigenpair(A @ A.conj().T)
        v = A.conj().T @ u
        sigma = np.linalg.norm(v)
        v = v / sigma
    v = fix_phase(v)
    return (float(sigma), v) if with_value else v


def kron(A, B):
    return np.kron(np.atleast_2d(A), np.atleast_2d(B))
