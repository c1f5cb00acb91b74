"""Adversarial reflection matrices for single-, group- and fully connected surfaces.

Two strategies are provided.  The random attack reconfigures the surface
with a fresh valid reflection.  The aligned attack maximizes the weighted
reflected interference ``sum_i mu_i ||g_i^H Theta G||^2`` over the
relaxed (unit-norm) half-vectorized reflection, then projects back onto
the feasible set.

Group index sets are contiguous blocks of the element axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linalg
from .errors import ContractViolation, DegenerateInputError, DimensionError

ARCHITECTURES = ("single", "group", "fully")
VALIDATION_TOL = 1e-10


def group_sizes_for(architecture, dim, group_size=None):
    """Group partition of ``dim`` elements implied by an architecture."""
    if architecture == "fully":
        return (dim,)
    if architecture == "single":
        return (1,) * dim
    if architecture == "group":
        if group_size is None or group_size < 1 or dim % group_size:
            raise DimensionError(f"D divisible by D_g violated (D={dim}, D_g={group_size})")
        return (group_size,) * (dim // group_size)
    raise ValueError(f"unknown architecture {architecture!r}")


@dataclass(frozen=True)
class ReflectionConfig:
    architecture: str
    theta: np.ndarray
    group_sizes: tuple

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    def blocks(self):
        start = 0
        for n in self.group_sizes:
            yield self.theta[start:start + n, start:start + n]
            start += n


def validate_reflection(config: ReflectionConfig, tol=VALIDATION_TOL):
    """Raise ``ContractViolation`` unless ``config`` satisfies its architecture constraints."""
    theta = np.asarray(config.theta)
    D = theta.shape[0]
    if theta.shape != (D, D) or sum(config.group_sizes) != D:
        raise ContractViolation("reflection shape does not match its group partition")
    if not np.all(np.isfinite(theta)):
        raise ContractViolation("reflection has non-finite entries")
    if config.architecture == "single" and any(n != 1 for n in config.group_sizes):
        raise ContractViolation("single-connected reflection must have singleton groups")
    if config.architecture == "fully" and len(config.group_sizes) != 1:
        raise ContractViolation("fully connected reflection must have one group")
    mask = scipy.linalg.block_diag(*[np.ones((n, n), dtype=bool) for n in config.group_sizes])
    if np.any(theta[~mask] != 0):
        raise ContractViolation("non-zero entries outside the diagonal blocks")
    if np.linalg.norm(theta - theta.T) > tol:
        raise ContractViolation("reflection is not symmetric")
    if np.linalg.norm(theta @ theta.conj().T - np.eye(D)) > tol:
        raise ContractViolation("reflection is not unitary")
    return config


def attack_objective(theta, bs_ris, ris_user, weights):
    """Weighted reflected interference ``sum_i mu_i ||g_i^H theta G||^2``."""
    rows = np.asarray(ris_user).conj() @ theta @ bs_ris
    return float(np.sum(np.asarray(weights) * np.sum(np.abs(rows) ** 2, axis=1)))


def _block_diag(blocks):
    if len(blocks) == 1:
        return np.asarray(blocks[0])
    if isinstance(blocks, np.ndarray):
        k, n, _ = blocks.shape
        out = np.zeros((k * n, k * n), dtype=blocks.dtype)
        idx = np.arange(k * n).reshape(k, n)
        out[idx[:, :, None], idx[:, None, :]] = blocks
        return out
    return scipy.linalg.block_diag(*blocks)


def random_reflection(architecture, dim, rng, group_size=None) -> ReflectionConfig:
    """Random valid reflection.

    Fully and group connected blocks are projections of symmetrized
    complex Gaussian matrices onto the symmetric unitary set.  Single
    connected surfaces get i.i.d. uniform phases.
    """
    sizes = group_sizes_for(architecture, dim, group_size)
    if architecture == "single":
        theta = np.diag(np.exp(2j * np.pi * rng.random(dim)))
        return ReflectionConfig("single", theta, sizes)
    n = sizes[0]
    X = (rng.standard_normal((len(sizes), n, n)) + 1j * rng.standard_normal((len(sizes), n, n))) / np.sqrt(2)
    blocks = linalg.project_symmetric_unitary_batch((X + X.transpose(0, 2, 1)) / 2)
    return ReflectionConfig(architecture, _block_diag(blocks), sizes)


def _as_inputs(bs_ris, ris_user, weights):
    G = np.asarray(bs_ris, dtype=complex)
    g = np.atleast_2d(np.asarray(ris_user, dtype=complex))
    mu = np.asarray(weights, dtype=float)
    if G.ndim != 2 or g.shape[1] != G.shape[0] or mu.shape != (g.shape[0],):
        raise DimensionError(
            f"incompatible shapes: G {G.shape}, g {g.shape}, weights {mu.shape}"
        )
    if np.any(mu < 0):
        raise ValueError("adversary weights must be non-negative")
    return G, g, mu


def relaxed_matrix(bs_ris, ris_user, weights, group_sizes=None):
    """Literal relaxed interference matrix built from Kronecker and duplication factors.

    For each group ``S_ig = G_g^T kron g_ig^H`` is multiplied by the
    group's duplication matrix; the blocks are placed side by side and
    the per-user rows are stacked with weights ``sqrt(mu_i)``.  The
    result has ``U*M`` rows and ``sum_g n_g (n_g + 1) / 2`` columns.
    """
    G, g, mu = _as_inputs(bs_ris, ris_user, weights)
    if group_sizes is None:
        group_sizes = (G.shape[0],)
    rows = []
    for i in range(g.shape[0]):
        blocks, start = [], 0
        for n in group_sizes:
            sl = slice(start, start + n)
            S = linalg.kron(G[sl].T, g[i, sl].conj()[None, :])
            dup = linalg.duplication_matrix(n, sparse=True)
            blocks.append(np.asarray((dup.T @ S.T).T))
            start += n
        rows.append(np.sqrt(mu[i]) * np.hstack(blocks))
    return np.vstack(rows)


def _segment_products(L, R, group_sizes):
    """Stack over groups of ``sum_{i in group} L[p, i] R[q, i]`` (shape ``(n_groups, p, q)``)."""
    if len(set(group_sizes)) == 1:
        n = group_sizes[0]
        Lg = L.reshape(L.shape[0], -1, n).transpose(1, 0, 2)
        Rg = R.reshape(R.shape[0], -1, n).transpose(1, 2, 0)
        return Lg @ Rg
    out, start = [], 0
    for n in group_sizes:
        out.append(L[:, start:start + n] @ R[:, start:start + n].T)
        start += n
    return np.stack(out)


def _relaxed_gram(G, g, mu, group_sizes):
    """``J J^H`` for the stacked relaxed matrix without forming ``J``.

    With ``a_u = conj(g_u)`` and ``b_m = G[:, m]`` the entry for rows
    ``(u, m)`` and ``(v, n)`` of a group is::

        (a_u . conj a_v)(b_m . conj b_n) + (a_u . conj b_n)(b_m . conj a_v)
            - sum_i a_ui b_im conj(a_vi b_in)

    where the dot products run over the group's elements.  The last term
    does not depend on the partition.
    """
    a = g.conj()
    U, D = a.shape
    M = G.shape[1]
    ng = len(group_sizes)
    X = _segment_products(a, g, group_sizes).reshape(ng, U * U)
    Y = _segment_products(G.T, G.conj().T, group_sizes).reshape(ng, M * M)
    Z = _segment_products(a, G.conj().T, group_sizes).reshape(ng, U * M)
    K = (X.T @ Y).reshape(U, U, M, M).transpose(0, 2, 1, 3)
    K = K + (Z.T @ Z.conj()).reshape(U, M, U, M).transpose(0, 3, 2, 1)
    P = (a[:, None, :] * G.T[None, :, :]).reshape(U * M, D)
    K = K.reshape(U * M, U * M) - P @ P.conj().T
    w = np.repeat(np.sqrt(mu), M)
    K = w[:, None] * K * w[None, :]
    return (K + K.conj().T) / 2


def _relaxed_solution(G, g, mu, group_sizes):
    """Dominant right singular vector of the relaxed matrix, as per-group symmetric matrices."""
    starts = np.concatenate([[0], np.cumsum(group_sizes)[:-1]]).astype(int)
    K = _relaxed_gram(G, g, mu, group_sizes)
    lam, top = linalg.top_eigenpair(K)
    sigma = np.sqrt(max(lam, 0.0))
    if not sigma > 0:
        raise DegenerateInputError("aligned attack on all-zero interference channels")
    U, M = g.shape[0], G.shape[1]
    c = top.reshape(U, M)
    z = c @ G.conj().T                      # z[u, i] = sum_m conj(G[i, m]) c[u, m]
    ga = np.sqrt(mu)[:, None] * g
    if len(set(group_sizes)) == 1:
        n = group_sizes[0]
        half = np.einsum("ugi,ugj->gij", ga.reshape(U, -1, n), z.reshape(U, -1, n))
        Phi = (half + half.transpose(0, 2, 1)) / sigma
        idx = np.arange(n)
        Phi[:, idx, idx] /= 2
        rows, cols = linalg.vech_indices(n)
        return Phi * linalg.phase_factor(Phi[:, rows, cols].ravel())
    out = []
    for start, n in zip(starts, group_sizes):
        half = ga[:, start:start + n].T @ z[:, start:start + n]
        Phi = (half + half.T) / sigma
        Phi[np.diag_indices(n)] /= 2
        out.append(Phi)
    flat = np.concatenate([linalg.vech(P) for P in out])
    phase = linalg.phase_factor(flat)
    return [P * phase for P in out]


def _explicit_solution(G, g, mu, group_sizes):
    J = relaxed_matrix(G, g, mu, group_sizes)
    phi = linalg.dominant_right_singular_vector(J)
    out, k = [], 0
    for n in group_sizes:
        m = n * (n + 1) // 2
        out.append(linalg.unvec(linalg.duplication_matrix(n) @ phi[k:k + m], (n, n)))
        k += m
    return out


def _aligned_blocks(bs_ris, ris_user, weights, group_sizes, method):
    G, g, mu = _as_inputs(bs_ris, ris_user, weights)
    if sum(group_sizes) != G.shape[0]:
        raise DimensionError("group sizes must sum to the number of elements")
    if method == "structured":
        phis = _relaxed_solution(G, g, mu, tuple(group_sizes))
    elif method == "explicit":
        phis = _explicit_solution(G, g, mu, tuple(group_sizes))
    else:
        raise ValueError(f"unknown method {method!r}")
    if len(set(group_sizes)) == 1:
        return linalg.project_symmetric_unitary_batch(np.asarray(phis))
    return [linalg.project_symmetric_unitary(P) for P in phis]


def aligned_fully_connected(bs_ris, ris_user, weights, method="structured") -> ReflectionConfig:
    """Aligned interference attack for a fully connected surface.

    Parameters
    ----------
    bs_ris : ndarray, shape (D, M)
        Attacker's estimate of the BS-surface channel.
    ris_user : ndarray, shape (U, D)
        Attacker's estimates of the surface-user channels, one per row.
    weights : array_like, shape (U,)
        Non-negative adversarial weights.
    method : {"structured", "explicit"}
        ``"explicit"`` forms the relaxed matrix from Kronecker products and
        the duplication matrix and takes its dominant right singular
        vector.  ``"structured"`` reaches the same vector through the
        closed-form ``UM x UM`` Gram matrix and is much cheaper for large D.
    """
    D = np.asarray(bs_ris).shape[0]
    (theta,) = _aligned_blocks(bs_ris, ris_user, weights, (D,), method)
    return ReflectionConfig("fully", theta, (D,))


def aligned_group_connected(bs_ris, ris_user, group_sizes, weights, method="structured") -> ReflectionConfig:
    """Aligned interference attack for a group-connected surface.

    A single relaxed vector is computed jointly over all groups and then
    split, so the groups share one singular subspace; each block is then
    projected on its own.
    """
    sizes = tuple(int(n) for n in group_sizes)
    blocks = _aligned_blocks(bs_ris, ris_user, weights, sizes, method)
    return ReflectionConfig("group", _block_diag(blocks), sizes)


def single_connected_gram(bs_ris, ris_user, weights):
    """Hermitian PSD ``Q`` with ``sum_i mu_i ||g_i^H diag(t) G||^2 = t^H Q t``."""
    G, g, mu = _as_inputs(bs_ris, ris_user, weights)
    # conj(A_i A_i^H) with A_i = diag(conj g_i) G
    Q = np.einsum("u,ud,ue,dm,em->de", mu, g, g.conj(), G.conj(), G, optimize=True)
    return (Q + Q.conj().T) / 2


def aligned_single_connected(bs_ris, ris_user, weights) -> ReflectionConfig:
    """Eigen-relaxation of the diagonal attack followed by per-entry phase projection."""
    Q = single_connected_gram(bs_ris, ris_user, weights)
    _, v = linalg.top_eigenpair(Q)
    v = linalg.fix_phase(v)
    theta = np.diag(np.exp(1j * np.angle(v)))
    return ReflectionConfig("single", theta, (1,) * theta.shape[0])


def aligned_reflection(architecture, bs_ris, ris_user, weights, group_size=None) -> ReflectionConfig:
    """Dispatch the aligned attack for ``architecture``."""
    D = np.asarray(bs_ris).shape[0]
    if architecture == "fully":
        return aligned_fully_connected(bs_ris, ris_user, weights)
    if architecture == "group":
        return aligned_group_connected(bs_ris, ris_user, group_sizes_for("group", D, group_size), weights)
    if architecture == "single":
        return aligned_single_connected(bs_ris, ris_user, weights)
    raise ValueError(f"unknown architecture {architecture!r}")
