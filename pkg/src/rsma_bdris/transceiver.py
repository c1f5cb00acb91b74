"""Legitimate downlink: RSMA and SDMA precoding, power split and achievable rates.

Channel matrices in this module are ``M x U`` with one column per user,
holding the conjugate effective channel, so user ``u`` receives
``H[:, u]^H x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import reflected_channels
from .errors import ContractViolation, DegenerateInputError, DimensionError

GRID_SIZE = 128
# Smallest non-zero grid point relative to the feasibility bound.
GRID_FLOOR = 1e-8


def effective_channels(direct, bs_ris, ris_user, theta):
    """Rows ``h_u + G^H theta^H g_u`` for every user (shape ``U x M``)."""
    direct = np.asarray(direct)
    theta = np.asarray(theta)
    D = bs_ris.shape[0]
    if theta.shape != (D, D) or ris_user.shape[1] != D or direct.shape[1] != bs_ris.shape[1]:
        raise DimensionError("channel and reflection shapes are incompatible")
    return direct + reflected_channels(bs_ris, ris_user, theta)


def effective_channel(u, channels, theta, estimated=False):
    """Effective channel of user ``u``; ``estimated=True`` uses the attacker-style estimates."""
    if estimated:
        return effective_channels(channels.est_direct, channels.est_bs_ris, channels.est_ris_user, theta)[u]
    return effective_channels(channels.direct, channels.bs_ris, channels.ris_user, theta)[u]


@dataclass(frozen=True)
class PrecoderSet:
    common: np.ndarray
    private: np.ndarray
    alpha_common: float
    alpha_private: float

    def __post_init__(self):
        U = self.private.shape[1]
        if abs(np.linalg.norm(self.common) - 1.0) > 1e-10:
            raise ContractViolation("common precoder must have unit norm")
        if np.any(np.abs(np.linalg.norm(self.private, axis=0) - 1.0) > 1e-10):
            raise ContractViolation("private precoders must have unit norm")
        if self.alpha_common < 0 or self.alpha_private < 0:
            raise ContractViolation("power fractions must be non-negative")
        if abs(self.alpha_common + U * self.alpha_private - 1.0) > 1e-12:
            raise ContractViolation("power fractions must sum to one")

    @property
    def num_users(self) -> int:
        return self.private.shape[1]


@dataclass(frozen=True)
class RateReport:
    common_rate: float
    private_rates: np.ndarray
    common_sinr: np.ndarray
    private_sinr: np.ndarray

    @property
    def sum_rate(self) -> float:
        return float(self.common_rate + np.sum(self.private_rates))

    @property
    def num_users(self) -> int:
        return self.private_rates.shape[0]


def private_precoders(H, P, noise_power):
    """Regularized zero-forcing ``H (H^H H + omega I)^-1`` with ``omega = sigma^2 / P``, columns normalized."""
    H = np.asarray(H)
    M, U = H.shape
    if M < U:
        raise DimensionError(f"RZF needs M >= U, got M={M}, U={U}")
    omega = noise_power / P
    gram = H.conj().T @ H + omega * np.eye(U)
    if omega == 0 and np.linalg.matrix_rank(gram) < U:
        raise DegenerateInputError("zero-forcing with a rank-deficient channel")
    W = np.linalg.solve(gram.T, H.T).T      # H @ inv(gram)
    return W / np.linalg.norm(W, axis=0)


def common_precoder(H):
    """Normalized ``sum_i h_i / ||h_i||^2``, which favors weaker users."""
    H = np.asarray(H)
    norms = np.sum(np.abs(H) ** 2, axis=0)
    if np.any(norms == 0):
        raise DegenerateInputError("common precoder needs non-zero channels")
    w = H @ (1.0 / norms)
    n = np.linalg.norm(w)
    if n == 0:
        raise DegenerateInputError("weighted channel sum vanishes")
    return w / n


def sic_residual(channel, common, P, alpha_common, xi):
    """Residual common-stream power left after imperfect cancellation."""
    return xi * abs(np.vdot(channel, common)) ** 2 * P * alpha_common


def _gains(H, common, private, P):
    """Unscaled received powers: ``cc[u]`` from the common stream, ``pp[u, i]`` from private ``i``."""
    cc = np.abs(H.conj().T @ common) ** 2 * P
    pp = np.abs(H.conj().T @ private) ** 2 * P
    return cc, pp


def _rates(cc, pp, alpha_common, alpha_private, noise_power, xi):
    """Common/private SINRs and rates; ``alpha_*`` may be arrays for a vectorized scan."""
    ac = np.asarray(alpha_common, dtype=float)[..., None]
    ap = np.asarray(alpha_private, dtype=float)[..., None]
    own = np.diag(pp)
    total = pp.sum(axis=1)
    common_sinr = cc * ac / (total * ap + noise_power)
    private_sinr = own * ap / ((total - own) * ap + xi * cc * ac + noise_power)
    common_rate = np.min(np.log2(1.0 + common_sinr), axis=-1)
    private_rates = np.log2(1.0 + private_sinr)
    return common_rate, private_rates, common_sinr, private_sinr


def evaluate_rates(H, precoders: PrecoderSet, P, noise_power, xi) -> RateReport:
    """Achievable rates over the true channels ``H`` with imperfect SIC factor ``xi``."""
    H = np.asarray(H)
    if H.shape != precoders.private.shape:
        raise DimensionError("channel matrix and precoders differ in shape")
    cc, pp = _gains(H, precoders.common, precoders.private, P)
    rc, rp, sc, sp = _rates(cc, pp, precoders.alpha_common, precoders.alpha_private, noise_power, xi)
    return RateReport(float(rc), rp, sc, sp)


def select_reference_user(H, common, private, P, noise_power, xi):
    """User with the largest ``own / (leakage + xi * common + sigma^2)``; ties go to the lowest index."""
    cc, pp = _gains(np.asarray(H), common, private, P)
    own = np.diag(pp)
    leak = pp.sum(axis=1) - own
    return int(np.argmax(own / (leak + xi * cc + noise_power)))


def eta_grid(eta_max, grid_size=GRID_SIZE):
    """Zero followed by ``grid_size - 1`` log-spaced points ending exactly at ``eta_max``."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    t = np.logspace(np.log10(GRID_FLOOR), 0.0, grid_size - 1)
    t[-1] = 1.0
    return np.concatenate([[0.0], eta_max * t])


def allocate_power(H, common, private, P, noise_power, xi, grid_size=GRID_SIZE, return_scan=False):
    """Line search for the common/private power split.

    The private fraction is parametrized by ``eta`` at the reference user:
    ``alpha_p = eta (xi cc + sigma^2) / (leak + xi U cc)``, with ``eta`` in
    ``[0, eta_max]`` so that ``U alpha_p <= 1``.  The surrogate sum rate over
    ``H`` is scanned on :func:`eta_grid` and the first maximizer (the
    smallest ``eta``) is returned.

    Returns ``(alpha_common, alpha_private)``, or with ``return_scan=True``
    a dict that also holds the grid, the surrogate values and the index.
    """
    H = np.asarray(H)
    U = H.shape[1]
    cc, pp = _gains(H, common, private, P)
    ref = select_reference_user(H, common, private, P, noise_power, xi)
    own = np.diag(pp)
    leak = pp.sum(axis=1) - own
    num = xi * cc[ref] + noise_power
    den = leak[ref] + xi * U * cc[ref]
    if not (den > 1e-300 and np.isfinite(den / num)):
        ap, ac = 1.0 / U, 0.0
        if return_scan:
            return {"alpha_common": ac, "alpha_private": ap, "eta": None, "grid": None,
                    "surrogate": None, "index": None, "reference_user": ref}
        return ac, ap
    eta_max = den / (U * num)
    eta = eta_grid(eta_max, grid_size)
    alpha_p = np.minimum(eta * num / den, 1.0 / U)
    alpha_p[-1] = 1.0 / U
    alpha_c = np.maximum(1.0 - U * alpha_p, 0.0)
    rc, rp, _, _ = _rates(cc, pp, alpha_c, alpha_p, noise_power, xi)
    surrogate = rc + rp.sum(axis=-1)
    k = int(np.argmax(surrogate))
    ap = float(alpha_p[k])
    ac = 1.0 - U * ap
    if return_scan:
        return {"alpha_common": ac, "alpha_private": ap, "eta": float(eta[k]), "grid": eta,
                "surrogate": surrogate, "index": k, "reference_user": ref}
    return ac, ap


def rsma_precoders(H_design, P, noise_power, xi, H_allocation=None, grid_size=GRID_SIZE) -> PrecoderSet:
    """RSMA precoders from ``H_design``; the power split is searched over ``H_allocation`` (default ``H_design``)."""
    if H_allocation is None:
        H_allocation = H_design
    w_c = common_precoder(H_design)
    W = private_precoders(H_design, P, noise_power)
    ac, ap = allocate_power(H_allocation, w_c, W, P, noise_power, xi, grid_size)
    return PrecoderSet(w_c, W, ac, ap)


def sdma_precoders(H_design, P, noise_power) -> PrecoderSet:
    """RZF privates with uniform power and no common stream."""
    H_design = np.asarray(H_design)
    U = H_design.shape[1]
    W = private_precoders(H_design, P, noise_power)
    return PrecoderSet(common_precoder(H_design), W, 0.0, 1.0 / U)


def sdma_rates(H_true, H_design, P, noise_power) -> RateReport:
    """SDMA rates: no common message, so no SIC and ``R^c = 0``."""
    return evaluate_rates(H_true, sdma_precoders(H_design, P, noise_power), P, noise_power, 0.0)
