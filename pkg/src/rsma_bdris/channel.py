"""Scenario geometry, Rayleigh channel draws and imperfect channel estimates.

Channels are stored per user as rows: ``direct[u]`` is the M-vector
``h_u`` and ``ris_user[u]`` the D-vector ``g_u``.  The user-side
effective (conjugate) channel through a reflection ``theta`` is
``h_u + G^H theta^H g_u``, i.e. the conjugate of ``h_u^H + g_u^H theta G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionError

UPLINK_MODES = {"absorb": 0, "reflect": 1}


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


@dataclass(frozen=True)
class Scenario:
    """Physical and protocol parameters of the downlink.

    Defaults reproduce the reference deployment: 32 BS antennas, a
    200-element surface in groups of 5, and three users.  Distances are
    in meters, azimuths in degrees, powers in dBm.  ``adversary_weights``
    of ``None`` means uniform weights.
    """

    num_antennas: int = 32
    num_elements: int = 200
    group_size: int = 5
    num_users: int = 3
    user_distances: tuple = (30.0, 50.0, 60.0)
    user_azimuths: tuple = (25.0, 15.0, 10.0)
    ris_distance: float = 40.0
    ris_azimuth: float = 5.0
    pathloss_exponent: float = 3.0
    csi_error_bs_user: float = 0.3
    csi_error_bs_ris: float = 0.3
    csi_error_ris_user: float = 0.3
    sic_error: float = 0.0
    noise_power_dbm: float = -60.0
    transmit_power_dbm: float = 30.0
    uplink_mode: str = "reflect"
    adversary_weights: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "user_distances", tuple(float(x) for x in self.user_distances))
        object.__setattr__(self, "user_azimuths", tuple(float(x) for x in self.user_azimuths))
        if self.adversary_weights is not None:
            object.__setattr__(self, "adversary_weights", tuple(float(x) for x in self.adversary_weights))
        for name in ("num_antennas", "num_elements", "group_size", "num_users"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.num_antennas < self.num_users:
            raise ConfigError(f"M ≥ U violated (M={self.num_antennas}, U={self.num_users})")
        U = self.num_users
        if len(self.user_distances) != U or len(self.user_azimuths) != U:
            raise ConfigError(f"user_distances and user_azimuths need {U} entries each")
        if min(self.user_distances) <= 0 or self.ris_distance <= 0:
            raise ConfigError("distances must be positive")
        for name in ("csi_error_bs_user", "csi_error_bs_ris", "csi_error_ris_user", "sic_error"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.uplink_mode not in UPLINK_MODES:
            raise ConfigError(f"uplink_mode must be 'absorb' or 'reflect', got {self.uplink_mode!r}")
        if self.adversary_weights is not None:
            mu = np.asarray(self.adversary_weights)
            if mu.size != U or np.any(mu <= 0) or abs(mu.sum() - 1.0) > 1e-9:
                raise ConfigError(f"adversary_weights need {U} positive entries summing to 1")

    @property
    def psi(self) -> int:
        return UPLINK_MODES[self.uplink_mode]

    @property
    def weights(self) -> np.ndarray:
        if self.adversary_weights is None:
            return np.full(self.num_users, 1.0 / self.num_users)
        return np.asarray(self.adversary_weights)

    @property
    def noise_power(self) -> float:
        return float(dbm_to_mw(self.noise_power_dbm))

    @property
    def transmit_power(self) -> float:
        return float(dbm_to_mw(self.transmit_power_dbm))

    @property
    def direct_variances(self) -> np.ndarray:
        return np.asarray(self.user_distances) ** -self.pathloss_exponent

    @property
    def bs_ris_variance(self) -> float:
        return self.ris_distance ** -self.pathloss_exponent

    @property
    def ris_user_variances(self) -> np.ndarray:
        return np.array([ris_user_distance(self, u) for u in range(self.num_users)]) ** -self.pathloss_exponent

    def with_csi_error(self, eps):
        return replace(self, csi_error_bs_user=eps, csi_error_bs_ris=eps, csi_error_ris_user=eps)


def ris_user_distance(scenario: Scenario, u: int) -> float:
    """Law-of-cosines distance between the surface and user ``u``."""
    d_r, d_u = scenario.ris_distance, scenario.user_distances[u]
    dtheta = math.radians(scenario.ris_azimuth - scenario.user_azimuths[u])
    sq = d_r**2 + d_u**2 - 2.0 * d_r * d_u * math.cos(dtheta)
    return math.sqrt(max(sq, 0.0))


@dataclass(frozen=True)
class ChannelSet:
    """True channels of one realization and, once estimated, their estimates.

    ``pilot_direct`` is the noiseless uplink observation
    ``h_u + psi G^H theta_train^H g_u``; the estimate ``est_direct`` is a
    noisy version of it.
    """

    direct: np.ndarray
    bs_ris: np.ndarray
    ris_user: np.ndarray
    est_direct: Optional[np.ndarray] = None
    est_bs_ris: Optional[np.ndarray] = None
    est_ris_user: Optional[np.ndarray] = None
    pilot_direct: Optional[np.ndarray] = None
    training_reflection: Optional[np.ndarray] = None
    psi: int = field(default=0)

    @property
    def num_users(self) -> int:
        return self.direct.shape[0]

    @property
    def has_estimates(self) -> bool:
        return self.est_direct is not None


def complex_gaussian(rng, shape, variance):
    """Circularly-symmetric complex Gaussian samples with the given per-entry variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_channels(scenario: Scenario, rng) -> ChannelSet:
    """Draw Rayleigh-faded ``h_u``, ``G`` and ``g_u`` with power-law path loss."""
    U, M, D = scenario.num_users, scenario.num_antennas, scenario.num_elements
    h = complex_gaussian(rng, (U, M), scenario.direct_variances[:, None])
    G = complex_gaussian(rng, (D, M), scenario.bs_ris_variance)
    g = complex_gaussian(rng, (U, D), scenario.ris_user_variances[:, None])
    return ChannelSet(direct=h, bs_ris=G, ris_user=g)


def reflected_channels(bs_ris, ris_user, theta):
    """Rows ``G^H theta^H g_u``: the surface contribution to each user's channel."""
    return (ris_user.conj() @ theta @ bs_ris).conj()


def estimate_channels(true: ChannelSet, scenario: Scenario, rng, training_reflection,
                      attacker_rng=None, psi=None) -> ChannelSet:
    """Attach BS-side and attacker-side estimates to ``true``.

    The BS observes ``h_u`` plus, when the surface reflects during
    training (``psi = 1``), the path through ``training_reflection``.
    Each estimate mixes the true quantity with an independent error
    whose per-entry variance equals that of the quantity itself::

        est = sqrt(1 - eps) * x + sqrt(eps) * e,   var(e) = var(x)

    so ``eps`` is the fraction of channel power replaced by noise.  For
    the direct estimate the reference variance is
    ``d_u^-eta + psi * D * var(G) * var(g_u)``.

    Parameters
    ----------
    rng : numpy.random.Generator
        Stream for the BS-side error vectors.
    attacker_rng : numpy.random.Generator, optional
        Stream for the attacker's errors on ``G`` and ``g_u``.  Defaults
        to ``rng``.
    psi : {0, 1}, optional
        Overrides ``scenario.psi``.  Reusing the same streams with a
        different ``psi`` keeps the error draws identical.
    """
    if attacker_rng is None:
        attacker_rng = rng
    psi = scenario.psi if psi is None else int(psi)
    D = scenario.num_elements
    theta = np.asarray(training_reflection)
    if theta.shape != (D, D):
        raise DimensionError(f"training reflection must be {D}x{D}, got {theta.shape}")
    U, M = true.direct.shape
    pilot = true.direct.copy()
    if psi:
        pilot = pilot + reflected_channels(true.bs_ris, true.ris_user, theta)
    ref_var = scenario.direct_variances + psi * D * scenario.bs_ris_variance * scenario.ris_user_variances

    e_h = complex_gaussian(rng, (U, M), ref_var[:, None])
    e_G = complex_gaussian(attacker_rng, (D, M), scenario.bs_ris_variance)
    e_g = complex_gaussian(attacker_rng, (U, D), scenario.ris_user_variances[:, None])

    def mix(x, e, eps):
        if eps == 0.0:
            return x.copy()
        return math.sqrt(1.0 - eps) * x + math.sqrt(eps) * e

    return replace(
        true,
        est_direct=mix(pilot, e_h, scenario.csi_error_bs_user),
        est_bs_ris=mix(true.bs_ris, e_G, scenario.csi_error_bs_ris),
        est_ris_user=mix(true.ris_user, e_g, scenario.csi_error_ris_user),
        pilot_direct=pilot,
        training_reflection=theta,
        psi=psi,
    )
