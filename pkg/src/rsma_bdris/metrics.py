"""Rate degradation and robustness index from paired safe/attacked rate reports."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UndefinedBaselineError
from .transceiver import RateReport


def _check(safe: RateReport, attacked: RateReport):
    if safe.num_users != attacked.num_users:
        raise DimensionError("safe and attacked reports have different user counts")
    return safe.num_users


def rate_degradation(safe: RateReport, attacked: RateReport) -> np.ndarray:
    """Per-user loss ``(Rp_safe - Rp_att) + (Rc_safe - Rc_att) / U``."""
    U = _check(safe, attacked)
    return (safe.private_rates - attacked.private_rates) + (safe.common_rate - attacked.common_rate) / U


def robustness_index(safe: RateReport, attacked: RateReport) -> float:
    """Mean retained fraction of each user's safe rate, clamped to ``[0, 1]``.

    Raises
    ------
    UndefinedBaselineError
        If some user's safe rate (private plus common share) is zero.
    """
    U = _check(safe, attacked)
    baseline = safe.common_rate / U + safe.private_rates
    if np.any(baseline <= 0):
        raise UndefinedBaselineError("robustness index undefined for a zero safe rate")
    kappa = float(np.mean(1.0 - rate_degradation(safe, attacked) / baseline))
    return min(max(kappa, 0.0), 1.0)


@dataclass(frozen=True)
class RobustnessReport:
    per_user_degradation: np.ndarray
    robustness_index: float
    safe_report: RateReport
    attacked_report: RateReport

    @property
    def total_degradation(self) -> float:
        return float(np.sum(self.per_user_degradation))


def robustness_report(safe: RateReport, attacked: RateReport) -> RobustnessReport:
    return RobustnessReport(rate_degradation(safe, attacked), robustness_index(safe, attacked), safe, attacked)
