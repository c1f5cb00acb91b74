"""Monte-Carlo trial engine, parameter sweeps and CSV output.

A trial draws one channel realization, runs the training phase with a
benign random reflection, lets the BS design its transmission from the
resulting estimates, lets the adversary reconfigure the surface for the
data phase, and evaluates both the safe and the attacked rates on the
same realization.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import rng as rng_mod
from .attack import aligned_reflection, group_sizes_for, random_reflection
from .channel import ChannelSet, Scenario, estimate_channels, sample_channels
from .errors import ConfigError, TrialFailure
from .metrics import RobustnessReport, robustness_report
from .transceiver import (GRID_SIZE, RateReport, effective_channels, evaluate_rates,
                          rsma_precoders, sdma_rates)

SCHEMES = ("rsma", "sdma")
ATTACKS = ("none", "random", "aligned")
SAFE_MODES = ("static-ris", "no-ris")
ALLOCATION_CSI = ("pilot", "estimate")
SWEEP_AXES = ("transmit_power_dbm", "num_elements", "group_size", "csi_error",
              "csi_error_bs_user", "sic_error")
# Axes that leave the channel realization and the reflections unchanged.
EVALUATION_AXES = ("transmit_power_dbm", "sic_error")


@dataclass(frozen=True)
class ExperimentSpec:
    """What to simulate: scenario, schemes, attack, architecture, trials and sweep.

    ``safe_mode`` selects the no-attack reference: ``"static-ris"`` keeps
    the training reflection during data transmission, ``"no-ris"`` removes
    the surface.  ``allocation_csi`` selects the channels used by the
    RSMA power-split search: the noiseless pilot observation (``"pilot"``)
    or the noisy estimate the precoders are built from (``"estimate"``).
    """

    scenario: Scenario = field(default_factory=Scenario)
    schemes: tuple = SCHEMES
    attack: str = "aligned"
    architecture: str = "fully"
    trials: int = 1000
    seed: int = 0
    sweep_axis: Optional[str] = None
    sweep_values: tuple = ()
    safe_mode: str = "static-ris"
    allocation_csi: str = "pilot"
    grid_size: int = GRID_SIZE

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be drawn from {SCHEMES}")
        if self.attack not in ATTACKS:
            raise ConfigError(f"attack must be one of {ATTACKS}")
        if self.architecture not in ("single", "group", "fully"):
            raise ConfigError("architecture must be single, group or fully")
        if self.safe_mode not in SAFE_MODES:
            raise ConfigError(f"safe_mode must be one of {SAFE_MODES}")
        if self.allocation_csi not in ALLOCATION_CSI:
            raise ConfigError(f"allocation_csi must be one of {ALLOCATION_CSI}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ConfigError("sweep value list is empty")
            if list(self.sweep_values) != sorted(self.sweep_values):
                raise ConfigError("sweep values must be sorted")
        for sc in self.scenarios():
            if self.architecture == "group" and sc.num_elements % sc.group_size:
                raise ConfigError(
                    f"D divisible by D_g violated (D={sc.num_elements}, D_g={sc.group_size})")

    @property
    def mode(self) -> str:
        return self.scenario.uplink_mode

    @property
    def axis(self) -> str:
        return self.sweep_axis or "transmit_power_dbm"

    @property
    def values(self) -> tuple:
        if self.sweep_axis is None:
            return (self.scenario.transmit_power_dbm,)
        return self.sweep_values

    def scenario_at(self, value) -> Scenario:
        return apply_axis(self.scenario, self.axis, value)

    def scenarios(self):
        return [self.scenario_at(v) for v in self.values]


def apply_axis(scenario: Scenario, axis: str, value) -> Scenario:
    if axis in ("num_elements", "group_size"):
        return replace(scenario, **{axis: int(value)})
    if axis == "csi_error":
        return scenario.with_csi_error(float(value))
    return replace(scenario, **{axis: float(value)})


@dataclass(frozen=True)
class Realization:
    """Channel draw plus the reflections and estimates of the safe and attacked runs."""

    channels: ChannelSet
    safe: ChannelSet
    attacked: ChannelSet
    safe_reflection: np.ndarray
    attack_reflection: np.ndarray
    attack_active: bool


def realize(spec: ExperimentSpec, scenario: Scenario, trial_index: int) -> Realization:
    seed = spec.seed

    def s(label):
        return rng_mod.stream(seed, trial_index, label)

    arch, D, Dg = spec.architecture, scenario.num_elements, scenario.group_size
    true = sample_channels(scenario, s("channels"))
    train = random_reflection(arch, D, s("train_reflection"), Dg).theta
    if spec.safe_mode == "static-ris":
        safe_theta, safe_psi = train, 1
    else:
        safe_theta, safe_psi = np.zeros((D, D), dtype=complex), 0
    # same streams, so both estimates share their error draws
    safe = estimate_channels(true, scenario, s("bs_error"), safe_theta, s("attacker_error"), psi=safe_psi)
    if spec.attack == "none":
        return Realization(true, safe, safe, safe_theta, safe_theta, False)
    attacked = estimate_channels(true, scenario, s("bs_error"), train, s("attacker_error"))
    if spec.attack == "random":
        theta = random_reflection(arch, D, s("random_attack"), Dg).theta
    else:
        theta = aligned_reflection(arch, attacked.est_bs_ris, attacked.est_ris_user, scenario.weights, Dg).theta
    return Realization(true, safe, attacked, safe_theta, theta, True)


def _phase_rates(spec, est: ChannelSet, true: ChannelSet, theta, P, noise, xi):
    H_true = effective_channels(true.direct, true.bs_ris, true.ris_user, theta).T
    H_est = est.est_direct.T
    out = {}
    if "rsma" in spec.schemes:
        H_alloc = est.pilot_direct.T if spec.allocation_csi == "pilot" else H_est
        prec = rsma_precoders(H_est, P, noise, xi, H_alloc, spec.grid_size)
        out["rsma"] = evaluate_rates(H_true, prec, P, noise, xi)
    if "sdma" in spec.schemes:
        out["sdma"] = sdma_rates(H_true, H_est, P, noise)
    return out


def evaluate(spec: ExperimentSpec, scenario: Scenario, real: Realization) -> dict:
    """Safe and attacked rate reports per scheme, keyed by scheme name."""
    P, noise, xi = scenario.transmit_power, scenario.noise_power, scenario.sic_error
    safe = _phase_rates(spec, real.safe, real.channels, real.safe_reflection, P, noise, xi)
    if real.attack_active:
        attacked = _phase_rates(spec, real.attacked, real.channels, real.attack_reflection, P, noise, xi)
    else:
        attacked = safe
    return {k: robustness_report(safe[k], attacked[k]) for k in spec.schemes}


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    outcomes: dict

    def __getitem__(self, scheme) -> RobustnessReport:
        return self.outcomes[scheme]


def run_trial(spec: ExperimentSpec, trial_index: int, scenario: Optional[Scenario] = None) -> TrialResult:
    """One paired safe/attacked trial at ``scenario`` (default: the experiment's own)."""
    scenario = spec.scenario if scenario is None else scenario
    try:
        real = realize(spec, scenario, trial_index)
        return TrialResult(trial_index, evaluate(spec, scenario, real))
    except Exception as exc:
        raise TrialFailure(trial_index, exc) from exc


# Per-trial summary layout, after the per-user private rates.
SUMMARY_FIELDS = ("sum_rate", "common_rate", "degradation", "robustness", "safe_sum_rate")


def _summary(rep: RobustnessReport) -> np.ndarray:
    att: RateReport = rep.attacked_report
    return np.concatenate([
        [att.sum_rate, att.common_rate, rep.total_degradation, rep.robustness_index,
         rep.safe_report.sum_rate],
        att.private_rates,
    ])


def _trial_block(spec: ExperimentSpec, indices) -> np.ndarray:
    """Summaries with shape ``(len(indices), n_values, n_schemes, 5 + U)``."""
    scenarios = spec.scenarios()
    reuse = spec.axis in EVALUATION_AXES
    out = np.empty((len(indices), len(scenarios), len(spec.schemes), 5 + spec.scenario.num_users))
    for r, t in enumerate(indices):
        try:
            real = realize(spec, scenarios[0], t) if reuse else None
            for v, sc in enumerate(scenarios):
                res = evaluate(spec, sc, real if reuse else realize(spec, sc, t))
                for k, scheme in enumerate(spec.schemes):
                    out[r, v, k] = _summary(res[scheme])
        except Exception as exc:
            raise TrialFailure(t, exc) from exc
    return out


def resolve_workers(workers=None) -> int:
    """Worker count: explicit argument, else ``SIM_THREADS`` (0 or unset means all CPUs)."""
    if workers is None:
        try:
            workers = int(os.environ.get("SIM_THREADS", "0"))
        except ValueError:
            raise ConfigError("SIM_THREADS must be an integer")
    if workers < 0:
        raise ConfigError("worker count must be >= 0")
    return workers if workers > 0 else (os.cpu_count() or 1)


def collect(spec: ExperimentSpec, workers=None, chunk_size=25) -> np.ndarray:
    """Raw per-trial summaries for every sweep value and scheme, in trial order."""
    n = resolve_workers(workers)
    chunks = [range(i, min(i + chunk_size, spec.trials)) for i in range(0, spec.trials, chunk_size)]
    if n <= 1 or len(chunks) == 1:
        parts = [_trial_block(spec, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(chunks))) as pool:
            parts = list(pool.map(_trial_block, [spec] * len(chunks), chunks))
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class SweepRow:
    sweep_axis: str
    sweep_value: float
    scheme: str
    attack: str
    architecture: str
    mode: str
    trials: int
    seed: int
    mean_sum_rate: float
    mean_common_rate: float
    mean_private_rates: tuple
    mean_degradation: float
    mean_robustness: float
    sem_sum_rate: float = 0.0
    sem_robustness: float = 0.0
    mean_safe_sum_rate: float = 0.0


def aggregate(spec: ExperimentSpec, data: np.ndarray) -> list:
    rows = []
    T = data.shape[0]
    for v, value in enumerate(spec.values):
        for k, scheme in enumerate(spec.schemes):
            block = data[:, v, k]
            mean = block.mean(axis=0)
            sem = block.std(axis=0, ddof=1) / np.sqrt(T) if T > 1 else np.zeros_like(mean)
            rows.append(SweepRow(
                sweep_axis=spec.axis, sweep_value=value, scheme=scheme, attack=spec.attack,
                architecture=spec.architecture, mode=spec.mode, trials=T, seed=spec.seed,
                mean_sum_rate=float(mean[0]), mean_common_rate=float(mean[1]),
                mean_private_rates=tuple(float(x) for x in mean[5:]),
                mean_degradation=float(mean[2]), mean_robustness=float(mean[3]),
                sem_sum_rate=float(sem[0]), sem_robustness=float(sem[3]),
                mean_safe_sum_rate=float(mean[4]),
            ))
    return rows


def run_sweep(spec: ExperimentSpec, workers=None) -> list:
    """Aggregate ``spec.trials`` trials at every sweep value; rows in sweep order, schemes inner."""
    return aggregate(spec, collect(spec, workers))


def csv_header(num_users: int) -> list:
    return (["sweep_axis", "sweep_value", "scheme", "attack", "arch", "mode", "trials", "seed",
             "mean_sum_rate", "mean_common_rate"]
            + [f"mean_private_rate_{u + 1}" for u in range(num_users)]
            + ["mean_degradation", "mean_robustness"])


def _fmt(x) -> str:
    return f"{x:.9g}"


def write_csv(rows, stream):
    """Write sweep rows to an open text stream."""
    U = len(rows[0].mean_private_rates) if rows else 0
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(csv_header(U))
    for r in rows:
        w.writerow([r.sweep_axis, _fmt(r.sweep_value), r.scheme, r.attack, r.architecture, r.mode,
                    r.trials, r.seed, _fmt(r.mean_sum_rate), _fmt(r.mean_common_rate)]
                   + [_fmt(x) for x in r.mean_private_rates]
                   + [_fmt(r.mean_degradation), _fmt(r.mean_robustness)])
