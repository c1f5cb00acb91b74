import io

import numpy as np
import pytest

from rsma_bdris import sim
from rsma_bdris.channel import Scenario
from rsma_bdris.errors import ConfigError, TrialFailure
from rsma_bdris.rng import label_key, stream
from rsma_bdris.sim import (ExperimentSpec, aggregate, collect, csv_header, realize, resolve_workers,
                            run_sweep, run_trial, write_csv)

SMALL = Scenario(num_antennas=8, num_elements=20, group_size=5)


def spec(**kw):
    base = dict(scenario=SMALL, trials=8, seed=3)
    base.update(kw)
    return ExperimentSpec(**base)


def csv_text(rows):
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


# --- random streams -------------------------------------------------------------------

def test_streams_are_reproducible_and_distinct():
    a = stream(1, 5, "channels").standard_normal(4)
    assert np.array_equal(a, stream(1, 5, "channels").standard_normal(4))
    assert not np.array_equal(a, stream(1, 6, "channels").standard_normal(4))
    assert not np.array_equal(a, stream(2, 5, "channels").standard_normal(4))
    assert not np.array_equal(a, stream(1, 5, "bs_error").standard_normal(4))
    assert label_key("channels") != label_key("bs_error")


# --- spec validation -------------------------------------------------------------------

@pytest.mark.parametrize("kw", [
    dict(schemes=("noma",)), dict(attack="loud"), dict(architecture="mesh"), dict(trials=0),
    dict(seed=-1), dict(sweep_axis="wavelength", sweep_values=(1,)), dict(sweep_axis="num_elements"),
    dict(sweep_axis="transmit_power_dbm", sweep_values=(30, 20)), dict(safe_mode="off"),
    dict(architecture="group", sweep_axis="num_elements", sweep_values=(20, 22)),
])
def test_spec_rejects(kw):
    with pytest.raises(ConfigError):
        spec(**kw)


def test_resolve_workers(monkeypatch):
    assert resolve_workers(3) == 3
    monkeypatch.setenv("SIM_THREADS", "2")
    assert resolve_workers() == 2
    monkeypatch.setenv("SIM_THREADS", "0")
    assert resolve_workers() >= 1
    monkeypatch.setenv("SIM_THREADS", "lots")
    with pytest.raises(ConfigError):
        resolve_workers()


# --- trials --------------------------------------------------------------------------------

def test_no_attack_is_lossless():
    rows = run_sweep(spec(attack="none"), workers=1)
    for r in rows:
        assert r.mean_robustness == 1.0 and r.mean_degradation == 0.0
        assert r.mean_sum_rate == r.mean_safe_sum_rate


@pytest.mark.parametrize("attack", ["random", "aligned"])
@pytest.mark.parametrize("arch", ["single", "group", "fully"])
def test_trial_outputs_are_sane(attack, arch):
    res = run_trial(spec(attack=attack, architecture=arch), 0)
    for scheme in ("rsma", "sdma"):
        rep = res[scheme]
        assert 0.0 <= rep.robustness_index <= 1.0
        assert rep.attacked_report.sum_rate >= 0
        assert np.all(np.isfinite(rep.per_user_degradation))
    assert res["sdma"].attacked_report.common_rate == 0.0


def test_safe_and_attacked_share_error_draws():
    real = realize(spec(), SMALL, 4)
    assert np.array_equal(real.safe.est_bs_ris, real.attacked.est_bs_ris)
    assert np.array_equal(real.safe.est_ris_user, real.attacked.est_ris_user)
    # static surface: the safe run keeps the training reflection
    assert np.array_equal(real.safe_reflection, real.attacked.training_reflection)
    assert np.array_equal(real.safe.est_direct, real.attacked.est_direct)


def test_no_ris_baseline():
    real = realize(spec(safe_mode="no-ris"), SMALL, 4)
    assert np.count_nonzero(real.safe_reflection) == 0
    assert real.safe.psi == 0 and real.attacked.psi == 1


def test_trial_failure_carries_index(monkeypatch):
    def boom(*a, **k):
        raise FloatingPointError("bad draw")
    monkeypatch.setattr(sim, "evaluate", boom)
    with pytest.raises(TrialFailure) as exc:
        run_trial(spec(), 6)
    assert exc.value.trial_index == 6
    with pytest.raises(TrialFailure):
        collect(spec(), workers=1)


# --- sweeps and aggregation ----------------------------------------------------------

def test_single_point_sweep():
    rows = run_sweep(spec(), workers=1)
    assert [(r.sweep_axis, r.scheme) for r in rows] == [("transmit_power_dbm", "rsma"),
                                                         ("transmit_power_dbm", "sdma")]
    assert rows[0].sweep_value == SMALL.transmit_power_dbm


def test_rows_in_sweep_order():
    s = spec(sweep_axis="num_elements", sweep_values=(10, 20), trials=3)
    rows = run_sweep(s, workers=1)
    assert [(r.sweep_value, r.scheme) for r in rows] == [(10, "rsma"), (10, "sdma"), (20, "rsma"), (20, "sdma")]


def test_rerun_is_bit_identical():
    s = spec(sweep_axis="transmit_power_dbm", sweep_values=(0, 20, 40))
    assert csv_text(run_sweep(s, workers=1)) == csv_text(run_sweep(s, workers=1))


def test_parallel_equals_serial():
    s = spec(trials=9, attack="random")
    serial = collect(s, workers=1, chunk_size=2)
    parallel = collect(s, workers=2, chunk_size=2)
    assert np.array_equal(serial, parallel)
    assert np.array_equal(serial, collect(s, workers=1, chunk_size=9))


def test_prefix_property():
    # more trials only append new per-trial results
    short = collect(spec(trials=4), workers=1)
    long = collect(spec(trials=7), workers=1)
    assert np.array_equal(long[:4], short)


def test_evaluation_axis_matches_pointwise_runs():
    s = spec(sweep_axis="sic_error", sweep_values=(0.0, 1e-3), trials=3, schemes=("rsma",))
    swept = collect(s, workers=1)
    for v, xi in enumerate(s.sweep_values):
        sc = s.scenario_at(xi)
        for t in range(3):
            rep = run_trial(s, t, sc)["rsma"]
            assert rep.attacked_report.sum_rate == swept[t, v, 0, 0]


def test_rate_grows_with_power_without_attack():
    s = spec(attack="none", trials=20, sweep_axis="transmit_power_dbm", sweep_values=(0, 10, 20, 30, 40))
    rows = run_sweep(s, workers=1)
    for scheme in ("rsma", "sdma"):
        rates = [r.mean_sum_rate for r in rows if r.scheme == scheme]
        assert np.all(np.diff(rates) > 0)


def test_aggregate_means_and_errors():
    s = spec(trials=6)
    data = collect(s, workers=1)
    rows = aggregate(s, data)
    r = rows[1]
    assert r.mean_sum_rate == pytest.approx(data[:, 0, 1, 0].mean())
    assert r.sem_sum_rate == pytest.approx(data[:, 0, 1, 0].std(ddof=1) / np.sqrt(6))
    assert r.mean_robustness == pytest.approx(data[:, 0, 1, 3].mean())
    assert len(r.mean_private_rates) == 3


def test_mean_converges():
    s = spec(trials=160, attack="random", schemes=("sdma",))
    data = collect(s, workers=1)[:, 0, 0, 0]
    half = data[:80]
    sem = data.std(ddof=1) / np.sqrt(80)
    assert abs(half.mean() - data.mean()) < 4 * sem


# --- CSV ------------------------------------------------------------------------------------

def test_csv_layout():
    rows = run_sweep(spec(trials=2), workers=1)
    lines = csv_text(rows).splitlines()
    assert lines[0] == ",".join(csv_header(3))
    assert lines[0] == ("sweep_axis,sweep_value,scheme,attack,arch,mode,trials,seed,mean_sum_rate,"
                        "mean_common_rate,mean_private_rate_1,mean_private_rate_2,mean_private_rate_3,"
                        "mean_degradation,mean_robustness")
    assert len(lines) == 3
    fields = lines[1].split(",")
    assert fields[2:8] == ["rsma", "aligned", "fully", "reflect", "2", "3"]
    assert float(fields[8]) == pytest.approx(rows[0].mean_sum_rate, rel=1e-8)
    assert len(fields[8].replace(".", "").lstrip("0")) <= 9


def test_row_rates_add_up():
    for r in run_sweep(spec(trials=5, attack="random"), workers=1):
        assert abs(r.mean_sum_rate - r.mean_common_rate - sum(r.mean_private_rates)) < 1e-9
