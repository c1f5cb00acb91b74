"""Self-contained invariant checks run by ``--verify``."""
from __future__ import annotations

import numpy as np

from . import attack, linalg, transceiver
from .channel import Scenario
from .metrics import robustness_index
from .sim import ExperimentSpec, run_trial


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def check_takagi(rng):
    for n in (1, 2, 3, 8, 32):
        S = linalg.symmetrize(_cn(rng, (n, n)))
        dec = linalg.takagi(S)
        assert np.linalg.norm(dec.reconstruct() - S) <= 1e-9 * np.linalg.norm(S)
        assert np.linalg.norm(dec.vectors.conj().T @ dec.vectors - np.eye(n)) < 1e-10
        assert np.all(np.diff(dec.values) <= 0) and np.all(dec.values >= 0)


def check_projection(rng):
    for n in (1, 4, 16):
        T = linalg.project_symmetric_unitary(linalg.symmetrize(_cn(rng, (n, n))))
        assert np.linalg.norm(T - T.T) < 1e-10
        assert np.linalg.norm(T @ T.conj().T - np.eye(n)) < 1e-10


def check_duplication(rng):
    for n in (1, 2, 5, 9):
        D = linalg.duplication_matrix(n)
        S = linalg.symmetrize(_cn(rng, (n, n)))
        assert np.array_equal(linalg.vec(S), D @ linalg.vech(S))
        assert D.sum() == n * n


def check_attack_constraints(rng):
    mu = np.full(3, 1 / 3)
    for D, Dg in ((1, 1), (2, 1), (5, 5), (16, 4)):
        G, g = _cn(rng, (D, 4)), _cn(rng, (3, D))
        for arch in attack.ARCHITECTURES:
            attack.validate_reflection(attack.random_reflection(arch, D, rng, Dg))
            attack.validate_reflection(attack.aligned_reflection(arch, G, g, mu, Dg))


def check_relaxation_paths(rng):
    G, g, mu = _cn(rng, (8, 4)), _cn(rng, (3, 8)), np.array([0.2, 0.3, 0.5])
    for sizes in ((8,), (2, 2, 2, 2)):
        a = attack.aligned_group_connected(G, g, sizes, mu)
        b = attack.aligned_group_connected(G, g, sizes, mu, method="explicit")
        assert np.allclose(a.theta, b.theta, atol=1e-9)


def check_power_budget(rng):
    H = _cn(rng, (8, 3)) * 1e-2
    w_c = transceiver.common_precoder(H)
    W = transceiver.private_precoders(H, 1.0, 1e-6)
    for xi in (0.0, 1e-3):
        ac, ap = transceiver.allocate_power(H, w_c, W, 1.0, 1e-6, xi)
        assert abs(ac + 3 * ap - 1.0) <= 1e-12 and ac >= 0 and ap >= 0
        rep = transceiver.evaluate_rates(H, transceiver.PrecoderSet(w_c, W, ac, ap), 1.0, 1e-6, xi)
        assert abs(rep.sum_rate - rep.common_rate - rep.private_rates.sum()) <= 1e-12


def check_metrics(rng):
    H = _cn(rng, (8, 3))
    rep = transceiver.sdma_rates(H, H, 1.0, 1e-3)
    assert robustness_index(rep, rep) == 1.0


def check_determinism(rng):
    sc = Scenario(num_antennas=4, num_elements=8, group_size=2)
    spec = ExperimentSpec(sc, attack="aligned", architecture="group", trials=1, seed=7)
    a, b = run_trial(spec, 3), run_trial(spec, 3)
    for s in spec.schemes:
        assert a[s].attacked_report.sum_rate == b[s].attacked_report.sum_rate
        assert np.array_equal(a[s].per_user_degradation, b[s].per_user_degradation)


SUITES = (
    ("takagi", check_takagi),
    ("symmetric-unitary projection", check_projection),
    ("duplication matrix", check_duplication),
    ("attack constraints", check_attack_constraints),
    ("relaxation paths agree", check_relaxation_paths),
    ("power budget", check_power_budget),
    ("robustness metrics", check_metrics),
    ("trial determinism", check_determinism),
)


def run_checks(seed=0, out=print) -> bool:
    """Run every suite and report one line each; True when all pass."""
    ok = True
    for name, fn in SUITES:
        try:
            fn(np.random.default_rng(seed))
            out(f"PASS {name}")
        except Exception as exc:  # report and keep going
            ok = False
            out(f"FAIL {name}: {exc!r}")
    return ok
