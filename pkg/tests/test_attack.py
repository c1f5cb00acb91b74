import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rsma_bdris import linalg
from rsma_bdris.attack import (ReflectionConfig, aligned_fully_connected, aligned_group_connected,
                               aligned_reflection, aligned_single_connected, attack_objective,
                               group_sizes_for, random_reflection, relaxed_matrix,
                               single_connected_gram, validate_reflection)
from rsma_bdris.errors import ContractViolation, DegenerateInputError, DimensionError

UNIFORM = np.full(3, 1 / 3)


def cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def instance(rng, M=8, D=16, U=3):
    return cn(rng, (D, M)), cn(rng, (U, D))


# --- validator and random generator ---------------------------------------------

@pytest.mark.parametrize("arch", ["single", "group", "fully"])
def test_random_reflection_is_valid(arch):
    rng = np.random.default_rng(0)
    cfg = random_reflection(arch, 16, rng, 4)
    assert validate_reflection(cfg) is cfg
    assert cfg.dim == 16


def test_random_group_structure():
    cfg = random_reflection("group", 4, np.random.default_rng(1), 2)
    assert np.all(cfg.theta[:2, 2:] == 0) and np.all(cfg.theta[2:, :2] == 0)
    for block in cfg.blocks():
        assert block.shape == (2, 2)
        assert np.linalg.norm(block - block.T) < 1e-10
        assert np.linalg.norm(block @ block.conj().T - np.eye(2)) < 1e-10


def test_random_fully_scalar_is_phase_of_draw():
    cfg = random_reflection("fully", 1, np.random.default_rng(2))
    rng = np.random.default_rng(2)
    x = rng.standard_normal() + 1j * rng.standard_normal()
    assert abs(cfg.theta[0, 0] - x / abs(x)) < 1e-14


def test_validator_rejects_violations():
    D = 4
    bad_unitary = ReflectionConfig("fully", 1.01 * np.eye(D), (D,))
    with pytest.raises(ContractViolation):
        validate_reflection(bad_unitary)
    theta = random_reflection("fully", D, np.random.default_rng(3)).theta
    with pytest.raises(ContractViolation):
        validate_reflection(ReflectionConfig("group", theta, (2, 2)))
    asym = np.array([[0, 1], [-1, 0]], dtype=complex)
    with pytest.raises(ContractViolation):
        validate_reflection(ReflectionConfig("fully", asym, (2,)))
    with pytest.raises(ContractViolation):
        validate_reflection(ReflectionConfig("single", np.diag([1, 1j, 2]), (1, 1, 1)))


def test_group_sizes_for():
    assert group_sizes_for("fully", 6) == (6,)
    assert group_sizes_for("single", 3) == (1, 1, 1)
    assert group_sizes_for("group", 6, 2) == (2, 2, 2)
    with pytest.raises(DimensionError):
        group_sizes_for("group", 6, 4)


@pytest.mark.parametrize("arch", ["group", "fully"])
def test_energy_conservation(arch):
    rng = np.random.default_rng(4)
    G, g = instance(rng)
    for cfg in (random_reflection(arch, 16, rng, 4), aligned_reflection(arch, G, g, UNIFORM, 4)):
        for _ in range(10):
            x = cn(rng, 16)
            assert abs(np.linalg.norm(cfg.theta @ x) - np.linalg.norm(x)) < 1e-9


# --- aligned, fully connected ---------------------------------------------------

def test_aligned_scalar_case():
    G, g = np.array([[0.3 - 0.2j]]), np.array([[1.1 + 0.4j]])
    cfg = aligned_fully_connected(G, g, [1.0])
    validate_reflection(cfg)
    assert abs(abs(cfg.theta[0, 0]) - 1) < 1e-12


def test_relaxed_optimum_attains_top_singular_value():
    rng = np.random.default_rng(5)
    G, g = instance(rng)
    S = relaxed_matrix(G, g, UNIFORM)
    theta = linalg.dominant_right_singular_vector(S)
    s1 = np.linalg.svd(S, compute_uv=False)[0]
    assert abs(np.linalg.norm(S @ theta) ** 2 - s1**2) <= 1e-9 * s1**2


def test_relaxed_matrix_matches_objective():
    # ||S_bar vech(theta)||^2 is the weighted interference for symmetric theta
    rng = np.random.default_rng(6)
    G, g = instance(rng)
    mu = np.array([0.5, 0.2, 0.3])
    S = relaxed_matrix(G, g, mu)
    theta = random_reflection("fully", 16, rng).theta
    lhs = np.linalg.norm(S @ linalg.vech(theta)) ** 2
    assert abs(lhs - attack_objective(theta, G, g, mu)) < 1e-9 * lhs


def test_relaxed_matrix_literal_kronecker():
    rng = np.random.default_rng(7)
    G, g = instance(rng, M=3, D=4, U=2)
    mu = np.array([0.4, 0.6])
    D = linalg.duplication_matrix(4)
    S = np.vstack([np.sqrt(m) * np.kron(G.T, gi.conj()[None, :]) for m, gi in zip(mu, g)])
    np.testing.assert_allclose(relaxed_matrix(G, g, mu), S @ D, atol=1e-14)


def test_aligned_beats_random_fully():
    rng = np.random.default_rng(8)
    wins, ratios = 0, []
    for _ in range(500):
        G, g = instance(rng)
        a = attack_objective(aligned_fully_connected(G, g, UNIFORM).theta, G, g, UNIFORM)
        r = attack_objective(random_reflection("fully", 16, rng).theta, G, g, UNIFORM)
        wins += a > r
        ratios.append(a / r)
    assert wins >= 450
    assert np.mean(ratios) > 1.5


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), M=st.integers(1, 5), U=st.integers(1, 3),
       sizes=st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_structured_matches_explicit(seed, M, U, sizes):
    rng = np.random.default_rng(seed)
    D = sum(sizes)
    G, g = instance(rng, M=M, D=D, U=U)
    mu = rng.dirichlet(np.ones(U))
    a = aligned_group_connected(G, g, sizes, mu)
    b = aligned_group_connected(G, g, sizes, mu, method="explicit")
    validate_reflection(a)
    oa, ob = attack_objective(a.theta, G, g, mu), attack_objective(b.theta, G, g, mu)
    assert abs(oa - ob) <= 1e-9 * max(ob, 1e-300)
    np.testing.assert_allclose(a.theta, b.theta, atol=1e-8)


def test_structured_matches_explicit_equal_groups():
    rng = np.random.default_rng(9)
    G, g = instance(rng, M=6, D=20)
    for sizes in [(20,), (5,) * 4, (1,) * 20]:
        a = aligned_group_connected(G, g, sizes, UNIFORM)
        b = aligned_group_connected(G, g, sizes, UNIFORM, method="explicit")
        np.testing.assert_allclose(a.theta, b.theta, atol=1e-9)


def test_aligned_rejects_zero_channels():
    with pytest.raises(DegenerateInputError):
        aligned_fully_connected(np.zeros((4, 2)), np.zeros((3, 4)), UNIFORM)
    with pytest.raises(DegenerateInputError):
        aligned_fully_connected(np.zeros((4, 2)), np.zeros((3, 4)), UNIFORM, method="explicit")


def test_aligned_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        aligned_fully_connected(np.ones((4, 2)), np.ones((3, 5)), UNIFORM)


# --- aligned, group connected ----------------------------------------------------

def test_group_with_one_group_equals_fully():
    rng = np.random.default_rng(10)
    G, g = instance(rng)
    a = aligned_group_connected(G, g, [16], UNIFORM)
    b = aligned_fully_connected(G, g, UNIFORM)
    np.testing.assert_allclose(a.theta, b.theta, atol=1e-12)
    oa, ob = attack_objective(a.theta, G, g, UNIFORM), attack_objective(b.theta, G, g, UNIFORM)
    assert abs(oa - ob) <= 1e-9 * ob


def test_group_with_singletons_is_diagonal_phase():
    rng = np.random.default_rng(11)
    G, g = instance(rng)
    cfg = aligned_group_connected(G, g, [1] * 16, UNIFORM)
    assert np.count_nonzero(cfg.theta - np.diag(np.diag(cfg.theta))) == 0
    np.testing.assert_allclose(np.abs(np.diag(cfg.theta)), 1, atol=1e-12)


def test_group_blocks_are_valid():
    rng = np.random.default_rng(12)
    G, g = instance(rng, D=20)
    validate_reflection(aligned_group_connected(G, g, [5] * 4, UNIFORM))
    validate_reflection(aligned_group_connected(G, g, [3, 7, 10], UNIFORM))


def test_objective_ordering_across_architectures():
    rng = np.random.default_rng(13)
    obj = {"fully": [], "group": [], "single": []}
    for _ in range(500):
        G, g = instance(rng)
        for arch in obj:
            obj[arch].append(attack_objective(aligned_reflection(arch, G, g, UNIFORM, 4).theta, G, g, UNIFORM))
    means = {k: np.mean(v) for k, v in obj.items()}
    assert means["fully"] >= means["group"] >= means["single"]


# --- aligned, single connected ----------------------------------------------------

def test_single_scalar_matches_fully():
    G, g = np.array([[0.3 - 0.2j, 1.0]]), np.array([[1.1 + 0.4j], [0.2j]])
    mu = [0.5, 0.5]
    a = aligned_single_connected(G, g, mu)
    b = aligned_fully_connected(G, g, mu)
    np.testing.assert_allclose(a.theta, b.theta, atol=1e-12)


def test_single_beats_random_phases():
    rng = np.random.default_rng(14)
    wins = 0
    for _ in range(500):
        G, g = instance(rng)
        a = attack_objective(aligned_single_connected(G, g, UNIFORM).theta, G, g, UNIFORM)
        r = attack_objective(random_reflection("single", 16, rng).theta, G, g, UNIFORM)
        wins += a > r
    assert wins >= 450


def test_single_gram_is_hermitian_psd():
    rng = np.random.default_rng(15)
    G, g = instance(rng)
    Q = single_connected_gram(G, g, UNIFORM)
    assert np.array_equal(Q, Q.conj().T)
    assert np.linalg.eigvalsh(Q).min() >= -1e-10
    t = cn(rng, 16)
    expected = sum(m * np.linalg.norm(gi.conj() @ np.diag(t) @ G) ** 2 for m, gi in zip(UNIFORM, g))
    assert abs(np.real(np.vdot(t, Q @ t)) - expected) < 1e-10 * expected


def test_single_output_is_valid():
    rng = np.random.default_rng(16)
    G, g = instance(rng)
    cfg = aligned_single_connected(G, g, UNIFORM)
    validate_reflection(cfg)
    assert cfg.group_sizes == (1,) * 16


# --- weights ------------------------------------------------------------------------

@pytest.mark.parametrize("arch", ["fully", "group", "single"])
def test_focused_weights_favor_target(arch):
    rng = np.random.default_rng(17)
    k = 1
    focus = np.eye(3)[k]
    target, uniform = [], []
    for _ in range(500):
        G, g = instance(rng)
        target.append(attack_objective(aligned_reflection(arch, G, g, focus, 4).theta, G, g, focus))
        uniform.append(attack_objective(aligned_reflection(arch, G, g, UNIFORM, 4).theta, G, g, focus))
    assert np.mean(target) >= np.mean(uniform)
