"""Graph construction and assumption-constant measurement."""

import math

import numpy as np
import pytest

from specnoise import (
    AdjacencyMatrix,
    DiscreteAugmentationModel,
    IsolatedVertexError,
    SubclassStructure,
    build_from_discrete_model,
    delta_prime_from_delta,
    measure_delta,
    measure_xi,
    split_block_and_residual,
    synthesize_structured,
)

S22 = SubclassStructure.balanced(2, 2, 2)  # n = 4


def uniform_blocks(structure, value=1.0):
    n = structure.total
    w = np.zeros((n, n))
    for sl in structure.subclass_slices():
        w[sl, sl] = value
    return AdjacencyMatrix(weights=w, structure=structure)


# ---------------------------------------------------------------------------
# build_from_discrete_model
# ---------------------------------------------------------------------------

def test_single_natural_point_block_is_single_term_expectation():
    # each natural point generates two augmentations at prob 1/2, so each
    # 2x2 block is the one-term product P(x*) * (1/2) * (1/2)
    model = DiscreteAugmentationModel(
        natural_probs=np.array([1.0, 0.0]),
        aug_probs=np.array([[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]]),
    )
    with pytest.raises(IsolatedVertexError):
        build_from_discrete_model(model, S22)  # prob-0 natural kills its block
    model = DiscreteAugmentationModel(
        natural_probs=np.array([0.5, 0.5]),
        aug_probs=np.array([[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]]),
    )
    adj = build_from_discrete_model(model, S22)
    assert np.allclose(adj.weights[:2, :2], 0.5 * 0.25)
    assert np.allclose(adj.weights[2:, 2:], 0.5 * 0.25)
    assert np.all(adj.weights[:2, 2:] == 0.0)


def test_disjoint_supports_block_diagonal_and_xi_zero():
    model = DiscreteAugmentationModel(
        natural_probs=np.array([0.5, 0.5]),
        aug_probs=np.array([[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]]),
    )
    adj = build_from_discrete_model(model, S22)
    assert measure_xi(adj) == 0.0


def test_discrete_model_matches_triple_loop_oracle():
    rng = np.random.default_rng(7)
    m, n = 3, 6
    probs = rng.random(m)
    probs /= probs.sum()
    aug = rng.random((m, n))
    aug /= aug.sum(axis=1, keepdims=True)
    structure = SubclassStructure.balanced(2, 2, 3)
    adj = build_from_discrete_model(
        DiscreteAugmentationModel(natural_probs=probs, aug_probs=aug), structure
    )
    expected = np.zeros((n, n))
    for s in range(m):
        for i in range(n):
            for j in range(n):
                expected[i, j] += probs[s] * aug[s, i] * aug[s, j]
    assert np.allclose(adj.weights, expected, atol=1e-15)
    assert np.allclose(adj.weights, adj.weights.T)
    assert (adj.weights >= 0).all()


def test_discrete_model_dimension_mismatch():
    model = DiscreteAugmentationModel(
        natural_probs=np.array([1.0]), aug_probs=np.full((1, 5), 0.2)
    )
    with pytest.raises(ValueError, match="augmented"):
        build_from_discrete_model(model, S22)


def test_discrete_model_isolated_point():
    model = DiscreteAugmentationModel(
        natural_probs=np.array([1.0]),
        aug_probs=np.array([[0.5, 0.5, 0.0, 0.0]]),
    )
    with pytest.raises(IsolatedVertexError):
        build_from_discrete_model(model, S22)


# ---------------------------------------------------------------------------
# measure_delta / measure_xi
# ---------------------------------------------------------------------------

def test_measure_delta_uniform_blocks_is_zero():
    assert measure_delta(uniform_blocks(S22)) == 0.0


def test_measure_delta_scaled_pair():
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = uniform_blocks(structure)
    w = adj.weights.copy()
    w[0, 1] = w[1, 0] = 1.2  # one symmetric in-block pair scaled by 1.2
    adj = AdjacencyMatrix(weights=w, structure=structure)
    assert measure_delta(adj) == pytest.approx(0.2, abs=1e-12)


def test_measure_delta_matches_triple_loop_oracle():
    rng = np.random.default_rng(11)
    structure = SubclassStructure.balanced(2, 3, 4)
    n = structure.total
    w = np.zeros((n, n))
    for sl in structure.subclass_slices():
        block = rng.uniform(0.5, 2.0, size=(4, 4))
        w[sl, sl] = 0.5 * (block + block.T)
    adj = AdjacencyMatrix(weights=w, structure=structure)

    labels = structure.subclass_of_rows()
    worst = 1.0
    for s in range(n):
        for t in range(n):
            if labels[s] != labels[t] or s == t:
                continue
            for j in range(n):
                if w[s, j] == 0.0 and w[t, j] == 0.0:
                    continue
                worst = max(worst, w[s, j] / w[t, j])
    assert measure_delta(adj) == pytest.approx(worst - 1.0, rel=1e-12)


def test_measure_delta_zero_against_positive_is_infinite():
    structure = SubclassStructure.balanced(2, 2, 2)
    w = uniform_blocks(structure).weights.copy()
    w[0, 1] = w[1, 0] = 0.0  # row 0 loses a weight row 1 keeps
    adj = AdjacencyMatrix(weights=w, structure=structure)
    assert measure_delta(adj) == math.inf


def test_measure_xi_block_diagonal_is_zero():
    assert measure_xi(uniform_blocks(S22)) == 0.0


def test_measure_xi_direct_ratio():
    structure = SubclassStructure.balanced(2, 2, 3)
    w = uniform_blocks(structure).weights.copy()
    mask = w == 0.0
    w[mask] = 0.03
    adj = AdjacencyMatrix(weights=w, structure=structure)
    assert measure_xi(adj) == pytest.approx(0.03, rel=1e-12)


def test_measure_xi_random_matches_scan():
    rng = np.random.default_rng(3)
    structure = SubclassStructure.balanced(2, 2, 3)
    n = structure.total
    raw = rng.uniform(0.2, 1.0, size=(n, n))
    w = 0.5 * (raw + raw.T)
    adj = AdjacencyMatrix(weights=w, structure=structure)
    labels = structure.subclass_of_rows()
    same = labels[:, None] == labels[None, :]
    expected = w[~same].max() / w[same].min()
    assert measure_xi(adj) == pytest.approx(expected, rel=1e-12)


def test_measure_xi_zero_in_block_weight_is_error():
    structure = SubclassStructure.balanced(2, 2, 2)
    w = uniform_blocks(structure).weights.copy()
    w[0, 0] = 0.0
    adj = AdjacencyMatrix(weights=w, structure=structure)
    with pytest.raises(ValueError, match="same-sub-class"):
        measure_xi(adj)


# ---------------------------------------------------------------------------
# synthesize_structured
# ---------------------------------------------------------------------------

def test_synthesize_zero_targets_gives_uniform_blocks():
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = synthesize_structured(structure, 0.0, 0.0, 1.0, 9)
    for sl in structure.subclass_slices():
        assert np.all(adj.weights[sl, sl] == 1.0)
    assert measure_xi(adj) == 0.0


def test_synthesize_delta_target_met_and_nontrivial():
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = synthesize_structured(structure, 0.1, 0.0, 1.0, 9)
    measured = measure_delta(adj)
    assert 0.0 < measured <= 0.1


def test_synthesize_xi_target_met():
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = synthesize_structured(structure, 0.0, 0.05, 1.0, 9)
    mask = adj.weights[:4, 4:]
    min_in = min(adj.weights[:4, :4].min(), adj.weights[4:, 4:].min())
    assert mask.max() <= 0.05 * min_in + 1e-15


def test_synthesize_deterministic():
    structure = SubclassStructure.balanced(2, 3, 5)
    a = synthesize_structured(structure, 0.08, 0.02, 1.3, 123)
    b = synthesize_structured(structure, 0.08, 0.02, 1.3, 123)
    assert np.array_equal(a.weights, b.weights)
    c = synthesize_structured(structure, 0.08, 0.02, 1.3, 124)
    assert not np.array_equal(a.weights, c.weights)


def test_synthesize_targets_hold_over_random_tuples():
    # property sweep: measured constants never exceed their targets
    rng = np.random.default_rng(2024)
    for trial in range(100):
        kbar = int(rng.integers(2, 5))
        k = int(rng.integers(2, kbar + 1))
        sizes = tuple(int(s) for s in rng.integers(2, 8, size=kbar))
        class_of = tuple(list(range(k)) + [int(c) for c in rng.integers(0, k, size=kbar - k)])
        structure = SubclassStructure(sizes=sizes, class_of=class_of)
        delta_t = float(rng.uniform(0.0, 0.9))
        xi_t = float(rng.uniform(0.0, 0.9))
        base = float(rng.uniform(0.1, 3.0))
        adj = synthesize_structured(structure, delta_t, xi_t, base, 5000 + trial)
        assert measure_delta(adj) <= delta_t + 1e-12
        assert measure_xi(adj) <= xi_t + 1e-12


def test_synthesize_rejects_bad_targets():
    with pytest.raises(ValueError):
        synthesize_structured(S22, 1.0, 0.0, 1.0, 0)
    with pytest.raises(ValueError):
        synthesize_structured(S22, 0.0, -0.1, 1.0, 0)


# ---------------------------------------------------------------------------
# split_block_and_residual
# ---------------------------------------------------------------------------

def test_split_block_diagonal_residual_zero():
    adj = uniform_blocks(SubclassStructure.balanced(2, 2, 3))
    bar, tilde, resid = split_block_and_residual(adj)
    assert resid == 0.0
    assert np.array_equal(bar.matrix, tilde.matrix)


def test_split_residual_positive_iff_xi_positive():
    structure = SubclassStructure.balanced(2, 2, 4)
    for xi_t, expect_zero in ((0.0, True), (0.03, False)):
        adj = synthesize_structured(structure, 0.05, xi_t, 1.0, 21)
        _, _, resid = split_block_and_residual(adj)
        assert (resid == 0.0) is expect_zero
        assert (measure_xi(adj) == 0.0) is expect_zero


def test_split_residual_shrinks_with_xi():
    structure = SubclassStructure.balanced(2, 2, 6)
    resids = []
    for xi_t in (0.04, 0.02, 0.01):
        adj = synthesize_structured(structure, 0.0, xi_t, 1.0, 33)
        resids.append(split_block_and_residual(adj)[2])
    assert resids[0] > resids[1] > resids[2] > 0.0


def test_split_blockcount_growth_within_trend():
    # log-log slope across K_bar in {2, 4, 8} stays below 2.5 + 0.5
    norms = []
    for kbar in (2, 4, 8):
        structure = SubclassStructure.balanced(2, kbar, 6)
        adj = synthesize_structured(structure, 0.0, 0.02, 1.0, 44)
        norms.append(split_block_and_residual(adj)[2])
    slope = np.polyfit(np.log([2, 4, 8]), np.log(norms), 1)[0]
    assert slope <= 3.0


# ---------------------------------------------------------------------------
# misc invariants
# ---------------------------------------------------------------------------

def test_delta_prime_formula():
    assert delta_prime_from_delta(0.0) == 0.0
    assert delta_prime_from_delta(0.1) == pytest.approx(1.1**1.5 - 1.0, rel=1e-15)
    assert delta_prime_from_delta(0.2) >= 0.2


def test_adjacency_rejects_asymmetry_and_negatives():
    w = np.full((4, 4), 0.5)
    w[0, 1] = 0.7
    with pytest.raises(ValueError, match="symmetric"):
        AdjacencyMatrix(weights=w, structure=S22)
    w2 = np.full((4, 4), 0.5)
    w2[0, 1] = w2[1, 0] = -0.1
    with pytest.raises(ValueError, match="nonnegative"):
        AdjacencyMatrix(weights=w2, structure=S22)


def test_adjacency_rejects_isolated_vertex():
    w = np.zeros((4, 4))
    w[2:, 2:] = 1.0
    with pytest.raises(IsolatedVertexError):
        AdjacencyMatrix(weights=w, structure=S22)


def test_dense_size_cap_enforced():
    big = SubclassStructure.balanced(2, 2, 2500)  # n = 5000 > 4096
    with pytest.raises(ValueError, match="dense-storage cap"):
        synthesize_structured(big, 0.0, 0.0, 1.0, 0)
