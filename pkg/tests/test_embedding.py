"""Normalization, eigensystem, and low-rank embedding."""

import numpy as np
import pytest

from specnoise import (
    AdjacencyMatrix,
    IsolatedVertexError,
    SubclassStructure,
    build_representation,
    delta_prime_from_delta,
    eigendecompose,
    factorization_loss,
    measure_delta,
    normalize,
    symmetric_eigensystem,
    synthesize_structured,
    verify_column_ratio,
)
from specnoise.embedding import normalized_matrix


def uniform_graph(classes=2, subclasses=2, block=3):
    structure = SubclassStructure.balanced(classes, subclasses, block)
    return synthesize_structured(structure, 0.0, 0.0, 1.0, 0)


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------

def test_normalize_selfloops_only_gives_identity():
    m, _ = normalized_matrix(np.diag([2.0, 3.0]))
    assert np.allclose(m, np.eye(2), atol=1e-15)


def test_normalize_all_ones():
    m, degrees = normalized_matrix(np.ones((2, 2)))
    assert np.allclose(m, 0.5)
    assert np.allclose(degrees, 2.0)


def test_normalize_uniform_block_entries_one_over_m():
    for c in (0.3, 1.0, 4.5):
        m, _ = normalized_matrix(np.full((5, 5), c))
        assert np.allclose(m, 1.0 / 5.0, atol=1e-15)


def test_normalize_zero_row_names_index():
    w = np.zeros((3, 3))
    w[:2, :2] = 1.0
    with pytest.raises(IsolatedVertexError, match="2"):
        normalized_matrix(w)


def test_normalize_adjacency_roundtrip_structure():
    adj = uniform_graph()
    norm = normalize(adj)
    assert norm.structure is adj.structure
    assert norm.is_block_diagonal()


# ---------------------------------------------------------------------------
# eigendecompose
# ---------------------------------------------------------------------------

def test_two_uniform_blocks_spectrum():
    adj = uniform_graph(block=3)
    spec = eigendecompose(normalize(adj))
    assert np.allclose(spec.eigenvalues, [1, 1, 0, 0, 0, 0], atol=1e-10)
    # identical blocks tie at eigenvalue 1 exactly; block order breaks the tie
    assert spec.block_support[:2] == (0, 1)
    assert sorted(spec.block_support[2:]) == [0, 0, 1, 1]


def test_two_by_two_block_closed_form():
    for a, b in ((2.0, 1.0), (5.0, 0.5), (1.0, 1.0)):
        m, _ = normalized_matrix(np.array([[a, b], [b, a]]))
        lam, _ = symmetric_eigensystem(m)
        assert lam[0] == pytest.approx(1.0, abs=1e-12)
        assert lam[1] == pytest.approx((a - b) / (a + b), abs=1e-12)


def test_random_symmetric_reconstruction():
    rng = np.random.default_rng(5)
    raw = rng.normal(size=(30, 30))
    m = 0.5 * (raw + raw.T)
    lam, vec = symmetric_eigensystem(m)
    assert np.linalg.norm(m - (vec * lam) @ vec.T, "fro") <= 1e-8 * 30
    assert np.all(np.diff(lam) <= 1e-12)


def test_eigendecompose_validates_spectrum_invariants():
    structure = SubclassStructure.balanced(2, 3, 10)
    adj = synthesize_structured(structure, 0.15, 0.0, 1.0, 8)
    norm = normalize(adj)
    spec = eigendecompose(norm)
    n = structure.total
    # orthonormality and per-column eigen residual
    assert np.abs(spec.eigenvectors.T @ spec.eigenvectors - np.eye(n)).max() < 1e-9
    resid = norm.matrix @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues
    assert np.abs(resid).max() < 1e-8
    # spectral radius of a normalized adjacency
    assert np.abs(spec.eigenvalues).max() <= 1.0 + 1e-9
    # exactly K_bar unit eigenvalues for a disconnected graph
    assert np.allclose(spec.eigenvalues[:3], 1.0, atol=1e-9)
    assert spec.eigenvalues[3] < 1.0 - 1e-6


def test_perron_vectors_nonnegative():
    structure = SubclassStructure.balanced(2, 4, 7)
    adj = synthesize_structured(structure, 0.2, 0.0, 1.0, 13)
    spec = eigendecompose(normalize(adj))
    for col in range(4):  # the four unit-eigenvalue columns lead
        vec = spec.eigenvectors[:, col]
        assert vec.min() >= -1e-12


def test_asymmetric_input_rejected():
    m = np.eye(4)
    m[0, 1] = 1e-6
    with pytest.raises(ValueError, match="asymmetry"):
        symmetric_eigensystem(m)


def test_nonblock_input_has_no_block_support():
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = synthesize_structured(structure, 0.05, 0.02, 1.0, 3)
    spec = eigendecompose(normalize(adj))
    assert spec.block_support is None


# ---------------------------------------------------------------------------
# build_representation / factorization_loss
# ---------------------------------------------------------------------------

def test_rank_kbar_representation_reproduces_matrix():
    adj = uniform_graph(block=4)
    norm = normalize(adj)
    spec = eigendecompose(norm)
    rep = build_representation(spec, 2)
    assert np.abs(norm.matrix - rep.values @ rep.values.T).max() < 1e-9
    assert factorization_loss(norm, rep) < 1e-12


def test_rotation_does_not_change_gram():
    structure = SubclassStructure.balanced(2, 2, 5)
    adj = synthesize_structured(structure, 0.1, 0.0, 1.0, 2)
    spec = eigendecompose(normalize(adj))
    rep_a = build_representation(spec, 4, rotation_seed=1)
    rep_b = build_representation(spec, 4, rotation_seed=99)
    gram_a = rep_a.values @ rep_a.values.T
    gram_b = rep_b.values @ rep_b.values.T
    assert np.abs(gram_a - gram_b).max() < 1e-10
    assert not np.allclose(rep_a.values, rep_b.values)


def test_singular_values_are_sqrt_eigenvalues():
    structure = SubclassStructure.balanced(2, 3, 6)
    adj = synthesize_structured(structure, 0.12, 0.0, 1.0, 6)
    spec = eigendecompose(normalize(adj))
    p = 5
    rep = build_representation(spec, p, rotation_seed=4)
    sv = np.linalg.svd(rep.values, compute_uv=False)
    expected = np.sqrt(np.clip(spec.eigenvalues[:p], 0.0, None))
    assert np.allclose(np.sort(sv), np.sort(expected), atol=1e-8)


def test_representation_refuses_small_p_and_negative_eigenvalues():
    adj = uniform_graph(block=4)
    spec = eigendecompose(normalize(adj))
    with pytest.raises(ValueError, match="rank"):
        build_representation(spec, 1)  # p < K_bar
    # bipartite-style blocks produce eigenvalue -1
    structure = SubclassStructure.balanced(2, 2, 2)
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 1.0
    spec2 = eigendecompose(normalize(AdjacencyMatrix(weights=w, structure=structure)))
    with pytest.raises(ValueError, match="negative"):
        build_representation(spec2, 3)


def test_factorization_loss_eckart_young():
    structure = SubclassStructure.balanced(2, 2, 6)
    adj = synthesize_structured(structure, 0.15, 0.0, 1.0, 10)
    norm = normalize(adj)
    spec = eigendecompose(norm)
    # sweep every embeddable rank (cut index must not hit negative eigenvalues)
    ranks = [p for p in range(2, spec.n + 1) if spec.eigenvalues[p - 1] >= 0.0]
    assert len(ranks) >= 3
    for p in ranks:
        rep = build_representation(spec, p)
        tail = float((spec.eigenvalues[p:] ** 2).sum())
        assert factorization_loss(norm, rep) == pytest.approx(tail, abs=1e-8)


def test_factorization_loss_dropped_unit_eigenpair():
    adj = uniform_graph(block=4)
    norm = normalize(adj)
    spec = eigendecompose(norm)
    # keep p = K_bar columns but zero one unit eigenpair by hand
    f = spec.eigenvectors[:, :2] * np.sqrt(np.array([1.0, 0.0]))
    assert factorization_loss(norm, f) == pytest.approx(1.0, abs=1e-9)


def test_factorization_loss_not_beaten_by_random_rivals():
    structure = SubclassStructure.balanced(2, 2, 5)
    adj = synthesize_structured(structure, 0.1, 0.0, 1.0, 12)
    norm = normalize(adj)
    spec = eigendecompose(norm)
    rep = build_representation(spec, 3)
    loss = factorization_loss(norm, rep)
    rng = np.random.default_rng(0)
    f = rep.values
    for _ in range(300):
        rival = f + rng.normal(scale=rng.uniform(1e-4, 0.3), size=f.shape)
        assert factorization_loss(norm, rival) >= loss - 1e-12


def test_factorization_loss_dimension_mismatch():
    adj = uniform_graph(block=3)
    norm = normalize(adj)
    with pytest.raises(ValueError, match="rows"):
        factorization_loss(norm, np.ones((4, 2)))


# ---------------------------------------------------------------------------
# verify_column_ratio
# ---------------------------------------------------------------------------

def test_column_ratio_uniform_blocks_zero():
    assert verify_column_ratio(normalize(uniform_graph())) == 0.0


def test_column_ratio_bounded_by_power_law():
    structure = SubclassStructure.balanced(2, 2, 8)
    adj = synthesize_structured(structure, 0.1, 0.0, 1.0, 77)
    measured = verify_column_ratio(normalize(adj))
    assert measured <= 1.1**1.5 - 1.0 + 1e-12


def test_column_ratio_sweep_stays_below_derived_slack():
    rng = np.random.default_rng(42)
    for trial in range(25):
        structure = SubclassStructure.balanced(2, 2, int(rng.integers(3, 9)))
        delta_t = float(rng.uniform(0.0, 0.3))
        adj = synthesize_structured(structure, delta_t, 0.0, 1.0, 600 + trial)
        bound = delta_prime_from_delta(measure_delta(adj))
        assert verify_column_ratio(normalize(adj)) <= bound + 1e-9


def test_column_ratio_requires_block_diagonal():
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = synthesize_structured(structure, 0.0, 0.05, 1.0, 5)
    with pytest.raises(ValueError, match="block-diagonal"):
        verify_column_ratio(normalize(adj))
