"""Singular-spectrum profiling of arbitrary matrices."""

import numpy as np
import pytest
import scipy.linalg

from specnoise import (
    SubclassStructure,
    alignment_report,
    build_representation,
    clean_labels,
    eigendecompose,
    normalize,
    projection_alignment,
    spectrum_gap,
    synthesize_structured,
)
from specnoise.bounds import eigenvalue_tail_bounds
from specnoise.graphs import delta_prime_from_delta, measure_delta


def test_identity_matrix_alignment():
    d = 6
    rng = np.random.default_rng(0)
    y = rng.normal(size=d)
    report = alignment_report(np.eye(d), y, d)
    assert report.pi_n_norm == pytest.approx(0.0, abs=1e-12)
    assert report.pi_i_norm == pytest.approx(np.linalg.norm(y), rel=1e-12)
    assert report.ratio == pytest.approx(np.linalg.norm(y) / np.sqrt(d), rel=1e-12)


def test_single_direction_perfect_alignment():
    rng = np.random.default_rng(1)
    y = rng.normal(size=8)
    u = y / np.linalg.norm(y)
    j = 3.0 * np.outer(u, rng.normal(size=5))
    report = alignment_report(j, y, 1)
    assert report.pi_i_norm == pytest.approx(np.linalg.norm(y), rel=1e-10)
    assert report.pi_n_norm == pytest.approx(0.0, abs=1e-9)


def test_alignment_matches_dense_svd_oracle():
    rng = np.random.default_rng(2)
    j = rng.normal(size=(200, 50))
    y = rng.normal(size=200)
    top_k = 7
    report = alignment_report(j, y, top_k)
    u_full, s_full, _ = scipy.linalg.svd(j)
    projector = u_full[:, :top_k] @ u_full[:, :top_k].T
    assert report.pi_i_norm == pytest.approx(np.linalg.norm(projector @ y), abs=1e-8)
    assert report.pi_n_norm == pytest.approx(
        np.linalg.norm(y - projector @ y), abs=1e-8
    )
    gram = j @ j.T
    assert report.ratio == pytest.approx(
        np.linalg.norm(gram @ y) / np.linalg.norm(gram, "fro"), rel=1e-8
    )
    assert np.allclose(report.singular_values, s_full[:50], atol=1e-10)


def test_alignment_mass_decomposition():
    rng = np.random.default_rng(3)
    j = rng.normal(size=(40, 10))
    y = rng.normal(size=40)
    report = alignment_report(j, y, 4)
    assert report.pi_i_norm**2 + report.pi_n_norm**2 == pytest.approx(
        float(y @ y), abs=1e-8
    )


def test_alignment_invariant_to_right_rotation():
    rng = np.random.default_rng(4)
    j = rng.normal(size=(30, 12))
    y = rng.normal(size=30)
    q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
    a = alignment_report(j, y, 5)
    b = alignment_report(j @ q, y, 5)
    assert a.pi_i_norm == pytest.approx(b.pi_i_norm, abs=1e-9)
    assert a.pi_n_norm == pytest.approx(b.pi_n_norm, abs=1e-9)
    assert a.ratio == pytest.approx(b.ratio, abs=1e-9)


def test_alignment_consistent_with_projection_alignment():
    structure = SubclassStructure.balanced(2, 3, 9)
    adj = synthesize_structured(structure, 0.08, 0.0, 1.0, 19)
    spec = eigendecompose(normalize(adj))
    rep = build_representation(spec, 6, rotation_seed=8)
    clean = clean_labels(structure)
    y = clean.values[:, 0]
    report = alignment_report(rep.values, y, 3)
    assert report.pi_i_norm**2 == pytest.approx(
        projection_alignment(spec, 3, y), abs=1e-9
    )


@pytest.mark.filterwarnings("ignore:singular values")
def test_alignment_errors():
    with pytest.raises(ValueError, match="rows"):
        alignment_report(np.eye(3), np.ones(4), 1)
    with pytest.raises(ValueError, match="top_k"):
        alignment_report(np.eye(3), np.ones(3), 4)
    with pytest.raises(ValueError, match="zero"):
        alignment_report(np.zeros((3, 3)), np.ones(3), 1)


def test_tied_cutoff_warns():
    with pytest.warns(UserWarning, match="tied"):
        alignment_report(np.eye(4), np.ones(4), 2)


def test_spectrum_gap_rank_k():
    rng = np.random.default_rng(5)
    u = np.linalg.qr(rng.normal(size=(20, 3)))[0]
    v = np.linalg.qr(rng.normal(size=(8, 3)))[0]
    j = u @ np.diag([5.0, 3.0, 1.0]) @ v.T
    head, tail = spectrum_gap(j, 3)
    assert head == pytest.approx(1.0, abs=1e-10)
    assert tail == pytest.approx(0.0, abs=1e-10)


@pytest.mark.filterwarnings("ignore:singular values")
def test_spectrum_gap_identity():
    head, tail = spectrum_gap(np.eye(10), 4)
    assert head == pytest.approx(0.4, rel=1e-12)
    assert tail == pytest.approx(0.6, rel=1e-12)


def test_spectrum_gap_embedding_head_dominates():
    structure = SubclassStructure.balanced(2, 4, 20)
    adj = synthesize_structured(structure, 0.05, 0.0, 1.0, 23)
    spec = eigendecompose(normalize(adj))
    rep = build_representation(spec, 8)
    head, _ = spectrum_gap(rep.values, 4)
    s = np.linalg.svd(rep.values, compute_uv=False)
    dp = delta_prime_from_delta(measure_delta(adj))
    p_counts = spec.per_block_counts(8)
    cap = sum(
        eigenvalue_tail_bounds(20, dp, p_counts.get(k, 1))[1] for k in range(4)
    )
    assert head >= 1.0 - cap / s.sum()


def test_spectrum_gap_zero_matrix_errors():
    with pytest.raises(ValueError, match="zero"):
        spectrum_gap(np.zeros((4, 4)), 1)
