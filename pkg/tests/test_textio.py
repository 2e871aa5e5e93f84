"""Text persistence: exact round trips for every format."""

import numpy as np
import pytest

from specnoise import (
    DiscreteAugmentationModel,
    SubclassStructure,
    clean_labels,
    eigendecompose,
    gaussian_noise,
    normalize,
    synthesize_structured,
)
from specnoise import textio


def test_adjacency_roundtrip_exact(tmp_path):
    structure = SubclassStructure(sizes=(3, 2, 4), class_of=(0, 1, 1))
    adj = synthesize_structured(structure, 0.17, 0.03, 1.7, 99)
    path = tmp_path / "graph.txt"
    textio.write_adjacency(path, adj)
    loaded = textio.read_adjacency(path)
    assert np.array_equal(loaded.weights, adj.weights)
    assert loaded.structure == adj.structure


def test_matrix_roundtrip_preserves_awkward_floats(tmp_path):
    structure = SubclassStructure.balanced(2, 2, 2)
    values = np.array([
        [1 / 3, 1e-300, 0.1, np.pi],
        [1.0, 2.0**-52, 1e300, 0.3],
        [0.0, -0.0, 7.0, 1234567890.123456],
        [5e-324, 1.0 + 2**-52, 2.0, 3.0],
    ])
    path = tmp_path / "m.txt"
    textio.write_matrix(path, values, structure)
    loaded, structure2, kind = textio.read_matrix(path)
    assert np.array_equal(loaded, values)
    assert structure2 == structure
    assert kind is None


def test_labels_roundtrip_with_kind(tmp_path):
    structure = SubclassStructure.balanced(2, 3, 3)
    noisy = gaussian_noise(clean_labels(structure), 0.7, 5)
    path = tmp_path / "labels.txt"
    textio.write_labels(path, noisy, structure)
    loaded = textio.read_labels(path)
    assert loaded.kind == "gaussian-noisy"
    assert np.array_equal(loaded.values, noisy.values)


def test_labels_file_requires_kind(tmp_path):
    structure = SubclassStructure.balanced(2, 2, 2)
    path = tmp_path / "nokind.txt"
    textio.write_matrix(path, clean_labels(structure).values, structure)
    with pytest.raises(ValueError, match="kind"):
        textio.read_labels(path)


def test_model_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    probs = rng.random(3)
    probs /= probs.sum()
    aug = rng.random((3, 6))
    aug /= aug.sum(axis=1, keepdims=True)
    model = DiscreteAugmentationModel(natural_probs=probs, aug_probs=aug)
    path = tmp_path / "model.txt"
    textio.write_model(path, model)
    loaded = textio.read_model(path)
    assert np.array_equal(loaded.natural_probs, model.natural_probs)
    assert np.array_equal(loaded.aug_probs, model.aug_probs)


def test_spectrum_roundtrip(tmp_path):
    structure = SubclassStructure.balanced(2, 2, 4)
    adj = synthesize_structured(structure, 0.1, 0.0, 1.0, 4)
    spec = eigendecompose(normalize(adj))
    path = tmp_path / "spectrum.txt"
    textio.write_spectrum(path, spec)
    loaded = textio.read_spectrum(path)
    assert np.array_equal(loaded.eigenvalues, spec.eigenvalues)
    assert np.array_equal(loaded.eigenvectors, spec.eigenvectors)
    assert loaded.block_support == spec.block_support
    assert loaded.structure == spec.structure


def test_malformed_header_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4 2 2\nwrong 2 2\nclass_of 0 1\n1 0\n0 1\n1 0\n0 1\n")
    with pytest.raises(ValueError, match="malformed"):
        textio.read_matrix(path)
