"""Plain-text persistence for matrices, models, spectra and labels.

All formats are whitespace-separated and write floats with 17 significant
digits, which round-trips IEEE doubles exactly.

Matrix format (shared by adjacency, embedding and label matrices):

    n K K_bar
    sizes  <K_bar ints>
    class_of  <K_bar ints>
    [kind <token>]            # label matrices only
    <n rows of floats>

Discrete model format:

    m n
    natural_probs  <m floats>
    <m rows of n floats>

Spectrum format: the matrix header, a ``lambda`` line of n eigenvalues, an
optional ``blocks`` line, then the n rows of the eigenvector matrix.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .embedding import Spectrum
from .graphs import AdjacencyMatrix, DiscreteAugmentationModel
from .labels import LabelMatrix
from .structure import SubclassStructure


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_row(row) -> str:
    return " ".join(_fmt(x) for x in row)


def _structure_header(structure: SubclassStructure, n_rows: int) -> list[str]:
    return [
        f"{n_rows} {structure.num_classes} {structure.num_subclasses}",
        "sizes " + " ".join(str(s) for s in structure.sizes),
        "class_of " + " ".join(str(c) for c in structure.class_of),
    ]


class _LineReader:
    def __init__(self, path: Path):
        self.lines = [
            ln for ln in path.read_text().splitlines() if ln.strip() != ""
        ]
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ValueError("unexpected end of file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def peek(self) -> Optional[str]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None


def _read_structure(reader: _LineReader):
    n, k, kbar = (int(t) for t in reader.next().split())
    sizes_line = reader.next().split()
    class_line = reader.next().split()
    if sizes_line[0] != "sizes" or class_line[0] != "class_of":
        raise ValueError("malformed structure header")
    sizes = tuple(int(t) for t in sizes_line[1:])
    class_of = tuple(int(t) for t in class_line[1:])
    structure = SubclassStructure(sizes=sizes, class_of=class_of)
    if len(sizes) != kbar or structure.num_classes != k or structure.total != n:
        raise ValueError("structure header is inconsistent with its fields")
    return structure, n


def _read_rows(reader: _LineReader, n: int) -> np.ndarray:
    return np.array(
        [[float(t) for t in reader.next().split()] for _ in range(n)], dtype=float
    )


def write_matrix(path, values: np.ndarray, structure: SubclassStructure,
                 kind: Optional[str] = None) -> None:
    values = np.asarray(values, dtype=float)
    lines = _structure_header(structure, values.shape[0])
    if kind is not None:
        lines.append(f"kind {kind}")
    lines.extend(_fmt_row(row) for row in values)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    """Returns (values, structure, kind-or-None)."""
    reader = _LineReader(Path(path))
    structure, n = _read_structure(reader)
    kind = None
    nxt = reader.peek()
    if nxt is not None and nxt.startswith("kind "):
        kind = reader.next().split(None, 1)[1]
    return _read_rows(reader, n), structure, kind


def write_adjacency(path, adj: AdjacencyMatrix) -> None:
    write_matrix(path, adj.weights, adj.structure)


def read_adjacency(path) -> AdjacencyMatrix:
    values, structure, _ = read_matrix(path)
    return AdjacencyMatrix(weights=values, structure=structure)


def write_labels(path, labels: LabelMatrix, structure: SubclassStructure) -> None:
    write_matrix(path, labels.values, structure, kind=labels.kind)


def read_labels(path) -> LabelMatrix:
    values, _, kind = read_matrix(path)
    if kind is None:
        raise ValueError("label file is missing its kind header")
    return LabelMatrix(values=values, kind=kind)


def write_model(path, model: DiscreteAugmentationModel) -> None:
    lines = [
        f"{model.num_natural} {model.num_augmented}",
        "natural_probs " + _fmt_row(model.natural_probs),
    ]
    lines.extend(_fmt_row(row) for row in model.aug_probs)
    Path(path).write_text("\n".join(lines) + "\n")


def read_model(path) -> DiscreteAugmentationModel:
    reader = _LineReader(Path(path))
    m, n = (int(t) for t in reader.next().split())
    probs_line = reader.next().split()
    if probs_line[0] != "natural_probs":
        raise ValueError("malformed model header")
    natural = np.array([float(t) for t in probs_line[1:]], dtype=float)
    aug = _read_rows(reader, m)
    if natural.shape[0] != m or aug.shape != (m, n):
        raise ValueError("model dimensions are inconsistent with the header")
    return DiscreteAugmentationModel(natural_probs=natural, aug_probs=aug)


def write_spectrum(path, spec: Spectrum) -> None:
    lines = _structure_header(spec.structure, spec.n)
    lines.append("lambda " + _fmt_row(spec.eigenvalues))
    if spec.block_support is not None:
        lines.append("blocks " + " ".join(str(b) for b in spec.block_support))
    lines.extend(_fmt_row(row) for row in spec.eigenvectors)
    Path(path).write_text("\n".join(lines) + "\n")


def read_spectrum(path) -> Spectrum:
    reader = _LineReader(Path(path))
    structure, n = _read_structure(reader)
    lam_line = reader.next().split()
    if lam_line[0] != "lambda":
        raise ValueError("spectrum file is missing its lambda line")
    lam = np.array([float(t) for t in lam_line[1:]], dtype=float)
    block_support = None
    nxt = reader.peek()
    if nxt is not None and nxt.startswith("blocks "):
        block_support = tuple(int(t) for t in reader.next().split()[1:])
    vec = _read_rows(reader, n)
    if lam.shape[0] != n or vec.shape != (n, n):
        raise ValueError("spectrum dimensions are inconsistent with the header")
    return Spectrum(
        eigenvalues=lam, eigenvectors=vec, structure=structure,
        block_support=block_support,
    )
