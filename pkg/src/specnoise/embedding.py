"""Normalized adjacency, its eigensystem, and the low-rank representation.

The representation matrix is the minimizer of the symmetric factorization
objective ||M - F F^T||_F^2 over n x p matrices F, where M is the
degree-normalized adjacency.  It factors as (top-p eigenvectors) *
sqrt(top-p eigenvalues) * R with R an arbitrary orthogonal matrix, so all
observable quantities downstream depend on F only through F F^T.

When the graph is block-diagonal the eigenvalue 1 has multiplicity equal to
the number of blocks and a dense solver may return an arbitrary basis of
that eigenspace.  ``eigendecompose`` therefore takes the per-block route
whenever the input is block-diagonal, producing the canonical basis of
block-supported eigenvectors with nonnegative top-of-block (Perron)
entries.  Tests and bound checks that touch degenerate eigenspaces must
compare projectors, never individual eigenvectors.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IsolatedVertexError
from .graphs import AdjacencyMatrix
from .rng import STREAM_ROTATION, philox, random_orthogonal
from .structure import SubclassStructure, in_block_mask

_ASYMMETRY_TOL = 1e-10
#: Eigenvalues in [-NEG_EIG_TOL, 0) are rounding noise and clipped to zero.
NEG_EIG_TOL = 1e-9


@dataclass(frozen=True)
class NormalizedAdjacency:
    """D^{-1/2} W D^{-1/2} together with the degree vector."""

    matrix: np.ndarray
    degrees: np.ndarray
    structure: SubclassStructure

    @property
    def n(self) -> int:
        return self.structure.total

    def is_block_diagonal(self) -> bool:
        off = self.matrix[~in_block_mask(self.structure)]
        if off.size == 0:
            return True
        return float(np.abs(off).max()) <= 1e-14


@dataclass(frozen=True)
class Spectrum:
    """Full eigensystem in descending eigenvalue order.

    ``block_support[i]`` is the sub-class whose rows carry eigenvector i;
    it is populated only when the input was block-diagonal.
    """

    eigenvalues: np.ndarray        # (n,), descending
    eigenvectors: np.ndarray       # (n, n), orthonormal columns
    structure: SubclassStructure
    block_support: Optional[tuple[int, ...]] = None

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.eigenvalues.tobytes())
        h.update(self.eigenvectors.tobytes())
        return h.hexdigest()

    def top_projector_basis(self, count: int) -> np.ndarray:
        """Orthonormal basis (n x count) of the leading eigenspace span."""
        if not (0 < count <= self.n):
            raise ValueError(f"count {count} out of range for n={self.n}")
        return self.eigenvectors[:, :count]

    def per_block_counts(self, p: int) -> dict[int, int]:
        """How many of the top-p eigenpairs each block contributes."""
        if self.block_support is None:
            raise ValueError("block_support is only available for block-diagonal input")
        counts: dict[int, int] = {}
        for k in self.block_support[:p]:
            counts[k] = counts.get(k, 0) + 1
        return counts


@dataclass(frozen=True)
class RepresentationMatrix:
    """n x p embedding F = V_p diag(sqrt(lambda)) R."""

    values: np.ndarray
    rank_p: int
    source_spectrum_hash: str

    @property
    def n(self) -> int:
        return self.values.shape[0]


def normalized_matrix(weights: np.ndarray):
    """Array-level normalization: returns (D^{-1/2} W D^{-1/2}, degrees)."""
    w = np.asarray(weights, dtype=float)
    degrees = w.sum(axis=1)
    dead = np.nonzero(degrees <= 0.0)[0]
    if dead.size:
        raise IsolatedVertexError(
            f"rows {dead.tolist()} have zero degree and cannot be normalized"
        )
    inv_sqrt = 1.0 / np.sqrt(degrees)
    return w * inv_sqrt[:, None] * inv_sqrt[None, :], degrees


def normalize(adj: AdjacencyMatrix) -> NormalizedAdjacency:
    matrix, degrees = normalized_matrix(adj.weights)
    return NormalizedAdjacency(matrix=matrix, degrees=degrees, structure=adj.structure)


def symmetric_eigensystem(matrix: np.ndarray):
    """Descending eigensystem of a symmetric matrix with canonical signs.

    Rejects inputs whose asymmetry exceeds 1e-10; below that the matrix is
    symmetrized as (M + M^T) / 2 before decomposition.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asym = float(np.abs(m - m.T).max())
    if asym > _ASYMMETRY_TOL:
        raise ValueError(f"matrix asymmetry {asym:.3e} exceeds {_ASYMMETRY_TOL:.0e}")
    m = 0.5 * (m + m.T)
    lam, vec = np.linalg.eigh(m)
    lam = lam[::-1].copy()
    vec = vec[:, ::-1].copy()
    _canonical_signs(vec)
    return lam, vec


def _canonical_signs(vec: np.ndarray) -> None:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vec), axis=0)
    signs = np.sign(vec[idx, np.arange(vec.shape[1])])
    signs[signs == 0] = 1.0
    vec *= signs


def eigendecompose(norm: NormalizedAdjacency, validate: bool = True) -> Spectrum:
    """Full eigensystem of the normalized adjacency.

    Block-diagonal inputs are decomposed block by block; the assembled
    eigenvectors are supported on single blocks, top-of-block vectors follow
    the Perron (entrywise nonnegative) sign convention, and exact eigenvalue
    ties are ordered by block index then within-block index.
    """
    if norm.is_block_diagonal():
        spectrum = _eigendecompose_blocks(norm)
    else:
        lam, vec = symmetric_eigensystem(norm.matrix)
        spectrum = Spectrum(
            eigenvalues=lam, eigenvectors=vec, structure=norm.structure,
            block_support=None,
        )
    if validate:
        _validate_spectrum(norm, spectrum)
    return spectrum


def _eigendecompose_blocks(norm: NormalizedAdjacency) -> Spectrum:
    structure = norm.structure
    n = structure.total
    lam_all = np.empty(n)
    block_idx = np.empty(n, dtype=int)
    within_idx = np.empty(n, dtype=int)
    vec_all = np.zeros((n, n))
    pos = 0
    for k, sl in enumerate(structure.subclass_slices()):
        lam, vec = symmetric_eigensystem(norm.matrix[sl, sl])
        if vec[:, 0].sum() < 0:
            vec[:, 0] = -vec[:, 0]
        m = lam.shape[0]
        lam_all[pos:pos + m] = lam
        block_idx[pos:pos + m] = k
        within_idx[pos:pos + m] = np.arange(m)
        vec_all[sl, pos:pos + m] = vec
        pos += m
    # Primary key: descending eigenvalue; exact ties fall back to block
    # index, then the block's own ordering.
    order = np.lexsort((within_idx, block_idx, -lam_all))
    return Spectrum(
        eigenvalues=lam_all[order],
        eigenvectors=vec_all[:, order],
        structure=structure,
        block_support=tuple(int(b) for b in block_idx[order]),
    )


def _validate_spectrum(norm: NormalizedAdjacency, spec: Spectrum) -> None:
    lam, vec = spec.eigenvalues, spec.eigenvectors
    n = spec.n
    if np.any(np.diff(lam) > 1e-12):
        raise AssertionError("eigenvalues are not sorted descending")
    if float(np.abs(lam).max()) > 1.0 + NEG_EIG_TOL:
        raise AssertionError("an eigenvalue leaves [-1, 1]; input was not a "
                             "normalized adjacency")
    gram = vec.T @ vec
    if float(np.abs(gram - np.eye(n)).max()) > 1e-9:
        raise AssertionError("eigenvectors are not orthonormal")
    resid = norm.matrix @ vec - vec * lam[None, :]
    if float(np.abs(resid).max()) > 1e-8:
        raise AssertionError("eigen residual exceeds 1e-8")


def build_representation(
    spec: Spectrum, p: int, rotation_seed: Optional[int] = None
) -> RepresentationMatrix:
    """Embedding from the top-p eigenpairs, optionally rotated.

    Refuses p below the number of sub-classes (the theory needs every
    block's leading eigenvector present) and any top-p eigenvalue below
    -1e-9; eigenvalues in [-1e-9, 0) are clipped to zero before the square
    root.
    """
    kbar = spec.structure.num_subclasses
    if not (kbar <= p <= spec.n):
        raise ValueError(f"rank p={p} must lie in [{kbar}, {spec.n}]")
    lam = spec.eigenvalues[:p]
    if lam[-1] < -NEG_EIG_TOL:
        raise ValueError(
            f"eigenvalue {lam[-1]!r} at cut index {p} is too negative to embed"
        )
    scale = np.sqrt(np.clip(lam, 0.0, None))
    f = spec.eigenvectors[:, :p] * scale[None, :]
    if rotation_seed is not None:
        f = f @ random_orthogonal(philox(rotation_seed, STREAM_ROTATION), p)
    return RepresentationMatrix(values=f, rank_p=p, source_spectrum_hash=spec.digest())


def factorization_loss(norm: NormalizedAdjacency, rep) -> float:
    """||M - F F^T||_F^2 for the given embedding."""
    f = rep.values if isinstance(rep, RepresentationMatrix) else np.asarray(rep, float)
    if f.shape[0] != norm.n:
        raise ValueError(f"embedding has {f.shape[0]} rows, graph has {norm.n}")
    return float(np.linalg.norm(norm.matrix - f @ f.T, "fro") ** 2)


def verify_column_ratio(norm: NormalizedAdjacency) -> float:
    """Largest in-block same-column entry ratio of the normalized matrix,
    minus one.  Only defined for block-diagonal input."""
    if not norm.is_block_diagonal():
        raise ValueError("column-ratio measurement requires a block-diagonal matrix")
    worst = 1.0
    scale = float(norm.matrix.max())
    tol = 1e-12 * scale if scale > 0 else 0.0
    for sl in norm.structure.subclass_slices():
        block = norm.matrix[sl, sl]
        pos = block > tol
        all_pos = pos.all(axis=0)
        if (pos.any(axis=0) & ~all_pos).any():
            return float("inf")
        if all_pos.any():
            ratio = block.max(axis=0)[all_pos] / block.min(axis=0)[all_pos]
            worst = max(worst, float(ratio.max()))
    return worst - 1.0
