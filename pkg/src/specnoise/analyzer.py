"""Singular-spectrum and label-alignment profiling for arbitrary matrices.

Works on any loaded matrix: the alignment report splits a target vector
into its components inside and outside the span of the leading left
singular vectors, and the gap report summarizes how much singular-value
mass the head carries.  Nothing here assumes the matrix came from this
package's graph pipeline.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

#: Relative gap below which the subspace at the cutoff is ill-defined.
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class AlignmentReport:
    top_k: int
    pi_i_norm: float          # mass of y inside the top-k left singular span
    pi_n_norm: float          # mass of y outside it
    ratio: float              # ||J J^T y|| / ||J J^T||_F
    singular_values: np.ndarray


def _check_cutoff_tie(s: np.ndarray, top_k: int) -> None:
    if 0 < top_k < s.shape[0]:
        gap = s[top_k - 1] - s[top_k]
        if gap <= _TIE_RTOL * max(s[0], 1e-300):
            warnings.warn(
                f"singular values {top_k - 1} and {top_k} are tied; the "
                "selected subspace is not unique (index-order tie-break used)",
                stacklevel=3,
            )


def alignment_report(matrix: np.ndarray, y: np.ndarray, top_k: int) -> AlignmentReport:
    """Project y onto the span of the top_k left singular vectors of matrix."""
    j = np.asarray(matrix, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if j.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {j.shape}")
    if j.shape[0] != y.shape[0]:
        raise ValueError(f"matrix has {j.shape[0]} rows but y has {y.shape[0]} entries")
    if not (1 <= top_k <= min(j.shape)):
        raise ValueError(f"top_k={top_k} out of range for shape {j.shape}")
    u, s, _ = np.linalg.svd(j, full_matrices=False)
    _check_cutoff_tie(s, top_k)
    head = u[:, :top_k]
    coords = head.T @ y
    inside = float(np.linalg.norm(coords))
    # residual computed directly; subtracting squared norms loses precision
    outside = float(np.linalg.norm(y - head @ coords))
    jjt_norm = float(np.linalg.norm(s**2))
    if jjt_norm == 0.0:
        raise ValueError("matrix is zero; alignment ratio undefined")
    ratio = float(np.linalg.norm(j @ (j.T @ y))) / jjt_norm
    return AlignmentReport(
        top_k=top_k,
        pi_i_norm=inside,
        pi_n_norm=outside,
        ratio=ratio,
        singular_values=s,
    )


def spectrum_gap(matrix: np.ndarray, top_k: int):
    """(head_mass, tail_mass): share of singular-value sum in the top_k."""
    j = np.asarray(matrix, dtype=float)
    if j.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {j.shape}")
    if not (1 <= top_k <= min(j.shape)):
        raise ValueError(f"top_k={top_k} out of range for shape {j.shape}")
    s = np.linalg.svd(j, compute_uv=False)
    total = float(s.sum())
    if total == 0.0:
        raise ValueError("matrix is zero; spectrum mass undefined")
    _check_cutoff_tie(s, top_k)
    head = float(s[:top_k].sum()) / total
    return head, 1.0 - head
