"""Construction and measurement of clustered augmentation graphs.

The graph lives over all augmented data points.  An edge weight is the
marginal probability that both endpoints arise as augmentations of one
random natural datum, so weights are symmetric and nonnegative.  Two
constants summarize how cluster-like the graph is:

* ``delta`` (compactness): the largest multiplicative slack, over ordered
  same-sub-class row pairs (s, t) and every column j, of w[s, j] / w[t, j].
  The 0/0 case counts as ratio 1.
* ``xi`` (distinguishability): the largest cross-sub-class weight divided
  by the smallest same-sub-class weight.  ``xi = 0`` means the sub-class
  subgraphs are disconnected from each other.

``synthesize_structured`` manufactures graphs meeting chosen targets for
both constants by construction, which the theory suites rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IsolatedVertexError
from .rng import STREAM_BLOCKPAIR, STREAM_INBLOCK, STREAM_OFFBLOCK, philox
from .structure import SubclassStructure, in_block_mask

#: Entries at or below ``ZERO_RTOL * max(weights)`` are treated as exact zeros
#: in all ratio measurements.
ZERO_RTOL = 1e-12

#: Dense-only storage: the O(n^3) eigensolve dominates well before this size.
MAX_DENSE_POINTS = 4096

_SYMMETRY_RTOL = 1e-12


def _check_size(n: int) -> None:
    if n > MAX_DENSE_POINTS:
        raise ValueError(
            f"{n} points exceed the dense-storage cap of {MAX_DENSE_POINTS}"
        )


def delta_prime_from_delta(delta: float) -> float:
    """Column-ratio slack of the normalized graph implied by weight slack delta.

    Normalizing w[i, j] by sqrt(row sums) turns a (1 + delta) weight-ratio
    bound into a (1 + delta) ** 1.5 bound on same-column entry ratios, so the
    derived constant is (1 + delta) ** 1.5 - 1.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    return (1.0 + delta) ** 1.5 - 1.0


@dataclass(frozen=True)
class DiscreteAugmentationModel:
    """Finite augmentation process: natural-point distribution and a
    row-stochastic matrix of augmentation probabilities."""

    natural_probs: np.ndarray  # (m,)
    aug_probs: np.ndarray      # (m, n), row (x*, .) is the distribution A(.|x*)

    def __post_init__(self):
        p = np.asarray(self.natural_probs, dtype=float)
        a = np.asarray(self.aug_probs, dtype=float)
        object.__setattr__(self, "natural_probs", p)
        object.__setattr__(self, "aug_probs", a)
        if p.ndim != 1 or a.ndim != 2 or a.shape[0] != p.shape[0]:
            raise ValueError(
                f"shape mismatch: natural_probs {p.shape}, aug_probs {a.shape}"
            )
        if (p < 0).any() or (a < 0).any():
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"natural_probs sums to {p.sum()!r}, not 1")
        rows = a.sum(axis=1)
        bad = np.abs(rows - 1.0) > 1e-12
        if bad.any():
            raise ValueError(f"aug_probs rows {np.nonzero(bad)[0].tolist()} do not sum to 1")

    @property
    def num_natural(self) -> int:
        return self.natural_probs.shape[0]

    @property
    def num_augmented(self) -> int:
        return self.aug_probs.shape[1]


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Dense symmetric nonnegative weights over all augmented points."""

    weights: np.ndarray
    structure: SubclassStructure

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        n = self.structure.total
        _check_size(n)
        if w.shape != (n, n):
            raise ValueError(f"weights shape {w.shape} does not match n={n}")
        scale = max(1.0, float(np.abs(w).max()))
        if np.abs(w - w.T).max() > _SYMMETRY_RTOL * scale:
            raise ValueError("weights matrix is not symmetric")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        rowsums = w.sum(axis=1)
        dead = np.nonzero(rowsums <= 0.0)[0]
        if dead.size:
            raise IsolatedVertexError(
                f"rows {dead.tolist()} have zero total weight (isolated vertices)"
            )

    @property
    def n(self) -> int:
        return self.structure.total


@dataclass(frozen=True)
class AssumptionReport:
    """Measured compactness / distinguishability constants of a graph."""

    delta: float
    delta_prime: float
    xi: float


def _zero_tol(weights: np.ndarray) -> float:
    return ZERO_RTOL * float(weights.max())


def build_from_discrete_model(
    model: DiscreteAugmentationModel, structure: SubclassStructure
) -> AdjacencyMatrix:
    """Exact edge weights of the discrete augmentation process.

    w[i, j] = sum over natural points x* of P(x*) A(x_i|x*) A(x_j|x*).
    """
    if model.num_augmented != structure.total:
        raise ValueError(
            f"model covers {model.num_augmented} augmented points, "
            f"structure has {structure.total}"
        )
    a = model.aug_probs
    w = a.T @ (model.natural_probs[:, None] * a)
    w = 0.5 * (w + w.T)  # kill rounding asymmetry from the matmul
    return AdjacencyMatrix(weights=w, structure=structure)


def synthesize_structured(
    structure: SubclassStructure,
    delta_target: float,
    xi_target: float,
    base_weight: float,
    seed: int,
) -> AdjacencyMatrix:
    """Random graph whose measured delta and xi never exceed the targets.

    In-block entries are ``base_weight * exp(u * log(1 + delta) / 2)`` with
    symmetric u ~ U[-1, 1], so every same-column in-block ratio is capped at
    1 + delta by construction.  Cross-block entries reuse the same
    exponent recipe around a per-block-pair level drawn in
    [0, xi * min in-block weight], which caps cross-column ratios at
    1 + delta as well (plain independent uniforms would make ratios of
    cross-block columns unbounded and break the delta cap).  A final
    verification pass rescales the exponents in the (float-rounding only)
    event that the measured delta exceeds the target.

    Deterministic in (structure, targets, base_weight, seed).
    """
    if not (0.0 <= delta_target < 1.0):
        raise ValueError(f"delta_target must be in [0, 1), got {delta_target}")
    if not (0.0 <= xi_target < 1.0):
        raise ValueError(f"xi_target must be in [0, 1), got {xi_target}")
    if base_weight <= 0:
        raise ValueError(f"base_weight must be positive, got {base_weight}")

    n = structure.total
    _check_size(n)
    kbar = structure.num_subclasses
    mask = in_block_mask(structure)
    labels = structure.subclass_of_rows()

    u_in = _symmetric_unit(philox(seed, STREAM_INBLOCK).random((n, n)))
    u_off = _symmetric_unit(philox(seed, STREAM_OFFBLOCK).random((n, n)))
    pair_levels = _symmetric_upper(philox(seed, STREAM_BLOCKPAIR).random((kbar, kbar)))

    log_ratio = math.log1p(delta_target)
    for _ in range(8):
        w = _assemble(structure, mask, labels, u_in, u_off, pair_levels,
                      log_ratio, xi_target, base_weight)
        adj = AdjacencyMatrix(weights=w, structure=structure)
        measured = measure_delta(adj)
        if measured <= delta_target:
            return adj
        # Only reachable through rounding: shrink the exponent range a touch.
        log_ratio *= 0.999
    raise RuntimeError("delta rescale pass failed to converge")  # pragma: no cover


def _symmetric_unit(r: np.ndarray) -> np.ndarray:
    """Map uniforms in [0,1) to a symmetric matrix of values in [-1, 1]."""
    sym = np.triu(r) + np.triu(r, 1).T
    return 2.0 * sym - 1.0


def _symmetric_upper(r: np.ndarray) -> np.ndarray:
    return np.triu(r) + np.triu(r, 1).T


def _assemble(structure, mask, labels, u_in, u_off, pair_levels,
              log_ratio, xi_target, base_weight) -> np.ndarray:
    half = 0.5 * log_ratio
    w = np.where(mask, base_weight * np.exp(u_in * half), 0.0)
    if xi_target > 0.0:
        min_in = float(w[mask].min())
        levels = pair_levels[labels[:, None], labels[None, :]]
        cross = xi_target * min_in * math.exp(-half) * levels * np.exp(u_off * half)
        w = np.where(mask, w, cross)
    return w


def measure_delta(adj: AdjacencyMatrix) -> float:
    """Smallest delta for which the compactness assumption holds.

    Scans ordered same-sub-class row pairs against every column.  Columns
    where the whole block is zero count as ratio 1; a column mixing zero and
    positive entries within a block makes the assumption unsatisfiable and
    yields +inf.
    """
    w = adj.weights
    tol = _zero_tol(w)
    worst = 1.0
    for sl in adj.structure.subclass_slices():
        block_rows = w[sl, :]
        pos = block_rows > tol
        any_pos = pos.any(axis=0)
        all_pos = pos.all(axis=0)
        if (any_pos & ~all_pos).any():
            return math.inf
        if all_pos.any():
            cmax = block_rows.max(axis=0)[all_pos]
            cmin = block_rows.min(axis=0)[all_pos]
            worst = max(worst, float(np.max(cmax / cmin)))
    return worst - 1.0


def measure_xi(adj: AdjacencyMatrix) -> float:
    """Max cross-sub-class weight over min same-sub-class weight."""
    w = adj.weights
    tol = _zero_tol(w)
    mask = in_block_mask(adj.structure)
    min_in = float(w[mask].min())
    if min_in <= tol:
        raise ValueError(
            "a same-sub-class weight is zero; the ratio assumptions do not apply"
        )
    cross = w[~mask]
    if cross.size == 0:
        raise ValueError("structure has a single sub-class; no cross pairs exist")
    max_cross = float(cross.max())
    if max_cross <= tol:
        return 0.0
    return max_cross / min_in


def assumption_report(adj: AdjacencyMatrix) -> AssumptionReport:
    d = measure_delta(adj)
    return AssumptionReport(
        delta=d,
        delta_prime=delta_prime_from_delta(d) if math.isfinite(d) else math.inf,
        xi=measure_xi(adj),
    )


def split_block_and_residual(adj: AdjacencyMatrix):
    """Separate the graph into its block-diagonal normalization and the rest.

    Returns ``(bar, tilde, residual_frobenius)`` where ``bar`` normalizes the
    weights with every cross-block entry zeroed beforehand, ``tilde``
    normalizes the full weights, and the residual is ||tilde - bar||_F.
    """
    from .embedding import normalize  # local import to avoid a cycle

    w_in = np.where(in_block_mask(adj.structure), adj.weights, 0.0)
    if (w_in.sum(axis=1) <= 0.0).any():
        raise IsolatedVertexError("a row has zero in-block weight; cannot split")
    bar = normalize(AdjacencyMatrix(weights=w_in, structure=adj.structure))
    tilde = normalize(adj)
    residual = float(np.linalg.norm(tilde.matrix - bar.matrix, "fro"))
    return bar, tilde, residual
