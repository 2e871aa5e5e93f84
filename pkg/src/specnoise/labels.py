"""Clean one-hot labels and the two corruption models.

Gaussian corruption adds independent noise of per-column covariance
(sigma^2 / K) I to the one-hot matrix.  Flip corruption relabels, within
each sub-class, exactly ``floor(alpha * size)`` uniformly chosen rows to
other classes according to a per-sub-class target distribution; realized
per-target counts follow the largest-remainder rounding of that
distribution, so they are as close to it as integer counts allow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import STREAM_FLIP, STREAM_GAUSSIAN, gaussians, philox
from .structure import SubclassStructure

KIND_CLEAN = "clean"
KIND_GAUSSIAN = "gaussian-noisy"
KIND_FLIP = "flip-noisy"

#: Absorbs float slop in alpha * size so e.g. 0.85 * 100 floors to 85.
_COUNT_EPS = 1e-9


@dataclass(frozen=True)
class LabelMatrix:
    values: np.ndarray  # (n, K)
    kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.kind not in (KIND_CLEAN, KIND_GAUSSIAN, KIND_FLIP):
            raise ValueError(f"unknown label kind {self.kind!r}")
        if self.kind in (KIND_CLEAN, KIND_FLIP):
            one_hot = (v == 1.0).sum(axis=1) == 1
            zero_rest = (v == 0.0).sum(axis=1) == v.shape[1] - 1
            if not (one_hot & zero_rest).all():
                raise ValueError(f"{self.kind} labels must be one-hot rows")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]

    def class_indices(self) -> np.ndarray:
        return np.argmax(self.values, axis=1)


@dataclass(frozen=True)
class FlipSpec:
    """Per-sub-class corrupted fraction and wrong-label target distribution.

    ``flip_dist[k_bar, k]`` is the fraction of sub-class k_bar's corrupted
    rows sent to class k.  It must be zero on the sub-class's own class and
    sum to one over the rest.
    """

    alphas: np.ndarray      # (K_bar,)
    flip_dist: np.ndarray   # (K_bar, K)
    seed: int

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        d = np.asarray(self.flip_dist, dtype=float)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "flip_dist", d)
        if ((a < 0) | (a > 1)).any():
            raise ValueError("alphas must lie in [0, 1]")
        if (d < 0).any():
            raise ValueError("flip_dist entries must be nonnegative")
        sums = d.sum(axis=1)
        if np.abs(sums - 1.0).max() > 1e-12:
            raise ValueError("each flip_dist row must sum to 1")

    def validate_against(self, structure: SubclassStructure) -> None:
        kbar, k = self.flip_dist.shape
        if kbar != structure.num_subclasses or k != structure.num_classes:
            raise ValueError(
                f"flip_dist shape {self.flip_dist.shape} does not match "
                f"({structure.num_subclasses}, {structure.num_classes})"
            )
        own = np.asarray(structure.class_of)
        mass_on_own = self.flip_dist[np.arange(kbar), own]
        if (mass_on_own != 0.0).any():
            bad = np.nonzero(mass_on_own)[0].tolist()
            raise ValueError(f"flip_dist assigns mass to the own class of sub-classes {bad}")

    def c_max(self) -> float:
        return float(self.flip_dist.max())


def clean_labels(structure: SubclassStructure) -> LabelMatrix:
    """Row i gets the basis vector of its sub-class's class."""
    classes = structure.class_of_rows()
    values = np.zeros((structure.total, structure.num_classes))
    values[np.arange(structure.total), classes] = 1.0
    return LabelMatrix(values=values, kind=KIND_CLEAN)


def gaussian_noise(labels: LabelMatrix, sigma: float, seed: int) -> LabelMatrix:
    """Add N(0, sigma^2 / K) noise independently to every entry."""
    if labels.kind != KIND_CLEAN:
        raise ValueError(f"gaussian noise needs clean labels, got {labels.kind!r}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    n, k = labels.values.shape
    delta = gaussians(philox(seed, STREAM_GAUSSIAN), (n, k)) * (sigma / np.sqrt(k))
    return LabelMatrix(values=labels.values + delta, kind=KIND_GAUSSIAN)


def symmetric_flip_spec(structure: SubclassStructure, alpha: float, seed: int) -> FlipSpec:
    """Every eligible wrong class receives fraction 1 / (K - 1)."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    kbar, k = structure.num_subclasses, structure.num_classes
    dist = np.full((kbar, k), 1.0 / (k - 1))
    dist[np.arange(kbar), np.asarray(structure.class_of)] = 0.0
    return FlipSpec(alphas=np.full(kbar, alpha), flip_dist=dist, seed=seed)


def flip_noise(labels: LabelMatrix, structure: SubclassStructure, spec: FlipSpec):
    """Corrupt labels by relabeling rows; returns (noisy labels, counts).

    ``counts[k_bar, k]`` is the realized number of sub-class k_bar rows
    relabeled to class k.  Within each sub-class, exactly
    floor(alpha * size) rows are corrupted, chosen uniformly without
    replacement; per-target counts are the largest-remainder rounding of
    flip_dist (remainder ties broken in a seeded order).
    """
    if labels.kind != KIND_CLEAN:
        raise ValueError(f"flip noise needs clean labels, got {labels.kind!r}")
    spec.validate_against(structure)
    gen = philox(spec.seed, STREAM_FLIP)
    values = labels.values.copy()
    kbar, num_classes = spec.flip_dist.shape
    counts = np.zeros((kbar, num_classes), dtype=int)
    own = np.asarray(structure.class_of)
    for k_bar in range(kbar):
        sl = structure.subclass_slice(k_bar)
        size = structure.sizes[k_bar]
        m = int(np.floor(spec.alphas[k_bar] * size + _COUNT_EPS))
        tie_order = gen.permutation(num_classes)
        row_order = gen.permutation(size)
        if m == 0:
            continue
        per_target = _largest_remainder(spec.flip_dist[k_bar], m, tie_order)
        rows = sl.start + row_order[:m]
        cursor = 0
        for k in range(num_classes):
            take = per_target[k]
            if take == 0:
                continue
            sel = rows[cursor:cursor + take]
            cursor += take
            values[sel, own[k_bar]] = 0.0
            values[sel, k] = 1.0
            counts[k_bar, k] = take
    return LabelMatrix(values=values, kind=KIND_FLIP), counts


def _largest_remainder(dist: np.ndarray, m: int, tie_order: np.ndarray) -> np.ndarray:
    """Integer counts summing to m, closest to dist * m in l1."""
    raw = dist * m
    base = np.floor(raw + _COUNT_EPS).astype(int)
    remainder = raw - base
    shortfall = m - int(base.sum())
    if shortfall > 0:
        # Highest remainders win the leftover units; ties follow tie_order.
        order = np.lexsort((tie_order, -remainder))
        base[order[:shortfall]] += 1
    elif shortfall < 0:
        # Float slop rounded too many up; claw back from smallest remainders.
        order = np.lexsort((tie_order, remainder))
        for idx in order:
            if shortfall == 0:
                break
            if base[idx] > 0:
                base[idx] -= 1
                shortfall += 1
    return base
