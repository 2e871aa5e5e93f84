"""Executable inequality checks for the clustered-graph spectral theory.

Every check evaluates one explicit inequality relating measured spectral
quantities of a block-diagonal normalized graph to closed-form expressions
in the block sizes and the column-ratio slack ``delta_prime``.  Where the
underlying statement carries an unknown asymptotic constant (residual-norm
scaling in the number of blocks, projection-alignment drop) the check is a
trend fit with a documented window instead of a hard inequality.

All evaluators are pure and return :class:`BoundReport` values; a report
``holds`` when its inequality is satisfied with slack no worse than -1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .embedding import Spectrum, normalize, verify_column_ratio
from .graphs import (
    AdjacencyMatrix,
    delta_prime_from_delta,
    measure_delta,
    split_block_and_residual,
    synthesize_structured,
)
from .labels import LabelMatrix
from .structure import SubclassStructure

SLACK_TOL = 1e-9

UPPER = "upper"
LOWER = "lower"


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one inequality check.

    ``slack`` is oriented so that nonnegative slack means the inequality
    holds: bound - observed for upper bounds, observed - bound for lower
    bounds.
    """

    name: str
    bound_value: float
    observed_value: float
    holds: bool
    slack: float
    direction: str = UPPER

    @classmethod
    def make(cls, name: str, bound: float, observed: float, direction: str) -> "BoundReport":
        if direction == UPPER:
            slack = bound - observed
        elif direction == LOWER:
            slack = observed - bound
        else:
            raise ValueError(f"unknown direction {direction!r}")
        return cls(
            name=name,
            bound_value=float(bound),
            observed_value=float(observed),
            holds=bool(slack >= -SLACK_TOL),
            slack=float(slack),
            direction=direction,
        )


@dataclass(frozen=True)
class ToleranceInputs:
    """Structure constants feeding the flip-noise tolerance formula."""

    num_classes: int
    num_subclasses: int
    n_min: int
    n_max: int
    c_max: float
    delta: float
    delta_prime: float
    beta: float
    p: int

    def __post_init__(self):
        if self.num_subclasses < self.num_classes or self.num_classes < 2:
            raise ValueError("need num_subclasses >= num_classes >= 2")
        if not (0 < self.n_min <= self.n_max):
            raise ValueError("need 0 < n_min <= n_max")
        lo = 1.0 / (self.num_classes - 1)
        if not (lo - 1e-12 <= self.c_max <= 1.0 + 1e-12):
            raise ValueError(
                f"c_max={self.c_max} outside [1/(K-1), 1] = [{lo}, 1]"
            )
        if self.delta < 0 or self.delta_prime < 0 or self.beta < 0:
            raise ValueError("delta, delta_prime and beta must be nonnegative")
        if self.p < self.num_subclasses:
            raise ValueError("embedding rank p must be at least the sub-class count")

    @classmethod
    def from_structure(
        cls,
        structure: SubclassStructure,
        c_max: float,
        delta: float,
        beta: float,
        p: int,
    ) -> "ToleranceInputs":
        return cls(
            num_classes=structure.num_classes,
            num_subclasses=structure.num_subclasses,
            n_min=structure.n_min,
            n_max=structure.n_max,
            c_max=c_max,
            delta=delta,
            delta_prime=delta_prime_from_delta(delta),
            beta=beta,
            p=p,
        )


@dataclass(frozen=True)
class FlipTolerance:
    """Largest guaranteed-recoverable corrupted fraction, with the
    worst-case Perron-entry bounds used to produce it."""

    alpha_max: float
    e_min: float
    e_max: float
    vacuous: bool  # True when the slack term already exceeds 1 (delta too large)


@dataclass(frozen=True)
class ScalingResult:
    """Log-log fit of residual norm against sub-class count."""

    exponent: Optional[float]
    kbars: tuple[int, ...]
    norms: tuple[float, ...]
    degenerate: bool


def perron_l1_lower_bound(n_k: int, delta_prime: float) -> float:
    """Lower bound on ||v||_1^2 for a block's unit Perron vector."""
    if n_k < 1 or delta_prime < 0:
        raise ValueError("need n_k >= 1 and delta_prime >= 0")
    return n_k**2 / (1.0 + (n_k - 1) * (1.0 + delta_prime) ** 2)


def block_tail_radicand(n_k: int, delta_prime: float) -> float:
    """Upper bound on the sum of squared non-leading eigenvalues of a block.

    Equals (1 + (n_k - 1)(1 + d)^2)(1 + d)^2 / n_k - 1, clamped at zero
    since rounding can push it infinitesimally negative at d = 0.
    """
    g = (1.0 + delta_prime) ** 2
    return max(0.0, (1.0 + (n_k - 1) * g) * g / n_k - 1.0)


def eigenvalue_tail_bounds(n_k: int, delta_prime: float, p_k: int):
    """(per-eigenvalue cap, cap on the sum of the 2nd..p_k-th eigenvalues).

    The sum cap is the exact Cauchy-Schwarz consequence of the squared-sum
    bound; no asymptotic remainder is involved.
    """
    if p_k > n_k:
        raise ValueError(f"p_k={p_k} cannot exceed block size {n_k}")
    per = math.sqrt(block_tail_radicand(n_k, delta_prime))
    if p_k < 2:
        return per, 0.0
    return per, math.sqrt(p_k - 1) * per


def perron_entry_bounds(n_min: int, n_max: int, delta_prime: float):
    """(floor on min entry, ceiling on max entry, ceiling on max/min ratio)
    over the unit Perron vectors of all blocks."""
    g = (1.0 + delta_prime) ** 2
    e_min = math.sqrt(1.0 / (1.0 + (n_max - 1) * g))
    e_max = math.sqrt(1.0 / (1.0 + (n_min - 1) / g))
    ratio = (1.0 + delta_prime) * math.sqrt(
        (1.0 + g * (n_max - 1)) / (n_max - 1 + g)
    )
    return e_min, e_max, ratio


def total_tail_sum_bound(sizes: Sequence[int], delta_prime: float, p: int) -> float:
    """Cap on the sum of eigenvalues ranked K_bar+1 .. p across all blocks."""
    q = p - len(sizes)
    if q <= 0:
        return 0.0
    total_sq = sum(block_tail_radicand(m, delta_prime) for m in sizes)
    return math.sqrt(q) * math.sqrt(total_sq)


def gaussian_error_bounds(
    spec: Spectrum,
    clean: LabelMatrix,
    p: int,
    beta: float,
    sigma: float,
    delta_prime: float,
):
    """Explicit caps on the exact expected bias^2 and variance.

    Only valid for block-diagonal graphs (disconnected sub-classes).  The
    bias cap drops the nonpositive tail terms of the exact expectation and
    lower-bounds the Perron alignment; the variance cap relaxes the tail
    shrinkages through the Cauchy-Schwarz tail-sum cap.  Returns the pair
    of reports (bias, variance) with the exact closed-form values as the
    observed side.
    """
    from .probe import expected_error_closed_form

    if spec.block_support is None:
        raise ValueError("explicit error bounds need a block-diagonal graph")
    structure = spec.structure
    n, kbar = structure.total, structure.num_subclasses
    if p < kbar:
        raise ValueError("rank p below the sub-class count is outside the theory")

    observed = expected_error_closed_form(spec, p, clean, beta, sigma)

    shrink = 1.0 / (1.0 + beta)
    perron_mass = sum(perron_l1_lower_bound(m, delta_prime) for m in structure.sizes)
    bias_bound = 1.0 - (2.0 * shrink - shrink**2) * perron_mass / n

    q = p - kbar
    head = sigma**2 * kbar / n * shrink**2
    if q == 0:
        tail = 0.0
    elif beta == 0.0:
        s = total_tail_sum_bound(structure.sizes, delta_prime, p)
        tail = 0.0 if s == 0.0 else sigma**2 * q / n
    else:
        s = total_tail_sum_bound(structure.sizes, delta_prime, p)
        tail = sigma**2 / n * (q - beta * q**2 / (s + q * beta))
    variance_bound = head + tail

    bias_report = BoundReport.make(
        "gaussian-bias-cap", bias_bound, observed.bias_sq, UPPER
    )
    variance_report = BoundReport.make(
        "gaussian-variance-cap", variance_bound, observed.variance, UPPER
    )
    return bias_report, variance_report


def flip_tolerance(inputs: ToleranceInputs) -> FlipTolerance:
    """Explicit corrupted-fraction threshold guaranteeing full recovery.

    Uses the worst-case substitution of the Perron-entry floor for both the
    anchor entry and the scale in the slack term.  At delta_prime = 0 the
    threshold reduces exactly to 1 / (1 + (n_max / n_min) c_max).  A
    nonpositive numerator means the compactness slack is too large for any
    guarantee; alpha_max is then 0 and the result is flagged vacuous.
    """
    dp = inputs.delta_prime
    e_min, e_max, ratio_ub = perron_entry_bounds(inputs.n_min, inputs.n_max, dp)
    if dp == 0.0:
        fluct = 0.0
    elif inputs.beta == 0.0:
        fluct = math.inf
    else:
        beta_shrink = inputs.beta / (inputs.beta + 1.0)
        fluct = (
            2.0
            * math.sqrt(inputs.n_max)
            * (1.0 + math.sqrt(inputs.c_max))
            * math.sqrt(inputs.p - 1)
            * math.sqrt(dp)
            / (beta_shrink * e_min**2 * inputs.n_min)
        )
    numerator = 1.0 - fluct
    denominator = 1.0 + (inputs.n_max / inputs.n_min) * ratio_ub * inputs.c_max
    if numerator <= 0.0:
        return FlipTolerance(alpha_max=0.0, e_min=e_min, e_max=e_max, vacuous=True)
    return FlipTolerance(
        alpha_max=numerator / denominator, e_min=e_min, e_max=e_max, vacuous=False
    )


def weyl_check(
    eigs_clean: np.ndarray, eigs_perturbed: np.ndarray, e_operator_norm: float
) -> BoundReport:
    """Eigenvalue stability: every sorted eigenvalue moves at most ||E||_2.

    This is a theorem for symmetric perturbations, so a failing report
    indicates an implementation bug rather than a property of the input.
    """
    a = np.asarray(eigs_clean, dtype=float)
    b = np.asarray(eigs_perturbed, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"spectra have different shapes {a.shape} vs {b.shape}")
    observed = float(np.abs(b - a).max())
    return BoundReport.make("eigenvalue-shift-cap", float(e_operator_norm), observed, UPPER)


def projection_alignment(spec: Spectrum, top_count: int, labels) -> float:
    """Squared Frobenius mass of the labels inside the leading eigenspace."""
    y = labels.values if isinstance(labels, LabelMatrix) else np.asarray(labels, float)
    if y.ndim == 1:
        y = y[:, None]
    basis = spec.top_projector_basis(top_count)
    return float(np.linalg.norm(basis.T @ y, "fro") ** 2)


def perturbation_norm_scaling(
    structures: Sequence[SubclassStructure],
    delta: float,
    xi: float,
    base_weight: float,
    seed: int,
) -> ScalingResult:
    """Fit how the off-block residual norm grows with the sub-class count.

    Requires at least three balanced structures with a common block size and
    strictly increasing sub-class counts.  With xi = 0 every residual is
    zero and the fit is reported degenerate.
    """
    if len(structures) < 3:
        raise ValueError("need at least 3 structures to fit a scaling exponent")
    sizes = {s.sizes[0] for s in structures}
    if any(len(set(s.sizes)) != 1 for s in structures) or len(sizes) != 1:
        raise ValueError("scaling fit requires balanced structures of one block size")
    kbars = [s.num_subclasses for s in structures]
    if any(prev >= nxt for prev, nxt in zip(kbars, kbars[1:])):
        raise ValueError("sub-class counts must be strictly increasing")
    norms = []
    for s in structures:
        adj = synthesize_structured(s, delta, xi, base_weight, seed)
        _, _, resid = split_block_and_residual(adj)
        norms.append(resid)
    if min(norms) <= 0.0:
        return ScalingResult(
            exponent=None, kbars=tuple(kbars), norms=tuple(norms), degenerate=True
        )
    slope = np.polyfit(np.log(kbars), np.log(norms), 1)[0]
    return ScalingResult(
        exponent=float(slope), kbars=tuple(kbars), norms=tuple(norms), degenerate=False
    )


def lemma_reports(adj: AdjacencyMatrix, spec: Spectrum, p: int) -> list[BoundReport]:
    """All block-structure inequality checks for one disconnected graph.

    Uses the measured compactness slack of ``adj`` (so the bounds are fed
    exactly what the assumptions guarantee) and reports, per inequality,
    the block with the worst slack.
    """
    if spec.block_support is None:
        raise ValueError("lemma checks need a block-diagonal spectrum")
    structure = adj.structure
    if p < structure.num_subclasses:
        raise ValueError("rank p below the sub-class count is outside the theory")
    delta = measure_delta(adj)
    if not math.isfinite(delta):
        raise ValueError("graph violates the compactness assumption (delta = inf)")
    dp = delta_prime_from_delta(delta)
    norm = normalize(adj)
    kbar = structure.num_subclasses

    reports = [
        BoundReport.make("column-ratio-cap", dp, verify_column_ratio(norm), UPPER),
        BoundReport.make(
            "unit-top-eigenvalues",
            1e-9,
            float(np.abs(spec.eigenvalues[:kbar] - 1.0).max()),
            UPPER,
        ),
    ]

    support = np.asarray(spec.block_support)
    p_counts = spec.per_block_counts(p)
    per_block: dict[str, tuple] = {}

    def consider(name: str, bound: float, observed: float, direction: str):
        slack = bound - observed if direction == UPPER else observed - bound
        if name not in per_block or slack < per_block[name][0]:
            per_block[name] = (slack, bound, observed, direction)

    e_min_lb, e_max_ub, ratio_ub = perron_entry_bounds(
        structure.n_min, structure.n_max, dp
    )
    for k in range(kbar):
        m = structure.sizes[k]
        cols = np.nonzero(support == k)[0]
        lam_block = spec.eigenvalues[cols]
        perron = spec.eigenvectors[structure.subclass_slice(k), cols[0]]

        consider(
            "perron-l1-mass",
            perron_l1_lower_bound(m, dp),
            float(np.abs(perron).sum() ** 2),
            LOWER,
        )
        consider(
            "block-eigsq-sum",
            block_tail_radicand(m, dp) + 1.0,
            float((lam_block**2).sum()),
            UPPER,
        )
        per_eig, _ = eigenvalue_tail_bounds(m, dp, m)
        if lam_block.shape[0] > 1:
            consider("tail-eigenvalue-cap", per_eig, float(lam_block[1:].max()), UPPER)
        p_k = p_counts.get(k, 1)
        _, sum_cap = eigenvalue_tail_bounds(m, dp, p_k)
        consider(
            "tail-eigenvalue-sum-cap",
            sum_cap,
            float(lam_block[1:p_k].sum()) if p_k > 1 else 0.0,
            UPPER,
        )
        consider("perron-entry-floor", e_min_lb, float(perron.min()), LOWER)
        consider("perron-entry-ceiling", e_max_ub, float(perron.max()), UPPER)
        consider(
            "perron-entry-spread", ratio_ub, float(perron.max() / perron.min()), UPPER
        )

    for name, (_, bound, observed, direction) in per_block.items():
        reports.append(BoundReport.make(name, bound, observed, direction))
    return reports
