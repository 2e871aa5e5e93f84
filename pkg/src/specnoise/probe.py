"""Closed-form ridge probe on an embedding, evaluated against clean labels.

The probe solves min_W ||Y_noisy - F W||_F^2 + beta ||W||_F^2 through the
normal equations (F^T F + beta I) W = F^T Y_noisy, factoring only the p x p
Gram matrix.  Because F's Gram is diagonal in its singular basis, both the
prediction matrix F W and the exact expectation of the clean-label error
under Gaussian label noise depend only on the eigenvalues of the normalized
graph and on how the clean labels project onto its eigenspaces:

    E (1/n) ||Y - F W||_F^2
        = 1 + (1/n) sum_{i<=p, j} (b_i^2 - 2 b_i) <v_i, y_j>^2
          + (sigma^2/n) sum_{i<=p} b_i^2,     b_i = lambda_i / (lambda_i + beta).

The first two terms are the squared bias, the last is the variance; the
expression is an identity, not a bound, and is invariant to the rotation
of the embedding and to the basis chosen inside degenerate eigenspaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .embedding import NEG_EIG_TOL, RepresentationMatrix, Spectrum
from .errors import RankDeficiencyError
from .labels import KIND_CLEAN, LabelMatrix

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ProbeFit:
    weights: np.ndarray       # (p, K)
    beta: float
    predictions: np.ndarray   # (n, K)


@dataclass(frozen=True)
class BiasVariance:
    bias_sq: float
    variance: float
    total: float
    shrinkages: np.ndarray    # b_i = lambda_i / (lambda_i + beta), i <= p


@dataclass(frozen=True)
class AccuracyReport:
    accuracy: float
    ties: int

    def __float__(self) -> float:
        return self.accuracy


def _embedding_values(rep) -> np.ndarray:
    if isinstance(rep, RepresentationMatrix):
        return rep.values
    return np.asarray(rep, dtype=float)


def ridge_fit(rep, labels: LabelMatrix, beta: float) -> ProbeFit:
    """Solve the regularized normal equations by Cholesky on the Gram matrix."""
    f = _embedding_values(rep)
    y = labels.values
    if f.shape[0] != y.shape[0]:
        raise ValueError(f"embedding has {f.shape[0]} rows, labels have {y.shape[0]}")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    gram = f.T @ f + beta * np.eye(f.shape[1])
    rhs = f.T @ y
    if beta == 0.0 and np.linalg.cond(gram) >= _COND_LIMIT:
        raise RankDeficiencyError(
            "Gram matrix is numerically singular; use beta > 0"
        )
    try:
        cho = scipy.linalg.cho_factor(gram, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cond guard fires first
        raise RankDeficiencyError(str(exc)) from exc
    weights = scipy.linalg.cho_solve(cho, rhs)
    residual = np.linalg.norm(gram @ weights - rhs, "fro")
    if residual > 1e-8 * max(np.linalg.norm(rhs, "fro"), 1e-300):
        raise RankDeficiencyError(
            f"normal-equation residual {residual:.3e} is out of tolerance"
        )
    return ProbeFit(weights=weights, beta=float(beta), predictions=f @ weights)


def ground_truth_mse(fit: ProbeFit, clean: LabelMatrix) -> float:
    """(1/n) ||Y - predictions||_F^2 against the clean labels."""
    if clean.kind != KIND_CLEAN:
        raise ValueError(f"expected clean labels, got kind {clean.kind!r}")
    if fit.predictions.shape != clean.values.shape:
        raise ValueError(
            f"predictions {fit.predictions.shape} vs labels {clean.values.shape}"
        )
    n = clean.n
    return float(np.linalg.norm(clean.values - fit.predictions, "fro") ** 2) / n


def ground_truth_accuracy(fit: ProbeFit, clean: LabelMatrix) -> AccuracyReport:
    """Fraction of rows whose prediction argmax hits the clean class.

    Exact score ties are resolved toward the lowest class index and counted
    separately so sufficient-condition checks can exclude them.
    """
    if fit.predictions.shape != clean.values.shape:
        raise ValueError(
            f"predictions {fit.predictions.shape} vs labels {clean.values.shape}"
        )
    preds = fit.predictions
    best = preds.max(axis=1)
    ties = int(((preds == best[:, None]).sum(axis=1) > 1).sum())
    correct = np.argmax(preds, axis=1) == clean.class_indices()
    return AccuracyReport(accuracy=float(correct.mean()), ties=ties)


def shrinkage_factors(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    """b_i = lambda_i / (lambda_i + beta) with the 0/0 (beta = 0) case -> 0."""
    lam = np.clip(eigenvalues, 0.0, None)
    out = np.zeros_like(lam)
    nz = lam > 0
    out[nz] = lam[nz] / (lam[nz] + beta)
    return out


def expected_error_closed_form(
    spec: Spectrum, p: int, clean: LabelMatrix, beta: float, sigma: float
) -> BiasVariance:
    """Exact expectation of the clean-label MSE under Gaussian label noise."""
    if clean.kind != KIND_CLEAN:
        raise ValueError(f"expected clean labels, got kind {clean.kind!r}")
    if not (0 < p <= spec.n):
        raise ValueError(f"rank p={p} out of range for n={spec.n}")
    if beta < 0 or sigma < 0:
        raise ValueError("beta and sigma must be nonnegative")
    lam = spec.eigenvalues[:p]
    if lam[-1] < -NEG_EIG_TOL:
        raise ValueError(f"eigenvalue {lam[-1]!r} at cut index {p} is too negative")
    b = shrinkage_factors(lam, beta)
    n = spec.n
    proj = spec.eigenvectors[:, :p].T @ clean.values  # (p, K)
    bias_sq = 1.0 + float(((b**2 - 2.0 * b)[:, None] * proj**2).sum()) / n
    variance = float((sigma**2) * (b**2).sum()) / n
    return BiasVariance(
        bias_sq=bias_sq,
        variance=variance,
        total=bias_sq + variance,
        shrinkages=b,
    )
