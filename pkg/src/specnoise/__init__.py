"""Numerical lab for spectral embeddings of clustered augmentation graphs
and closed-form ridge probes under label noise.

The pipeline: build or synthesize a graph whose sub-class clusters satisfy
measurable compactness/distinguishability constants, normalize and
eigendecompose it, embed through the top eigenpairs, corrupt the labels,
fit the ridge probe in closed form, and check every explicit spectral and
error inequality the theory provides.
"""

from .analyzer import AlignmentReport, alignment_report, spectrum_gap
from .bounds import (
    BoundReport,
    FlipTolerance,
    ToleranceInputs,
    eigenvalue_tail_bounds,
    flip_tolerance,
    gaussian_error_bounds,
    lemma_reports,
    perron_entry_bounds,
    perron_l1_lower_bound,
    perturbation_norm_scaling,
    projection_alignment,
    weyl_check,
)
from .config import ExperimentConfig, config_from_dict, load_config
from .embedding import (
    NormalizedAdjacency,
    RepresentationMatrix,
    Spectrum,
    build_representation,
    eigendecompose,
    factorization_loss,
    normalize,
    symmetric_eigensystem,
    verify_column_ratio,
)
from .errors import (
    ConfigError,
    IsolatedVertexError,
    RankDeficiencyError,
    SpecnoiseError,
)
from .graphs import (
    AdjacencyMatrix,
    AssumptionReport,
    DiscreteAugmentationModel,
    assumption_report,
    build_from_discrete_model,
    delta_prime_from_delta,
    measure_delta,
    measure_xi,
    split_block_and_residual,
    synthesize_structured,
)
from .harness import RunManifest, plot_results, run_sweep
from .labels import (
    FlipSpec,
    LabelMatrix,
    clean_labels,
    flip_noise,
    gaussian_noise,
    symmetric_flip_spec,
)
from .probe import (
    AccuracyReport,
    BiasVariance,
    ProbeFit,
    expected_error_closed_form,
    ground_truth_accuracy,
    ground_truth_mse,
    ridge_fit,
)
from .structure import SubclassStructure

__version__ = "0.1.0"
