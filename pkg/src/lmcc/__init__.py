"""Entropy-guided semantic-hierarchy code complexity.

The pipeline: preprocess source, obtain per-token entropies from a
provider, pick a threshold, segment tokens into semantic units, attach
units into an indentation hierarchy, and aggregate depth and branching
into one score. Classical baselines (cyclomatic, Halstead,
maintainability index, cognitive) ride along for comparison, and the
analysis layer runs the subgroup correlation protocol and the rewrite
acceptance gate.
"""

from __future__ import annotations

from .analysis import (
    CorrelationResult,
    GroupSummary,
    SweepResult,
    bin_groups,
    correlation_sweep,
    p_value,
    partial_from_correlations,
    partial_spearman,
    spearman,
)
from .classic import (
    ClassicReport,
    HalsteadCounts,
    HalsteadReport,
    classic_report,
    cognitive,
    cyclomatic,
    halstead,
    maintainability_index,
)
from .corpus import CorpusSample, PreprocessedCode, load_corpus, preprocess
from .entropy import (
    BOUNDARY_RULES,
    ConstantProvider,
    PrecomputedProvider,
    RemoteProvider,
    SegmentationConfig,
    SyntheticEntropySpec,
    SyntheticProvider,
    TokenEntropy,
    distribution_entropy,
    load_entropy_cache,
    synthetic_entropies,
    threshold,
    token_entropies,
    write_entropy_cache,
)
from .errors import (
    AnalysisError,
    ConstantSequence,
    CoverageGap,
    DegenerateControl,
    DuplicateId,
    EmptyInput,
    EndpointUnavailable,
    HookCrash,
    HookTimeout,
    InvalidLength,
    InvalidN,
    InvalidSpec,
    LengthMismatch,
    LmccError,
    MalformedRecord,
    MissingFile,
    NoCandidates,
    ProviderUnavailable,
    TooFewSamples,
)
from .gate import (
    REWRITE_PROMPT,
    GateDecision,
    RewritePair,
    equivalence_hook,
    evaluate_pair,
    percentile_filter,
    request_rewrites,
    run_gate,
)
from .hierarchy import (
    FeatureVector,
    HierarchyUnit,
    MetricConfig,
    SemanticHierarchy,
    TheoryParams,
    build_hierarchy,
    extract_features,
    lmcc,
    lmcc_per_unit,
    structural_penalty,
    unit_entropy,
)
from .pipeline import MetricReport, SampleAnalysis, analyze_code, analyze_sample, metric_report
from .segmentation import SemanticUnit, segment, syntactic_boundaries
from .theory import (
    BoundaryReport,
    GeneratedProgram,
    boundary_experiment,
    gen_flat,
    gen_length_pair,
    gen_nested,
)

__version__ = "0.1.0"
