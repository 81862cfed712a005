"""End-to-end analysis of one sample: preprocess, entropies, threshold,
segmentation, hierarchy, metric, classical baselines."""

from __future__ import annotations

from dataclasses import dataclass

from .classic import ClassicReport, classic_report
from .corpus import CorpusSample, PreprocessedCode, preprocess
from .entropy import EntropyProvider, SegmentationConfig, TokenEntropy, threshold, token_entropies
from .hierarchy import (
    FeatureVector,
    MetricConfig,
    SemanticHierarchy,
    build_hierarchy,
    extract_features,
    lmcc,
)
from .segmentation import SemanticUnit, segment

__all__ = ["SampleAnalysis", "MetricReport", "analyze_code", "analyze_sample", "metric_report"]


@dataclass(frozen=True)
class SampleAnalysis:
    sample_id: str
    pre: PreprocessedCode
    entropies: list[TokenEntropy]
    tau: float
    units: list[SemanticUnit]
    hierarchy: SemanticHierarchy
    features: FeatureVector
    lmcc_value: float
    classic: ClassicReport


@dataclass(frozen=True)
class MetricReport:
    """Flat per-sample record; field order is the CLI column order."""

    id: str
    lmcc: float
    max_comp_level: int
    avg_comp_level: float
    total_comp_level: int
    max_branch: int
    avg_branch: float
    total_branch: int
    units: int
    tau: float
    cc: int
    halstead_volume: float
    halstead_difficulty: float
    halstead_degenerate: bool
    mi: float
    cognitive: int
    loc: int
    token_count: int
    comment_ratio: float
    score: float | None = None

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "lmcc": self.lmcc,
            "max_comp_level": self.max_comp_level,
            "avg_comp_level": self.avg_comp_level,
            "total_comp_level": self.total_comp_level,
            "max_branch": self.max_branch,
            "avg_branch": self.avg_branch,
            "total_branch": self.total_branch,
            "units": self.units,
            "tau": self.tau,
            "cc": self.cc,
            "halstead_volume": self.halstead_volume,
            "halstead_difficulty": self.halstead_difficulty,
            "halstead_degenerate": self.halstead_degenerate,
            "mi": self.mi,
            "cognitive": self.cognitive,
            "loc": self.loc,
            "token_count": self.token_count,
            "comment_ratio": self.comment_ratio,
            "score": self.score,
        }


def analyze_code(
    code: str,
    provider: EntropyProvider,
    seg_config: SegmentationConfig = SegmentationConfig(),
    metric_config: MetricConfig = MetricConfig(),
    sample_id: str = "",
) -> SampleAnalysis:
    """Run the full pipeline over one piece of source code."""
    pre = preprocess(code)
    entropies = token_entropies(pre.text, provider, sample_id or None)
    tau = threshold(entropies, seg_config)
    units = segment(pre, entropies, tau)
    h = build_hierarchy(units, source_id=sample_id)
    features = extract_features(h)
    return SampleAnalysis(
        sample_id=sample_id,
        pre=pre,
        entropies=entropies,
        tau=tau,
        units=units,
        hierarchy=h,
        features=features,
        lmcc_value=lmcc(features, metric_config),
        classic=classic_report(pre),
    )


def analyze_sample(
    sample: CorpusSample,
    provider: EntropyProvider,
    seg_config: SegmentationConfig = SegmentationConfig(),
    metric_config: MetricConfig = MetricConfig(),
) -> SampleAnalysis:
    return analyze_code(
        sample.code, provider, seg_config, metric_config, sample_id=sample.id
    )


def metric_report(analysis: SampleAnalysis, score: float | None = None) -> MetricReport:
    f = analysis.features
    c = analysis.classic
    return MetricReport(
        id=analysis.sample_id,
        lmcc=analysis.lmcc_value,
        max_comp_level=f.max_comp_level,
        avg_comp_level=f.avg_comp_level,
        total_comp_level=f.total_comp_level,
        max_branch=f.max_branch,
        avg_branch=f.avg_branch,
        total_branch=f.total_branch,
        units=len(analysis.units),
        tau=analysis.tau,
        cc=c.cc,
        halstead_volume=c.halstead.volume,
        halstead_difficulty=c.halstead.difficulty,
        halstead_degenerate=c.halstead.degenerate,
        mi=c.mi,
        cognitive=c.cognitive,
        loc=c.loc,
        token_count=c.token_count,
        comment_ratio=analysis.pre.comment_ratio,
        score=score,
    )
