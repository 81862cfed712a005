"""Semantic hierarchy construction and the complexity metric over it.

Units attach by indentation: each unit's parent is the most recent unit
with strictly smaller indent, or a virtual root (depth 0) when none
exists. The root is not materialized; real units carry parent = ROOT_ID
(-1) when they hang off it, and the root never contributes to features.

Comprehension level of a unit is its depth; branching is its direct
child count. The metric aggregates both families linearly:

    lmcc = alpha * total_branch + (1 - alpha) * total_comp_level

which equals the per-unit sum of alpha * b(v) + (1 - alpha) * d(v); both
forms are implemented and must agree to float round-off. The structural
penalty charges depth beyond a budget d_star and branching beyond one:

    phi = delta * sum(max(0, d(v) - d_star)) + gamma * sum(max(0, b(v) - 1))

and is bounded above by delta * total_comp_level + gamma * total_branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .entropy import TokenEntropy
from .errors import EmptyInput
from .segmentation import SemanticUnit

__all__ = [
    "ROOT_ID",
    "HierarchyUnit",
    "SemanticHierarchy",
    "FeatureVector",
    "MetricConfig",
    "TheoryParams",
    "build_hierarchy",
    "extract_features",
    "lmcc",
    "lmcc_per_unit",
    "unit_entropy",
    "structural_penalty",
]

ROOT_ID = -1


@dataclass(frozen=True)
class HierarchyUnit:
    id: int
    parent: int  # ROOT_ID when attached to the virtual root
    depth: int
    children: tuple[int, ...]
    branching: int
    unit_ref: int  # index into the SemanticUnit list this was built from
    token_range: tuple[int, int]
    byte_range: tuple[int, int]
    token_length: int


@dataclass(frozen=True)
class SemanticHierarchy:
    units: tuple[HierarchyUnit, ...]  # real units only; ids are list positions
    root_children: tuple[int, ...]
    source_id: str = ""

    @property
    def size(self) -> int:
        return len(self.units)

    def to_records(self) -> list[dict]:
        """Serializable per-unit records; the virtual root becomes null."""
        return [
            {
                "id": u.id,
                "parent": None if u.parent == ROOT_ID else u.parent,
                "depth": u.depth,
                "branching": u.branching,
                "byte_range": list(u.byte_range),
            }
            for u in self.units
        ]


@dataclass(frozen=True)
class FeatureVector:
    max_comp_level: int
    avg_comp_level: float
    total_comp_level: int
    max_branch: int
    avg_branch: float
    total_branch: int


@dataclass(frozen=True)
class MetricConfig:
    alpha: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class TheoryParams:
    delta: float
    gamma: float
    d_star: int

    def __post_init__(self) -> None:
        if self.delta <= 0 or self.gamma <= 0:
            raise ValueError("delta and gamma must be positive")
        if self.d_star < 0:
            raise ValueError("d_star must be non-negative")


def build_hierarchy(units: Sequence[SemanticUnit], source_id: str = "") -> SemanticHierarchy:
    """Attach units by the most-recent-shallower rule."""
    if not units:
        raise EmptyInput("cannot build a hierarchy from zero units")
    parents: list[int] = []
    depths: list[int] = []
    stack: list[int] = []  # unit ids, strictly increasing indent
    for uid, unit in enumerate(units):
        while stack and units[stack[-1]].indent >= unit.indent:
            stack.pop()
        if stack:
            parent = stack[-1]
            depth = depths[parent] + 1
        else:
            parent = ROOT_ID
            depth = 1
        parents.append(parent)
        depths.append(depth)
        stack.append(uid)

    children: list[list[int]] = [[] for _ in units]
    root_children: list[int] = []
    for uid, parent in enumerate(parents):
        if parent == ROOT_ID:
            root_children.append(uid)
        else:
            children[parent].append(uid)

    built = tuple(
        HierarchyUnit(
            id=uid,
            parent=parents[uid],
            depth=depths[uid],
            children=tuple(children[uid]),
            branching=len(children[uid]),
            unit_ref=uid,
            token_range=unit.token_range,
            byte_range=unit.byte_range,
            token_length=unit.token_range[1] - unit.token_range[0] + 1,
        )
        for uid, unit in enumerate(units)
    )
    return SemanticHierarchy(units=built, root_children=tuple(root_children), source_id=source_id)


def extract_features(h: SemanticHierarchy) -> FeatureVector:
    if not h.units:
        raise EmptyInput("cannot extract features from an empty hierarchy")
    depths = [u.depth for u in h.units]
    branches = [u.branching for u in h.units]
    return FeatureVector(
        max_comp_level=max(depths),
        avg_comp_level=math.fsum(depths) / len(depths),
        total_comp_level=sum(depths),
        max_branch=max(branches),
        avg_branch=math.fsum(branches) / len(branches),
        total_branch=sum(branches),
    )


def lmcc(features: FeatureVector, config: MetricConfig = MetricConfig()) -> float:
    """Aggregate form: alpha * total_branch + (1 - alpha) * total_comp_level."""
    a = config.alpha
    return a * features.total_branch + (1.0 - a) * features.total_comp_level


def lmcc_per_unit(h: SemanticHierarchy, config: MetricConfig = MetricConfig()) -> float:
    """Per-unit form of the same metric; agrees with lmcc() to round-off."""
    a = config.alpha
    b = 1.0 - a
    return math.fsum(a * u.branching + b * u.depth for u in h.units)


def unit_entropy(h: SemanticHierarchy, entropies: Sequence[TokenEntropy]) -> dict[int, float]:
    """Sum of token entropies falling inside each unit's byte range."""
    out: dict[int, float] = {}
    for u in h.units:
        lo, hi = u.byte_range
        out[u.id] = math.fsum(
            s.entropy for s in entropies if lo <= s.byte_start and s.byte_end <= hi
        )
    return out


def structural_penalty(h: SemanticHierarchy, params: TheoryParams) -> float:
    depth_excess = sum(max(0, u.depth - params.d_star) for u in h.units)
    branch_excess = sum(max(0, u.branching - 1) for u in h.units)
    return params.delta * depth_excess + params.gamma * branch_excess
