"""Rank statistics and the subgroup correlation protocol.

Spearman correlation is computed by ranking both sequences (average
ranks on ties) and taking the Pearson correlation of the ranks. The
partial correlation of x and y controlling z combines the three pairwise
coefficients:

    r_xy.z = (r_xy - r_xz * r_yz) / (sqrt(1 - r_xz^2) * sqrt(1 - r_yz^2))

and is undefined when the control is (anti)perfectly correlated with
either input.

Significance uses a two-sided p-value. The exact method enumerates all
n! orderings of a tie-free rank vector and counts |r| at least as large
as observed; it is exact for the zero-order statistic and is applied to
partial coefficients as the same reference null. The t approximation
uses t = r * sqrt(df / (1 - r^2)) with df = n - 2 (n - 3 for partial).
The subgroup protocol sorts samples by metric, splits them into g
near-equal contiguous groups (all sizes within one of each other),
summarizes each group (metric median, score mean, control median), and
sweeps g over a small range, reporting the best significant coefficient
per family at p < 0.05.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from statistics import median
from typing import Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .errors import ConstantSequence, DegenerateControl, LengthMismatch, TooFewSamples

__all__ = [
    "SIGNIFICANCE_LEVEL",
    "GroupSummary",
    "CorrelationResult",
    "SweepResult",
    "spearman",
    "partial_from_correlations",
    "partial_spearman",
    "p_value",
    "bin_groups",
    "correlation_sweep",
]

SIGNIFICANCE_LEVEL = 0.05
_EXACT_LIMIT = 10  # n! enumeration is materialized up to here
_DEGENERATE_EPS = 1e-12


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(v * v for v in dx)
    syy = math.fsum(v * v for v in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantSequence("zero variance sequence in correlation")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Rank correlation: Pearson over average ranks."""
    if len(x) != len(y):
        raise LengthMismatch(f"sequence lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise TooFewSamples(f"need at least 3 observations, got {len(x)}")
    return _pearson(_average_ranks(x), _average_ranks(y))


def partial_from_correlations(r_xy: float, r_xz: float, r_yz: float) -> float:
    """First-order partial correlation from the three pairwise coefficients."""
    if abs(r_xz) >= 1.0 - _DEGENERATE_EPS or abs(r_yz) >= 1.0 - _DEGENERATE_EPS:
        raise DegenerateControl(
            f"control saturates a pairwise correlation (r_xz={r_xz}, r_yz={r_yz})"
        )
    num = r_xy - r_xz * r_yz
    den = math.sqrt(1.0 - r_xz * r_xz) * math.sqrt(1.0 - r_yz * r_yz)
    return max(-1.0, min(1.0, num / den))


def partial_spearman(x: Sequence[float], y: Sequence[float], z: Sequence[float]) -> float:
    if not (len(x) == len(y) == len(z)):
        raise LengthMismatch(
            f"sequence lengths differ: {len(x)} vs {len(y)} vs {len(z)}"
        )
    return partial_from_correlations(spearman(x, y), spearman(x, z), spearman(y, z))


@lru_cache(maxsize=4)
def _null_abs_r(n: int) -> np.ndarray:
    """Sorted |r| over all n! permutations of a tie-free rank vector."""
    ranks = np.arange(1, n + 1, dtype=np.float64)
    centered = ranks - ranks.mean()
    unit = centered / np.sqrt((centered * centered).sum())

    perms = np.zeros((1, 1), dtype=np.int8)
    for k in range(2, n + 1):
        m = perms.shape[0]
        out = np.empty((m * k, k), dtype=np.int8)
        for pos in range(k):
            block = out[pos * m : (pos + 1) * m]
            block[:, pos] = k - 1
            block[:, :pos] = perms[:, :pos]
            block[:, pos + 1 :] = perms[:, pos:]
        perms = out

    abs_r = np.empty(perms.shape[0], dtype=np.float64)
    chunk = 500_000
    for lo in range(0, perms.shape[0], chunk):
        rows = unit[perms[lo : lo + chunk]]
        abs_r[lo : lo + rows.shape[0]] = np.abs(rows @ unit)
    abs_r.sort()
    return abs_r


def p_value(r: float, n: int, method: str = "auto", partial: bool = False) -> float:
    """Two-sided p-value for an observed (partial) rank correlation."""
    if method == "auto":
        method = "exact" if n <= _EXACT_LIMIT else "t"
    if method == "exact":
        if n < 4:
            raise TooFewSamples(f"exact enumeration needs n >= 4, got {n}")
        if n > _EXACT_LIMIT:
            raise ValueError(f"exact enumeration is capped at n = {_EXACT_LIMIT}, got {n}")
        null = _null_abs_r(n)
        idx = np.searchsorted(null, abs(r) - _DEGENERATE_EPS, side="left")
        return float(null.size - idx) / float(null.size)
    if method == "t":
        if n < 5:
            raise TooFewSamples(f"t approximation needs n >= 5, got {n}")
        df = n - 3 if partial else n - 2
        if 1.0 - r * r <= 0.0:
            return 0.0
        t = abs(r) * math.sqrt(df / (1.0 - r * r))
        return min(1.0, 2.0 * float(_scipy_stats.t.sf(t, df)))
    raise ValueError(f"unknown p-value method {method!r}")


@dataclass(frozen=True)
class GroupSummary:
    index: int
    size: int
    metric_median: float
    score_mean: float
    control_median: float


@dataclass(frozen=True)
class CorrelationResult:
    group_count: int
    r_zero: float | None
    p_zero: float | None
    r_partial: float | None
    p_partial: float | None
    zero_error: str | None = None
    partial_error: str | None = None

    @property
    def significant_zero(self) -> bool:
        return self.r_zero is not None and self.p_zero is not None and self.p_zero < SIGNIFICANCE_LEVEL

    @property
    def significant_partial(self) -> bool:
        return (
            self.r_partial is not None
            and self.p_partial is not None
            and self.p_partial < SIGNIFICANCE_LEVEL
        )

    def to_record(self) -> dict:
        return {
            "group_count": self.group_count,
            "r_zero": self.r_zero,
            "p_zero": self.p_zero,
            "significant_zero": self.significant_zero,
            "r_partial": self.r_partial,
            "p_partial": self.p_partial,
            "significant_partial": self.significant_partial,
            "zero_error": self.zero_error,
            "partial_error": self.partial_error,
        }


@dataclass(frozen=True)
class SweepResult:
    results: tuple[CorrelationResult, ...]
    best: CorrelationResult | None          # largest significant |r_zero|
    best_partial: CorrelationResult | None  # largest significant |r_partial|


def bin_groups(rows: Sequence[tuple[float, float, float]], g: int) -> list[GroupSummary]:
    """Stable-sort rows by metric and split into g near-equal groups.

    Rows are (metric, score, control) triples; the first n mod g groups
    take one extra row, so sizes never differ by more than one.
    """
    n = len(rows)
    if g < 1:
        raise ValueError(f"group count must be positive, got {g}")
    if n < g:
        raise TooFewSamples(f"cannot split {n} rows into {g} groups")
    ordered = sorted(rows, key=lambda row: row[0])
    base, extra = divmod(n, g)
    groups: list[GroupSummary] = []
    start = 0
    for index in range(g):
        size = base + (1 if index < extra else 0)
        chunk = ordered[start : start + size]
        start += size
        groups.append(
            GroupSummary(
                index=index,
                size=size,
                metric_median=float(median(row[0] for row in chunk)),
                score_mean=math.fsum(row[1] for row in chunk) / size,
                control_median=float(median(row[2] for row in chunk)),
            )
        )
    return groups


def correlation_sweep(
    rows: Sequence[tuple[float, float, float]],
    g_range: tuple[int, int] = (9, 11),
    p_method: str = "auto",
) -> SweepResult:
    """Run the subgroup protocol for each g in g_range (inclusive)."""
    lo, hi = g_range
    if lo > hi or lo < 1:
        raise ValueError(f"bad group range {g_range}")
    if len(rows) < hi:
        raise TooFewSamples(f"{len(rows)} rows cannot fill {hi} groups")
    results: list[CorrelationResult] = []
    for g in range(lo, hi + 1):
        groups = bin_groups(rows, g)
        x = [grp.metric_median for grp in groups]
        y = [grp.score_mean for grp in groups]
        z = [grp.control_median for grp in groups]
        r_zero = p_zero = r_part = p_part = None
        zero_error = partial_error = None
        try:
            r_zero = spearman(x, y)
            p_zero = p_value(r_zero, g, method=p_method)
        except ConstantSequence:
            zero_error = "constant_sequence"
        if zero_error is None:
            try:
                r_part = partial_spearman(x, y, z)
                p_part = p_value(r_part, g, method=p_method, partial=True)
            except DegenerateControl:
                partial_error = "degenerate_control"
            except ConstantSequence:
                partial_error = "constant_sequence"
        else:
            partial_error = zero_error
        results.append(
            CorrelationResult(
                group_count=g,
                r_zero=r_zero,
                p_zero=p_zero,
                r_partial=r_part,
                p_partial=p_part,
                zero_error=zero_error,
                partial_error=partial_error,
            )
        )

    def pick(results_, key, flag):
        candidates = [res for res in results_ if getattr(res, flag)]
        if not candidates:
            return None
        # Largest |r|; ties go to the smaller group count.
        return max(candidates, key=lambda res: (abs(getattr(res, key)), -res.group_count))

    return SweepResult(
        results=tuple(results),
        best=pick(results, "r_zero", "significant_zero"),
        best_partial=pick(results, "r_partial", "significant_partial"),
    )
