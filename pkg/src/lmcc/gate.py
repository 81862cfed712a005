"""Rewrite acceptance gate: simplify without changing control structure.

A rewrite pair is accepted only when every check passes, evaluated in a
fixed order so each rejection carries its highest-priority reason:

  1. cc_changed: cyclomatic complexity differs between the sides.
  2. lmcc_not_lower: the rewrite's metric is not strictly lower.
  3. equivalence_failed: the equivalence hook's polarity is wrong. For
     translation and reasoning tasks the hook (typically a test run)
     must pass; for repair tasks the rewrite must still fail the hook,
     since a repair candidate that passes was not reproducing the bug.
  4. ok: accepted.

Samples cut by the percentile filter are reported as below_percentile.
The filter keeps the top pct% of samples by metric, descending:
ceil(pct / 100 * n) samples plus any ties at the cut value.

Candidate rewrites come from an HTTP endpoint speaking
POST {"prompt", "temperature"} -> {"text"}; fenced code blocks are
extracted from the text, and attempts that yield none are dropped with
a warning.
"""

from __future__ import annotations

import logging
import math
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Callable, Sequence

import requests

from .entropy import EntropyProvider, SegmentationConfig
from .errors import (
    AnalysisError,
    EndpointUnavailable,
    HookCrash,
    HookTimeout,
    LmccError,
    NoCandidates,
)
from .hierarchy import MetricConfig
from .pipeline import analyze_code

__all__ = [
    "REWRITE_PROMPT",
    "TASK_KINDS",
    "REASONS",
    "RewritePair",
    "GateDecision",
    "percentile_filter",
    "evaluate_pair",
    "run_gate",
    "request_rewrites",
    "equivalence_hook",
]

logger = logging.getLogger(__name__)

# Protocol constant; sent verbatim with {code} substituted.
REWRITE_PROMPT = """You are an expert in Python programming.

Instruction:
- Improve the code's comprehensibility and readability without altering its original functionality.
- Do not modify the function's cyclomatic complexity (e.g., do not add or remove loops or conditional branches).
- Output only the simplified code inside ```python``` without any additional explanations.

Initial Code:
{code}

Simplified Code:
"""

TASK_KINDS = ("translation", "reasoning", "repair")
REASONS = ("ok", "cc_changed", "lmcc_not_lower", "equivalence_failed", "below_percentile")

_FENCE_RE = re.compile(r"```(?:python)?[ \t]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class RewritePair:
    id: str
    original: str
    rewritten: str
    task_kind: str = "translation"

    def __post_init__(self) -> None:
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.task_kind!r}")


@dataclass(frozen=True)
class GateDecision:
    id: str
    accepted: bool
    reason: str
    cc_before: int | None = None
    cc_after: int | None = None
    lmcc_before: float | None = None
    lmcc_after: float | None = None

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "accepted": self.accepted,
            "reason": self.reason,
            "cc_before": self.cc_before,
            "cc_after": self.cc_after,
            "lmcc_before": self.lmcc_before,
            "lmcc_after": self.lmcc_after,
        }


def percentile_filter(values: Sequence[tuple[str, float]], pct: float) -> set[str]:
    """Ids of the top pct% by value, descending, keeping ties at the cut."""
    if not 0 < pct <= 100:
        raise ValueError(f"percentile must lie in (0, 100], got {pct}")
    if not values:
        return set()
    ordered = sorted(values, key=lambda kv: -kv[1])
    keep = math.ceil(pct / 100.0 * len(ordered))
    cut = ordered[keep - 1][1]
    return {key for key, val in ordered if val >= cut}


def evaluate_pair(
    pair: RewritePair,
    provider: EntropyProvider,
    seg_config: SegmentationConfig = SegmentationConfig(),
    metric_config: MetricConfig = MetricConfig(),
    hook: Callable[[str], bool] | None = None,
) -> GateDecision:
    """Apply the gate checks to one pair; see the module docstring."""
    try:
        before = analyze_code(pair.original, provider, seg_config, metric_config, f"{pair.id}:original")
    except LmccError as exc:
        raise AnalysisError("original", exc) from exc
    try:
        after = analyze_code(pair.rewritten, provider, seg_config, metric_config, f"{pair.id}:rewritten")
    except LmccError as exc:
        raise AnalysisError("rewritten", exc) from exc

    cc_before, cc_after = before.classic.cc, after.classic.cc
    lmcc_before, lmcc_after = before.lmcc_value, after.lmcc_value

    def decide(accepted: bool, reason: str) -> GateDecision:
        return GateDecision(
            id=pair.id,
            accepted=accepted,
            reason=reason,
            cc_before=cc_before,
            cc_after=cc_after,
            lmcc_before=lmcc_before,
            lmcc_after=lmcc_after,
        )

    if cc_before != cc_after:
        return decide(False, "cc_changed")
    if not lmcc_after < lmcc_before:
        return decide(False, "lmcc_not_lower")
    if hook is not None:
        passed = hook(pair.rewritten)
        hook_ok = (not passed) if pair.task_kind == "repair" else passed
        if not hook_ok:
            return decide(False, "equivalence_failed")
    return decide(True, "ok")


def run_gate(
    pairs: Sequence[RewritePair],
    provider: EntropyProvider,
    percentile: float = 50.0,
    seg_config: SegmentationConfig = SegmentationConfig(),
    metric_config: MetricConfig = MetricConfig(),
    hook: Callable[[str], bool] | None = None,
) -> list[GateDecision]:
    """Gate a batch: filter by original-side metric, then evaluate survivors.

    Decisions come back in input order; filtered pairs get reason
    below_percentile. Analysis failures propagate as AnalysisError.
    """
    originals: list[tuple[str, float]] = []
    analyses: dict[str, tuple[int, float]] = {}
    for pair in pairs:
        try:
            side = analyze_code(pair.original, provider, seg_config, metric_config, f"{pair.id}:original")
        except LmccError as exc:
            raise AnalysisError("original", exc) from exc
        originals.append((pair.id, side.lmcc_value))
        analyses[pair.id] = (side.classic.cc, side.lmcc_value)

    keep = percentile_filter(originals, percentile)
    decisions: list[GateDecision] = []
    for pair in pairs:
        if pair.id not in keep:
            cc_before, lmcc_before = analyses[pair.id]
            decisions.append(
                GateDecision(
                    id=pair.id,
                    accepted=False,
                    reason="below_percentile",
                    cc_before=cc_before,
                    lmcc_before=lmcc_before,
                )
            )
            continue
        decisions.append(evaluate_pair(pair, provider, seg_config, metric_config, hook))
    return decisions


def request_rewrites(
    code: str,
    endpoint: str,
    attempts: int = 10,
    temperature: float = 1.0,
    timeout: float = 60.0,
) -> list[str]:
    """Ask the endpoint for up to `attempts` rewrite candidates, in order."""
    if attempts < 1:
        raise ValueError(f"attempts must be positive, got {attempts}")
    prompt = REWRITE_PROMPT.replace("{code}", code)
    session = requests.Session()
    candidates: list[str] = []
    for attempt in range(attempts):
        try:
            resp = session.post(
                endpoint,
                json={"prompt": prompt, "temperature": temperature},
                timeout=timeout,
            )
            resp.raise_for_status()
            text = resp.json()["text"]
        except (requests.RequestException, ValueError, KeyError) as exc:
            raise EndpointUnavailable(f"rewrite endpoint {endpoint} failed: {exc}") from exc
        match = _FENCE_RE.search(text)
        if match is None:
            logger.warning("attempt %d returned no fenced code block; dropped", attempt + 1)
            continue
        candidates.append(match.group(1))
    if not candidates:
        raise NoCandidates(f"no fenced code block in any of {attempts} attempts")
    return candidates


def equivalence_hook(template: str, timeout: float = 30.0) -> Callable[[str], bool]:
    """Build a hook that writes code to a temp file and runs the command.

    The template is shell-lexed but executed without a shell; each
    "{file}" placeholder is replaced by the temp path, and when no
    placeholder appears the path is appended as a final argument. Exit
    status 0 means the check passed.
    """
    argv_template = shlex.split(template)
    if not argv_template:
        raise ValueError("empty hook template")

    def hook(code: str) -> bool:
        with tempfile.NamedTemporaryFile("w", suffix=".py", delete=False) as fp:
            fp.write(code)
            path = fp.name
        if any("{file}" in part for part in argv_template):
            argv = [part.replace("{file}", path) for part in argv_template]
        else:
            argv = argv_template + [path]
        try:
            proc = subprocess.run(
                argv,
                timeout=timeout,
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
            )
        except subprocess.TimeoutExpired as exc:
            raise HookTimeout(f"hook exceeded {timeout}s: {template}") from exc
        except OSError as exc:
            raise HookCrash(f"hook could not run: {exc}") from exc
        return proc.returncode == 0

    return hook
