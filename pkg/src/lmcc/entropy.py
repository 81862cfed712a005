"""Token entropies: spans, providers, thresholds, and the cache format.

A provider maps preprocessed text to a list of TokenEntropy spans. Spans
are UTF-8 byte offsets, sorted, non-overlapping, and must jointly cover
every non-whitespace byte of the text; entropies are Shannon entropies
in nats and therefore non-negative. `token_entropies` enforces that
contract no matter where the spans came from.

The on-disk cache is newline-delimited JSON, one record per sample:

    {"id": "s1", "tokens": [[0, 4, 1.25], [5, 6, 0.5]]}

Four providers are included: `precomputed` (reads a cache file),
`remote` (POSTs {"code": text} and expects {"tokens": [[s, e, h], ...]}),
`synthetic` (bimodal entropies over this package's own tokenization, for
controlled experiments), and `constant`.
"""

from __future__ import annotations

import json
import math
import os
import random
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Sequence

import requests

from .errors import (
    CoverageGap,
    EmptyInput,
    InvalidSpec,
    MalformedRecord,
    MissingFile,
    ProviderUnavailable,
)
from .lexing import scan

__all__ = [
    "TokenEntropy",
    "SegmentationConfig",
    "SyntheticEntropySpec",
    "BOUNDARY_RULES",
    "EntropyProvider",
    "ConstantProvider",
    "SyntheticProvider",
    "PrecomputedProvider",
    "RemoteProvider",
    "distribution_entropy",
    "synthetic_entropies",
    "token_entropies",
    "threshold",
    "load_entropy_cache",
    "write_entropy_cache",
]

_WS_BYTES = frozenset(b" \t\n\r\x0b\x0c")


@dataclass(frozen=True)
class TokenEntropy:
    byte_start: int
    byte_end: int
    entropy: float  # nats


@dataclass(frozen=True)
class SegmentationConfig:
    """Threshold selection: a quantile of the observed entropies, or absolute."""

    tau_quantile: float = 0.67
    tau_mode: str = "quantile"  # "quantile" | "absolute"
    tau_absolute: float | None = None

    def __post_init__(self) -> None:
        if self.tau_mode == "quantile":
            if not 0.0 < self.tau_quantile < 1.0:
                raise ValueError(f"tau_quantile must lie in (0, 1), got {self.tau_quantile}")
            if self.tau_absolute is not None:
                raise ValueError("tau_absolute is set but tau_mode is 'quantile'")
        elif self.tau_mode == "absolute":
            if self.tau_absolute is None:
                raise ValueError("tau_mode 'absolute' requires tau_absolute")
        else:
            raise ValueError(f"unknown tau_mode {self.tau_mode!r}")


@dataclass(frozen=True)
class SyntheticEntropySpec:
    """Bimodal synthetic entropies: mu_high on rule-selected boundary tokens,
    mu_low elsewhere, each jittered uniformly by +-eta."""

    mu_low: float
    mu_high: float
    eta: float = 0.0
    boundary_rule: str = "line_start"
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.mu_high > self.mu_low:
            raise InvalidSpec(f"mu_high must exceed mu_low, got {self.mu_low} >= {self.mu_high}")
        if self.eta < 0:
            raise InvalidSpec(f"eta must be non-negative, got {self.eta}")
        if self.mu_low - self.eta < 0:
            raise InvalidSpec("mu_low - eta dips below zero; entropies must stay non-negative")
        if self.boundary_rule not in BOUNDARY_RULES:
            raise InvalidSpec(
                f"unknown boundary rule {self.boundary_rule!r}; expected one of "
                f"{sorted(BOUNDARY_RULES)}"
            )


def _rule_line_start(lex) -> set[int]:
    seen_lines: set[int] = set()
    out: set[int] = set()
    for idx, tok in enumerate(lex.tokens):
        if tok.line not in seen_lines:
            seen_lines.add(tok.line)
            out.add(idx)
    return out


def _rule_statement_start(lex) -> set[int]:
    return {ll.tokens[0] for ll in lex.logical_lines if ll.tokens}


def _rule_none(lex) -> set[int]:
    return set()


BOUNDARY_RULES = {
    "line_start": _rule_line_start,
    "statement_start": _rule_statement_start,
    "none": _rule_none,
}


def distribution_entropy(probs: Sequence[float]) -> float:
    """Shannon entropy of a discrete distribution, in nats."""
    return -math.fsum(p * math.log(p) for p in probs if p > 0.0)


class EntropyProvider(Protocol):
    def entropies(self, text: str, sample_id: str | None = None) -> list[TokenEntropy]: ...


class ConstantProvider:
    """Every token of this package's tokenization gets the same entropy."""

    def __init__(self, value: float):
        if value < 0:
            raise InvalidSpec(f"constant entropy must be non-negative, got {value}")
        self.value = value

    @classmethod
    def from_distribution(cls, probs: Sequence[float]) -> "ConstantProvider":
        """Provider backed by one fixed next-token distribution."""
        return cls(distribution_entropy(probs))

    def entropies(self, text: str, sample_id: str | None = None) -> list[TokenEntropy]:
        lex = scan(text)
        return [TokenEntropy(t.start, t.end, self.value) for t in lex.tokens]


class SyntheticProvider:
    def __init__(self, spec: SyntheticEntropySpec):
        self.spec = spec

    def entropies(self, text: str, sample_id: str | None = None) -> list[TokenEntropy]:
        return synthetic_entropies(text, self.spec)


def synthetic_entropies(text: str, spec: SyntheticEntropySpec) -> list[TokenEntropy]:
    """Deterministic bimodal entropies over the package tokenization."""
    rule = BOUNDARY_RULES.get(spec.boundary_rule)
    if rule is None:
        raise InvalidSpec(
            f"unknown boundary rule {spec.boundary_rule!r}; expected one of {sorted(BOUNDARY_RULES)}"
        )
    lex = scan(text)
    if not lex.tokens:
        raise EmptyInput("no tokens to assign entropies to")
    boundary = rule(lex)
    rng = random.Random(spec.seed)
    out: list[TokenEntropy] = []
    for idx, tok in enumerate(lex.tokens):
        base = spec.mu_high if idx in boundary else spec.mu_low
        jitter = rng.uniform(-spec.eta, spec.eta) if spec.eta > 0 else 0.0
        out.append(TokenEntropy(tok.start, tok.end, base + jitter))
    return out


class PrecomputedProvider:
    """Serves spans from an entropy cache file keyed by sample id."""

    def __init__(self, path: str | os.PathLike[str]):
        self._cache = load_entropy_cache(path)
        self.path = os.fspath(path)

    def entropies(self, text: str, sample_id: str | None = None) -> list[TokenEntropy]:
        if sample_id is None or sample_id not in self._cache:
            raise CoverageGap(f"no cached entropy record for sample id {sample_id!r}")
        return list(self._cache[sample_id])


class RemoteProvider:
    """POSTs code to an HTTP endpoint; bounds in-flight requests."""

    def __init__(self, url: str, max_in_flight: int = 4, timeout: float = 30.0):
        self.url = url
        self.timeout = timeout
        self.max_in_flight = max_in_flight
        self._gate = threading.Semaphore(max_in_flight)
        self._session = requests.Session()
        self._closed = False

    def close(self) -> None:
        """Cancel further use; in-flight requests fail fast on the closed session."""
        self._closed = True
        self._session.close()

    def entropies(self, text: str, sample_id: str | None = None) -> list[TokenEntropy]:
        if self._closed:
            raise ProviderUnavailable("provider has been closed")
        with self._gate:
            try:
                resp = self._session.post(self.url, json={"code": text}, timeout=self.timeout)
                resp.raise_for_status()
                payload = resp.json()
            except (requests.RequestException, ValueError) as exc:
                raise ProviderUnavailable(f"entropy endpoint {self.url} failed: {exc}") from exc
        try:
            return [TokenEntropy(int(s), int(e), float(h)) for s, e, h in payload["tokens"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(f"entropy endpoint returned malformed payload: {exc}") from exc


def token_entropies(
    text: str, provider: EntropyProvider, sample_id: str | None = None
) -> list[TokenEntropy]:
    """Fetch spans for text and enforce the coverage contract."""
    if not text.strip():
        raise EmptyInput("cannot assign token entropies to blank text")
    spans = provider.entropies(text, sample_id)
    validate_coverage(spans, text)
    return spans


def validate_coverage(spans: Sequence[TokenEntropy], text: str) -> None:
    """Raise CoverageGap unless spans satisfy the provider contract."""
    if not spans:
        raise CoverageGap("provider returned no spans")
    data = text.encode("utf-8")
    pos = 0
    prev_end = -1
    for i, span in enumerate(spans):
        if span.byte_start >= span.byte_end:
            raise CoverageGap(f"span {i} is empty or inverted: [{span.byte_start}, {span.byte_end})")
        if span.byte_start < prev_end:
            raise CoverageGap(f"span {i} overlaps or is out of order at byte {span.byte_start}")
        if span.byte_end > len(data):
            raise CoverageGap(f"span {i} ends past the text ({span.byte_end} > {len(data)})")
        if span.entropy < 0 or not math.isfinite(span.entropy):
            raise CoverageGap(f"span {i} has invalid entropy {span.entropy}")
        if any(b not in _WS_BYTES for b in data[pos : span.byte_start]):
            raise CoverageGap(f"non-whitespace bytes uncovered before byte {span.byte_start}")
        prev_end = span.byte_end
        pos = span.byte_end
    if any(b not in _WS_BYTES for b in data[pos:]):
        raise CoverageGap(f"non-whitespace bytes uncovered after byte {pos}")


def threshold(entropies: Sequence[TokenEntropy], config: SegmentationConfig) -> float:
    """Segmentation threshold tau for one sample.

    Quantile mode uses the nearest-rank method: the ceil(q*N)-th smallest
    observed entropy, so tau is always a member of the sequence.
    """
    if config.tau_mode == "absolute":
        assert config.tau_absolute is not None
        return float(config.tau_absolute)
    if not entropies:
        raise EmptyInput("cannot take a quantile of zero entropies")
    values = sorted(e.entropy for e in entropies)
    # The epsilon absorbs float noise in q*N (0.67 * 100 must rank 67, not 68).
    rank = math.ceil(config.tau_quantile * len(values) - 1e-9)
    rank = min(len(values), max(1, rank))
    return values[rank - 1]


def load_entropy_cache(path: str | os.PathLike[str]) -> dict[str, list[TokenEntropy]]:
    """Read an entropy cache file; validates shape, not coverage."""
    if not os.path.isfile(path):
        raise MissingFile(f"entropy cache not found: {path}")
    cache: dict[str, list[TokenEntropy]] = {}
    with open(path, encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                sample_id = raw["id"]
                tokens = [TokenEntropy(int(s), int(e), float(h)) for s, e, h in raw["tokens"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(line_no, f"bad entropy cache record: {exc}") from exc
            if not isinstance(sample_id, str):
                raise MalformedRecord(line_no, "cache record 'id' must be a string")
            cache[sample_id] = tokens
    return cache


def write_entropy_cache(
    path: str | os.PathLike[str],
    records: Mapping[str, Sequence[TokenEntropy]] | Iterable[tuple[str, Sequence[TokenEntropy]]],
) -> None:
    pairs = records.items() if isinstance(records, Mapping) else records
    with open(path, "w", encoding="utf-8") as fp:
        for sample_id, spans in pairs:
            row = {
                "id": sample_id,
                "tokens": [[s.byte_start, s.byte_end, s.entropy] for s in spans],
            }
            fp.write(json.dumps(row) + "\n")
