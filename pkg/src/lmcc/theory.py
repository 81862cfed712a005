"""Program generators with known complexity, and the boundary experiment.

Three families make the metric's structural claims executable:

  * gen_flat(n): n independent if/else blocks at top level. Cyclomatic
    complexity is n + 1, the hierarchy has 4n units, total comprehension
    level 6n, total branching 2n.
  * gen_nested(n): one if/else ladder nested n deep. Cyclomatic
    complexity is again n + 1, but the 3n + 1 units carry total
    comprehension level (3n^2 + 7n + 2) / 2 and total branching 3n - 1,
    so the nested/flat ratio grows with n while CC cannot tell them
    apart.
  * gen_length_pair(L, k): two programs of identical token count, one
    with k sibling units (total comprehension level k), one with a
    k-deep chain (total k(k+1)/2).

Every generated program carries its expected feature values; tests
arbitrate them against an independent recursive-descent oracle.

The boundary experiment drives segmentation with synthetic bimodal
entropies and scores predicted entropy boundaries against the rule that
produced them; with class separation above twice the jitter and tau at
the midpoint, precision and recall are both 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import preprocess
from .entropy import BOUNDARY_RULES, SyntheticEntropySpec, synthetic_entropies
from .errors import InvalidLength, InvalidN, InvalidSpec
from .lexing import scan
from .segmentation import BOUNDARY_BOTH, BOUNDARY_ENTROPY, segment

__all__ = [
    "GeneratedProgram",
    "BoundaryReport",
    "gen_flat",
    "gen_nested",
    "gen_length_pair",
    "boundary_experiment",
]


@dataclass(frozen=True)
class GeneratedProgram:
    family: str
    code: str
    expected: dict


@dataclass(frozen=True)
class BoundaryReport:
    precision: float
    recall: float
    tau: float
    n_tokens: int
    n_true: int
    n_predicted: int


def gen_flat(n: int) -> GeneratedProgram:
    """n sibling if/else blocks with distinct identifiers."""
    if n < 1:
        raise InvalidN(f"flat family needs n >= 1, got {n}")
    lines: list[str] = []
    for i in range(1, n + 1):
        lines.append(f"if cond{i}:")
        lines.append(f"    then{i} = val{i}")
        lines.append("else:")
        lines.append(f"    alt{i} = other{i}")
    return GeneratedProgram(
        family="flat",
        code="\n".join(lines) + "\n",
        expected={
            "n": n,
            "cc": n + 1,
            "units": 4 * n,
            "total_comp_level": 6 * n,
            "total_branch": 2 * n,
            "max_comp_level": 2,
            "max_branch": 1,
        },
    )


def gen_nested(n: int) -> GeneratedProgram:
    """One if/else ladder nested n levels deep."""
    if n < 1:
        raise InvalidN(f"nested family needs n >= 1, got {n}")
    lines: list[str] = []
    for i in range(1, n + 1):
        lines.append("    " * (i - 1) + f"if cond{i}:")
    lines.append("    " * n + f"then{n} = val{n}")
    for i in range(n, 0, -1):
        lines.append("    " * (i - 1) + "else:")
        lines.append("    " * i + f"alt{i} = other{i}")
    return GeneratedProgram(
        family="nested",
        code="\n".join(lines) + "\n",
        expected={
            "n": n,
            "cc": n + 1,
            "units": 3 * n + 1,
            "total_comp_level": (3 * n * n + 7 * n + 2) // 2,
            "total_branch": 3 * n - 1,
            "max_comp_level": n + 1,
            "max_branch": 2 if n >= 2 else 1,
        },
    )


def _odd_at_least(value: float, floor: int) -> int:
    u = max(floor, round(value))
    if u % 2 == 0:
        u += 1 if u < value else -1
    return max(floor, u)


def gen_length_pair(length: int, k: int | None = None) -> tuple[GeneratedProgram, GeneratedProgram]:
    """Two programs of equal token count: k siblings vs a k-deep chain.

    k defaults to floor(sqrt(length)); pass it explicitly to pin the
    unit count. Unit length is the nearest odd number of tokens to
    length / k, at least 7; lengths that cannot host k such units raise
    InvalidLength.
    """
    if k is None:
        k = math.isqrt(length)
    if k < 1:
        raise InvalidN(f"need at least one unit, got k={k}")
    per_unit = _odd_at_least(length / k, 7)
    if per_unit < 7 or length < 7 * k:
        raise InvalidLength(f"length {length} cannot host {k} units of >= 7 tokens")

    # def f(): return a + b + ...  is 7 tokens plus 2 per extra operand.
    extra = (per_unit - 7) // 2
    flat_lines = []
    for i in range(k):
        operands = " + ".join(f"p{i}x{j}" for j in range(extra + 1))
        flat_lines.append(f"def f{i}(): return {operands}")
    flat_code = "\n".join(flat_lines) + "\n"

    # if g0 and g1 ...:  is 2m + 1 tokens for m guard names, and the
    # innermost assignment z = r0 + r1 ... is 2m + 1 for m operands.
    names = (per_unit - 1) // 2
    chain_lines = []
    for i in range(k - 1):
        guards = " and ".join([f"c{i}"] + [f"q{i}x{j}" for j in range(names - 1)])
        chain_lines.append("    " * i + f"if {guards}:")
    operands = " + ".join(f"r{j}" for j in range(names))
    chain_lines.append("    " * (k - 1) + f"z = {operands}")
    chain_code = "\n".join(chain_lines) + "\n"

    token_count = k * per_unit
    flat = GeneratedProgram(
        family="length_pair_flat",
        code=flat_code,
        expected={
            "k": k,
            "token_count": token_count,
            "units": k,
            "total_comp_level": k,
            "total_branch": 0,
        },
    )
    chain = GeneratedProgram(
        family="length_pair_chain",
        code=chain_code,
        expected={
            "k": k,
            "token_count": token_count,
            "units": k,
            "total_comp_level": k * (k + 1) // 2,
            "total_branch": k - 1,
            "difference": k * (k + 1) // 2 - k,
        },
    )
    return flat, chain


def boundary_experiment(spec: SyntheticEntropySpec, text: str) -> BoundaryReport:
    """Segment with synthetic entropies and score the entropy boundaries
    against the rule that planted them; tau sits at the class midpoint."""
    rule = BOUNDARY_RULES.get(spec.boundary_rule)
    if rule is None:
        raise InvalidSpec(f"unknown boundary rule {spec.boundary_rule!r}")
    pre = preprocess(text)
    entropies = synthetic_entropies(pre.text, spec)
    tau = (spec.mu_low + spec.mu_high) / 2.0
    units = segment(pre, entropies, tau)

    truth = rule(scan(pre.text))
    predicted = {
        u.token_range[0]
        for u in units
        if u.boundary_reason in (BOUNDARY_ENTROPY, BOUNDARY_BOTH)
    }
    hits = len(predicted & truth)
    return BoundaryReport(
        precision=hits / len(predicted) if predicted else 1.0,
        recall=hits / len(truth) if truth else 1.0,
        tau=tau,
        n_tokens=len(entropies),
        n_true=len(truth),
        n_predicted=len(predicted),
    )
