"""Program families with known structure and the boundary-recovery experiment."""

from __future__ import annotations

import math
import random

import pytest

from lmcc.corpus import preprocess
from lmcc.entropy import ConstantProvider, SegmentationConfig, SyntheticEntropySpec
from lmcc.errors import InvalidLength, InvalidN
from lmcc.pipeline import analyze_code
from lmcc.theory import boundary_experiment, gen_flat, gen_length_pair, gen_nested

import oracles


PROVIDER = ConstantProvider(1.0)


def analyzed_features(code: str):
    analysis = analyze_code(code, PROVIDER)
    return analysis.features, analysis


def unit_indents(code: str) -> list[int]:
    return [u.indent for u in analyze_code(code, PROVIDER).units]


# ------------------------------------------------------------------ gen_flat


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_flat_expected_values_match_pipeline_and_oracle(n):
    prog = gen_flat(n)
    features, analysis = analyzed_features(prog.code)
    assert prog.expected["cc"] == analysis.classic.cc == n + 1
    assert prog.expected["total_comp_level"] == features.total_comp_level == 6 * n
    assert prog.expected["total_branch"] == features.total_branch == 2 * n
    want = oracles.brute_features(unit_indents(prog.code))
    assert features.total_comp_level == want["total_comp_level"]
    assert features.total_branch == want["total_branch"]


def test_flat_one_structure():
    features, _ = analyzed_features(gen_flat(1).code)
    assert features.total_comp_level == 6
    assert features.total_branch == 2
    assert features.max_comp_level == 2


def test_flat_rejects_bad_n():
    with pytest.raises(InvalidN):
        gen_flat(0)
    with pytest.raises(InvalidN):
        gen_nested(-1)


# ----------------------------------------------------------------- gen_nested


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_nested_expected_values_match_pipeline_and_oracle(n):
    prog = gen_nested(n)
    features, analysis = analyzed_features(prog.code)
    assert prog.expected["cc"] == analysis.classic.cc == n + 1
    want_tcl = (3 * n * n + 7 * n + 2) // 2
    assert prog.expected["total_comp_level"] == features.total_comp_level == want_tcl
    want = oracles.brute_features(unit_indents(prog.code))
    assert features.total_branch == want["total_branch"]
    assert prog.expected["total_branch"] == features.total_branch


def test_families_coincide_at_one():
    flat, _ = analyzed_features(gen_flat(1).code)
    nested, _ = analyzed_features(gen_nested(1).code)
    assert flat.total_comp_level == nested.total_comp_level == 6


def test_nested_two_depth_profile():
    analysis = analyze_code(gen_nested(2).code, PROVIDER)
    assert [u.depth for u in analysis.hierarchy.units] == [1, 2, 3, 2, 3, 1, 2]
    assert analysis.features.total_comp_level == 14


def test_depth_ratio_grows_without_bound():
    ratios = []
    for n in (2, 4, 8, 16):
        flat, _ = analyzed_features(gen_flat(n).code)
        nested, _ = analyzed_features(gen_nested(n).code)
        ratios.append(nested.total_comp_level / flat.total_comp_level)
    assert ratios == sorted(ratios)
    assert ratios[-1] > ratios[0]


# ------------------------------------------------------------ gen_length_pair


@pytest.mark.parametrize("k", [3, 10, 30])
def test_equal_length_pair_separates_depth_only(k):
    flat, chain = gen_length_pair(21 * k, k=k)
    f_flat, a_flat = analyzed_features(flat.code)
    f_chain, a_chain = analyzed_features(chain.code)
    assert f_flat.total_comp_level == k
    assert f_chain.total_comp_level == k * (k + 1) // 2
    gap = f_chain.total_comp_level - f_flat.total_comp_level
    assert gap == k * (k + 1) // 2 - k

    t_flat = a_flat.classic.token_count
    t_chain = a_chain.classic.token_count
    assert abs(t_flat - t_chain) <= 0.02 * max(t_flat, t_chain)


def test_default_k_is_floor_sqrt():
    flat, chain = gen_length_pair(230)
    k = math.isqrt(230)
    f_chain, _ = analyzed_features(chain.code)
    assert f_chain.total_comp_level == k * (k + 1) // 2


def test_too_short_length_rejected():
    with pytest.raises(InvalidLength):
        gen_length_pair(12, k=3)


def test_pair_expected_records_carry_the_gap():
    flat, chain = gen_length_pair(21 * 10, k=10)
    assert chain.expected["total_comp_level"] - flat.expected["total_comp_level"] == 45


# -------------------------------------------------------- boundary_experiment


TEXTS = [
    "a = 1\nb = a + 2\nc = b * b\nd = c - a\n",
    "def f(x):\n    y = x + 1\n    return y\nz = f(3)\n",
    "for i in r:\n    t = t + i\n    u = t * 2\nprint(u)\n",
]


def test_clean_gap_recovers_all_boundaries():
    spec = SyntheticEntropySpec(mu_low=1.0, mu_high=3.0, eta=0.5, seed=5)
    report = boundary_experiment(spec, TEXTS[0])
    assert report.precision == 1.0
    assert report.recall == 1.0
    assert report.tau == pytest.approx(2.0)


def test_zero_noise_perfect_for_any_positive_gap():
    spec = SyntheticEntropySpec(mu_low=1.0, mu_high=1.1, eta=0.0, seed=1)
    report = boundary_experiment(spec, TEXTS[1])
    assert report.precision == 1.0 and report.recall == 1.0


def test_overlapping_classes_still_produce_a_report():
    spec = SyntheticEntropySpec(mu_low=1.0, mu_high=2.0, eta=0.6, seed=9)
    report = boundary_experiment(spec, TEXTS[2])
    assert 0.0 <= report.precision <= 1.0
    assert 0.0 <= report.recall <= 1.0
    assert report.n_tokens > 0


@pytest.mark.parametrize("rule", ["line_start", "statement_start"])
def test_gap_dominates_noise_across_seeds_and_rules(rule):
    for seed in range(10):
        spec = SyntheticEntropySpec(
            mu_low=1.0, mu_high=3.0, eta=0.5, seed=seed, boundary_rule=rule
        )
        report = boundary_experiment(spec, TEXTS[seed % len(TEXTS)])
        assert report.precision == 1.0 and report.recall == 1.0


def test_rule_none_yields_no_entropy_boundaries():
    spec = SyntheticEntropySpec(mu_low=1.0, mu_high=3.0, eta=0.0, boundary_rule="none")
    report = boundary_experiment(spec, TEXTS[0])
    assert report.n_true == 0 and report.n_predicted == 0
    assert report.precision == 1.0 and report.recall == 1.0
