"""End-to-end runs of the command-line entry point.

Everything goes through main(argv) in process: exit codes, output
files, and stderr are the observable surface. 0 = success, 1 = usage
error, 2 = data error.
"""

from __future__ import annotations

import json

import pytest

from conftest import read_jsonl, write_jsonl
from lmcc.cli import main
from lmcc.corpus import preprocess
from lmcc.entropy import ConstantProvider, token_entropies, write_entropy_cache
from lmcc.lexing import scan
from lmcc.theory import gen_flat, gen_length_pair, gen_nested


def run(*argv: str) -> int:
    return main(list(argv))


def corpus_file(tmp_path, rows, name="corpus.jsonl"):
    path = tmp_path / name
    write_jsonl(path, rows)
    return str(path)


# ----------------------------------------------------------------- analyze


def test_analyze_flat_program_record(tmp_path):
    inp = corpus_file(
        tmp_path,
        [
            {"id": "flat2", "code": gen_flat(2).code, "score": 0.5},
            {"id": "bare", "code": "x = 1\n"},
        ],
    )
    out = str(tmp_path / "metrics.jsonl")
    assert run("analyze", "--input", inp, "--output", out) == 0

    first, second = read_jsonl(out)
    assert first["id"] == "flat2"
    assert first["lmcc"] == pytest.approx(5.6)
    assert first["total_branch"] == 4
    assert first["total_comp_level"] == 12
    assert first["units"] == 8
    assert first["tau"] == 1.0
    assert first["cc"] == 3
    assert first["score"] == 0.5
    assert second["score"] is None


def test_analyze_writes_to_stdout_by_default(tmp_path, capsys):
    inp = corpus_file(tmp_path, [{"id": "s", "code": "x = 1\n"}])
    assert run("analyze", "--input", inp) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["id"] == "s"
    assert record["token_count"] == 3


def test_analyze_empty_corpus_succeeds(tmp_path):
    inp = str(tmp_path / "empty.jsonl")
    open(inp, "w").close()
    out = str(tmp_path / "out.jsonl")
    assert run("analyze", "--input", inp, "--output", out) == 0
    assert read_jsonl(out) == []


def test_analyze_precomputed_cache_and_coverage_gap(tmp_path):
    code = "x = 1\n"
    spans = token_entropies(preprocess(code).text, ConstantProvider(2.0))
    cache = str(tmp_path / "cache.jsonl")
    write_entropy_cache(cache, {"a": spans})

    inp = corpus_file(tmp_path, [{"id": "a", "code": code}, {"id": "b", "code": code}])
    out = str(tmp_path / "out.jsonl")
    assert run("analyze", "--input", inp, "--output", out, "--provider", f"precomputed:{cache}") == 2

    good, bad = read_jsonl(out)
    assert good["id"] == "a" and good["tau"] == 2.0
    assert bad == {"id": "b", "error": "CoverageGap", "message": bad["message"]}


def test_analyze_jobs_preserve_input_order(tmp_path):
    rows = [{"id": f"s{i}", "code": gen_flat(1 + i % 4).code} for i in range(12)]
    inp = corpus_file(tmp_path, rows)
    out = str(tmp_path / "out.jsonl")
    assert run("analyze", "--input", inp, "--output", out, "--jobs", "4") == 0
    assert [r["id"] for r in read_jsonl(out)] == [f"s{i}" for i in range(12)]


def test_analyze_dump_hierarchy(tmp_path):
    inp = corpus_file(tmp_path, [{"id": "n2", "code": gen_nested(2).code}])
    out = str(tmp_path / "out.jsonl")
    assert run("analyze", "--input", inp, "--output", out, "--dump-hierarchy") == 0
    (record,) = read_jsonl(out)
    units = record["hierarchy"]
    assert len(units) == record["units"]
    assert units[0]["parent"] is None

    assert run("analyze", "--input", inp, "--output", out) == 0
    assert "hierarchy" not in read_jsonl(out)[0]


def test_analyze_tau_absolute_flag(tmp_path):
    inp = corpus_file(tmp_path, [{"id": "n2", "code": gen_nested(2).code}])
    out = str(tmp_path / "out.jsonl")
    # constant entropy 1.0: the default quantile threshold is 1.0 and no
    # token exceeds it strictly, so only syntax opens units
    assert run("analyze", "--input", inp, "--output", out) == 0
    syntactic_only = read_jsonl(out)[0]
    assert run("analyze", "--input", inp, "--output", out, "--tau-absolute", "0.5") == 0
    per_token = read_jsonl(out)[0]
    assert per_token["tau"] == 0.5
    assert per_token["units"] == per_token["token_count"]
    assert per_token["units"] > syntactic_only["units"]


def test_analyze_is_deterministic(tmp_path):
    rows = [{"id": f"s{i}", "code": gen_nested(1 + i).code, "score": i / 5} for i in range(5)]
    inp = corpus_file(tmp_path, rows)
    out1, out2 = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
    assert run("analyze", "--input", inp, "--output", out1) == 0
    assert run("analyze", "--input", inp, "--output", out2) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_analyze_missing_input_exits_2(tmp_path, capsys):
    assert run("analyze", "--input", str(tmp_path / "nope.jsonl")) == 2
    assert "error:" in capsys.readouterr().err


def test_analyze_malformed_corpus_exits_2(tmp_path, capsys):
    inp = corpus_file(tmp_path, [{"id": "a"}])
    assert run("analyze", "--input", inp) == 2
    assert "error:" in capsys.readouterr().err


# ------------------------------------------------------------ usage errors


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["analyze", "--input", "x.jsonl", "--tau-quantile", "0.5", "--tau-absolute", "1.0"],
        ["generate", "--family", "flat"],
        ["generate", "--family", "pair"],
    ],
)
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 1


@pytest.mark.parametrize(
    "spec",
    [
        "psychic:1",
        "precomputed",
        "synthetic:mu_low=1.0",
        "synthetic:mu_low=1,mu_high=3,zeta=2",
        "constant:tall",
    ],
)
def test_bad_provider_specs_exit_1(tmp_path, spec):
    inp = corpus_file(tmp_path, [{"id": "a", "code": "x = 1\n"}])
    with pytest.raises(SystemExit) as err:
        main(["analyze", "--input", inp, "--provider", spec])
    assert err.value.code == 1


def test_remote_provider_requires_url(tmp_path, monkeypatch):
    monkeypatch.delenv("LMCC_ENTROPY_ENDPOINT", raising=False)
    inp = corpus_file(tmp_path, [{"id": "a", "code": "x = 1\n"}])
    with pytest.raises(SystemExit) as err:
        main(["analyze", "--input", inp, "--provider", "remote"])
    assert err.value.code == 1


# -------------------------------------------------------- entropy providers


def test_analyze_synthetic_provider_spec(tmp_path):
    inp = corpus_file(tmp_path, [{"id": "n3", "code": gen_nested(3).code}])
    out = str(tmp_path / "out.jsonl")
    spec = "synthetic:mu_low=1.0,mu_high=3.0,eta=0.25,boundary_rule=line_start,seed=7"
    assert run("analyze", "--input", inp, "--output", out, "--provider", spec) == 0
    (record,) = read_jsonl(out)
    assert record["lmcc"] > 0
    assert record["tau"] > 0


def test_analyze_remote_provider_via_env(tmp_path, monkeypatch, stub_server):
    def respond(path, body):
        spans = [[t.start, t.end, 1.0] for t in scan(body["code"]).tokens]
        return 200, {"tokens": spans}

    server, url = stub_server(respond)
    monkeypatch.setenv("LMCC_ENTROPY_ENDPOINT", url)

    inp = corpus_file(tmp_path, [{"id": "flat2", "code": gen_flat(2).code}])
    out = str(tmp_path / "out.jsonl")
    assert run("analyze", "--input", inp, "--output", out, "--provider", "remote") == 0
    (record,) = read_jsonl(out)
    assert record["lmcc"] == pytest.approx(5.6)
    assert len(server.requests) == 1


# --------------------------------------------------------------- correlate


def anti_monotone_rows(n):
    # metric strictly rises while score strictly falls; the control is a
    # fixed permutation so the partial correlation stays well defined
    return [
        {"id": f"r{i}", "lmcc": float(i), "score": float(n - i), "token_count": float((i * 37) % n)}
        for i in range(n)
    ]


def test_correlate_antimonotone_corpus(tmp_path):
    inp = corpus_file(tmp_path, anti_monotone_rows(120), "metrics.jsonl")
    out = str(tmp_path / "report.json")
    assert run("correlate", "--input", inp, "--output", out) == 0

    report = json.loads(open(out).read())
    assert report["config"]["metric"] == "lmcc"
    assert report["config"]["g_range"] == [9, 11]
    assert report["n_samples"] == 120
    assert [res["group_count"] for res in report["per_g"]] == [9, 10, 11]
    best = report["best"]
    assert best["r_zero"] == pytest.approx(-1.0)
    assert best["p_zero"] < 0.05
    assert best["group_count"] == 9  # ties on |r| resolve toward fewer groups
    assert report["best_partial"] != "ns"


def test_correlate_noise_corpus_reports_ns(tmp_path):
    import random

    rng = random.Random(0)  # same frozen shuffle as the library-level test
    score = [i / 199.0 for i in range(200)]
    control = [float(rng.randint(5, 400)) for _ in range(200)]
    rng.shuffle(score)
    rows = [
        {"id": f"r{i}", "lmcc": float(i), "score": score[i], "token_count": control[i]}
        for i in range(200)
    ]
    inp = corpus_file(tmp_path, rows, "metrics.jsonl")
    out = str(tmp_path / "report.json")
    assert run("correlate", "--input", inp, "--output", out) == 0
    report = json.loads(open(out).read())
    assert report["best"] == "ns"
    assert report["best_partial"] == "ns"


def test_correlate_skips_error_and_incomplete_rows(tmp_path):
    rows = anti_monotone_rows(100)
    rows.insert(3, {"id": "broken", "error": "CoverageGap", "message": "no spans"})
    rows.insert(7, {"id": "partial-row", "lmcc": 4.0, "score": 0.5})
    inp = corpus_file(tmp_path, rows, "metrics.jsonl")
    out = str(tmp_path / "report.json")
    assert run("correlate", "--input", inp, "--output", out) == 0
    assert json.loads(open(out).read())["n_samples"] == 100


def test_correlate_custom_metric_key(tmp_path):
    rows = [
        {"id": f"r{i}", "cc": float(i % 7), "score": float(100 - i), "token_count": float(i)}
        for i in range(100)
    ]
    inp = corpus_file(tmp_path, rows, "metrics.jsonl")
    out = str(tmp_path / "report.json")
    assert run("correlate", "--input", inp, "--output", out, "--metric", "cc") == 0
    report = json.loads(open(out).read())
    assert report["config"]["metric"] == "cc"
    assert report["n_samples"] == 100


def test_correlate_too_few_rows_exits_2(tmp_path, capsys):
    inp = corpus_file(tmp_path, anti_monotone_rows(8), "metrics.jsonl")
    assert run("correlate", "--input", inp) == 2
    assert "error:" in capsys.readouterr().err


def test_correlate_bad_group_range_exits_1(tmp_path):
    inp = corpus_file(tmp_path, anti_monotone_rows(30), "metrics.jsonl")
    for flags in (["--min-groups", "5", "--max-groups", "3"], ["--min-groups", "1"]):
        with pytest.raises(SystemExit) as err:
            main(["correlate", "--input", inp, *flags])
        assert err.value.code == 1


def test_correlate_alpha_sweep(tmp_path):
    rows = [
        {
            "id": f"r{i}",
            "total_branch": 2 * i,
            "total_comp_level": 6 * i,
            "score": float(60 - i),
            "token_count": float((i * 37) % 60),
        }
        for i in range(60)
    ]
    inp = corpus_file(tmp_path, rows, "metrics.jsonl")
    out = str(tmp_path / "sweep.jsonl")
    assert run("correlate", "--input", inp, "--output", out, "--alpha-sweep", "0,0.5,1") == 0

    records = read_jsonl(out)
    assert [rec["alpha"] for rec in records] == [0.0, 0.5, 1.0]
    for rec in records:
        # every alpha mixes two increasing series, so ranks never change
        assert rec["best"]["r_zero"] == pytest.approx(-1.0)
        assert len(rec["per_g"]) == 3


def test_correlate_is_deterministic(tmp_path):
    inp = corpus_file(tmp_path, anti_monotone_rows(90), "metrics.jsonl")
    out1, out2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert run("correlate", "--input", inp, "--output", out1) == 0
    assert run("correlate", "--input", inp, "--output", out2) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


# -------------------------------------------------------------------- gate


def pairs_file(tmp_path, pairs):
    path = tmp_path / "pairs.jsonl"
    write_jsonl(path, pairs)
    return str(path)


def test_gate_identity_pairs_rejected(tmp_path):
    pairs = [
        {"id": f"p{i}", "original": gen_flat(i).code, "rewritten": gen_flat(i).code}
        for i in range(1, 5)
    ]
    inp = pairs_file(tmp_path, pairs)
    out = str(tmp_path / "out.jsonl")
    assert run("gate", "--pairs", inp, "--output", out, "--percentile", "100") == 0
    for record in read_jsonl(out):
        assert record["accepted"] is False
        assert record["reason"] == "lmcc_not_lower"
        assert record["cc_before"] == record["cc_after"]
        assert record["lmcc_before"] == record["lmcc_after"]


def test_gate_accepts_flattening_rewrite(tmp_path):
    inp = pairs_file(
        tmp_path, [{"id": "n2", "original": gen_nested(2).code, "rewritten": gen_flat(2).code}]
    )
    out = str(tmp_path / "out.jsonl")
    assert run("gate", "--pairs", inp, "--output", out, "--percentile", "100") == 0
    (record,) = read_jsonl(out)
    assert record["accepted"] is True
    assert record["reason"] == "ok"
    assert record["cc_before"] == record["cc_after"] == 3
    assert record["lmcc_before"] == pytest.approx(6.8)
    assert record["lmcc_after"] == pytest.approx(5.6)


def test_gate_percentile_splits_originals(tmp_path):
    pairs = [
        {"id": f"p{n}", "original": gen_flat(n).code, "rewritten": gen_flat(n).code}
        for n in range(1, 11)
    ]
    inp = pairs_file(tmp_path, pairs)
    out = str(tmp_path / "out.jsonl")
    assert run("gate", "--pairs", inp, "--output", out) == 0  # default percentile 50

    records = read_jsonl(out)
    assert [r["id"] for r in records] == [f"p{n}" for n in range(1, 11)]
    reasons = [r["reason"] for r in records]
    assert reasons[:5] == ["below_percentile"] * 5
    assert reasons[5:] == ["lmcc_not_lower"] * 5
    assert all(r["lmcc_after"] is None for r in records[:5])


def test_gate_malformed_pair_exits_2(tmp_path, capsys):
    inp = pairs_file(tmp_path, [{"id": "p", "original": "x = 1\n"}])
    assert run("gate", "--pairs", inp) == 2
    assert "error:" in capsys.readouterr().err


def test_gate_unanalyzable_original_becomes_error_record(tmp_path):
    pairs = [
        {"id": "blank", "original": "# nothing but a comment\n", "rewritten": "x = 1\n"},
        {"id": "ok", "original": gen_flat(1).code, "rewritten": gen_flat(1).code},
    ]
    inp = pairs_file(tmp_path, pairs)
    out = str(tmp_path / "out.jsonl")
    assert run("gate", "--pairs", inp, "--output", out, "--percentile", "100") == 2
    first, second = read_jsonl(out)
    assert first == {"id": "blank", "error": "AnalysisError", "message": first["message"]}
    assert second["reason"] == "lmcc_not_lower"


def test_gate_equivalence_hook_wired_through(tmp_path):
    import sys

    inp = pairs_file(
        tmp_path,
        [
            {
                "id": "n2",
                "original": gen_nested(2).code,
                "rewritten": gen_flat(2).code,
                "task_kind": "translation",
            }
        ],
    )
    out = str(tmp_path / "out.jsonl")
    failing = f"{sys.executable} -c 'raise SystemExit(3)'"
    assert run("gate", "--pairs", inp, "--output", out, "--percentile", "100", "--equiv-cmd", failing) == 0
    assert read_jsonl(out)[0]["reason"] == "equivalence_failed"

    passing = f"{sys.executable} -c 'raise SystemExit(0)'"
    assert run("gate", "--pairs", inp, "--output", out, "--percentile", "100", "--equiv-cmd", passing) == 0
    assert read_jsonl(out)[0]["reason"] == "ok"


# ---------------------------------------------------------------- generate


def test_generate_nested_then_analyze(tmp_path):
    gen_out = str(tmp_path / "gen.jsonl")
    assert run("generate", "--family", "nested", "--n", "2", "--output", gen_out) == 0
    (program,) = read_jsonl(gen_out)
    assert program["family"] == "nested"
    assert program["expected"] == gen_nested(2).expected

    inp = corpus_file(tmp_path, [{"id": "n2", "code": program["code"]}])
    out = str(tmp_path / "metrics.jsonl")
    assert run("analyze", "--input", inp, "--output", out) == 0
    (record,) = read_jsonl(out)
    assert record["total_comp_level"] == 14
    assert record["total_branch"] == 5
    assert record["lmcc"] == pytest.approx(6.8)
    assert record["cc"] == 3


def test_generate_length_pair(tmp_path):
    out = str(tmp_path / "gen.jsonl")
    assert run("generate", "--family", "pair", "--length", "63", "--k", "3", "--output", out) == 0
    flat, chain = read_jsonl(out)
    assert flat["family"] == "length_pair_flat"
    assert chain["family"] == "length_pair_chain"
    assert flat["expected"]["token_count"] == chain["expected"]["token_count"] == 63
    assert chain["expected"]["difference"] == 3

    assert run("generate", "--family", "chain", "--length", "63", "--k", "3", "--output", out) == 0
    (only,) = read_jsonl(out)
    assert only["code"] == chain["code"]

    assert run("generate", "--family", "flat-equal", "--length", "63", "--k", "3", "--output", out) == 0
    (only,) = read_jsonl(out)
    assert only["code"] == flat["code"]


def test_generate_invalid_length_exits_2(tmp_path, capsys):
    assert run("generate", "--family", "pair", "--length", "12", "--k", "3") == 2
    assert "error:" in capsys.readouterr().err


# ----------------------------------------------------------------- rewrite


FENCED = "Simplified Code:\n```python\nx = 1\n```\n"


def test_rewrite_collects_candidates(tmp_path, stub_server):
    server, url = stub_server(lambda path, body: (200, {"text": FENCED}))
    inp = corpus_file(tmp_path, [{"id": "s", "code": "a = 2\n"}])
    out = str(tmp_path / "out.jsonl")
    assert run("rewrite", "--input", inp, "--output", out, "--endpoint", url, "--attempts", "2") == 0

    records = read_jsonl(out)
    assert [r["id"] for r in records] == ["s::0", "s::1"]
    for record in records:
        assert record["original"] == "a = 2\n"
        assert record["rewritten"] == "x = 1\n"
        assert record["task_kind"] == "translation"


def test_rewrite_endpoint_from_environment(tmp_path, monkeypatch, stub_server):
    server, url = stub_server(lambda path, body: (200, {"text": FENCED}))
    monkeypatch.setenv("LMCC_REWRITE_ENDPOINT", url)
    inp = corpus_file(tmp_path, [{"id": "s", "code": "a = 2\n"}])
    out = str(tmp_path / "out.jsonl")
    argv = ["rewrite", "--input", inp, "--output", out, "--attempts", "1", "--task-kind", "repair"]
    assert main(argv) == 0
    (record,) = read_jsonl(out)
    assert record["task_kind"] == "repair"


def test_rewrite_requires_endpoint(tmp_path, monkeypatch):
    monkeypatch.delenv("LMCC_REWRITE_ENDPOINT", raising=False)
    inp = corpus_file(tmp_path, [{"id": "s", "code": "a = 2\n"}])
    with pytest.raises(SystemExit) as err:
        main(["rewrite", "--input", inp])
    assert err.value.code == 1


def test_rewrite_no_candidates_exits_2(tmp_path, stub_server):
    server, url = stub_server(lambda path, body: (200, {"text": "prose, no code"}))
    inp = corpus_file(tmp_path, [{"id": "s", "code": "a = 2\n"}])
    out = str(tmp_path / "out.jsonl")
    assert run("rewrite", "--input", inp, "--output", out, "--endpoint", url, "--attempts", "2") == 2
    (record,) = read_jsonl(out)
    assert record["error"] == "NoCandidates"


def test_rewrite_endpoint_down_exits_2(tmp_path, capsys):
    inp = corpus_file(tmp_path, [{"id": "s", "code": "a = 2\n"}])
    argv = ["rewrite", "--input", inp, "--endpoint", "http://127.0.0.1:1", "--attempts", "1"]
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err
