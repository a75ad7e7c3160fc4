import json
from dataclasses import replace

import pytest

from conftest import CORPUS, INFRARED, TARGET
from reposcope.chains import CallChain, ChainConfig
from reposcope.config import load_config
from reposcope.evaluation import (
    f1,
    ground_truth_callees,
    index_corpus,
    predicted_callees,
    reports_json,
    run_benchmark,
    variant_config,
)
from reposcope.graph import Relation
from reposcope.pipeline import build_index, resolve_target


def test_f1_examples():
    assert f1({"a", "b"}, {"b", "c"}) == (0.5, 0.5, 0.5)
    assert f1({"a"}, {"a"}) == (1.0, 1.0, 1.0)
    assert f1({"a"}, {"b"})[2] == 0.0
    assert f1(set(), set()) == (1.0, 1.0, 1.0)
    assert f1(set(), {"a"}) == (0.0, 0.0, 0.0)


def test_f1_swap_symmetry():
    p, r, f = f1({1, 2, 3}, {3, 4})
    p2, r2, f2 = f1({3, 4}, {1, 2, 3})
    assert (p, r) == (r2, p2) and f == f2


def test_predicted_callees():
    assert predicted_callees([]) == set()
    assert predicted_callees([CallChain((0, 1, 2), (Relation.CONTAINS, Relation.RETURNS))], {0}) == {1, 2}


def test_ground_truth_of_fixture_target(infrared_index):
    g = infrared_index.graph
    t = resolve_target(infrared_index, TARGET)
    names = {g[e].path.rsplit("/", 1)[-1] for e in ground_truth_callees(g, t.entity)}
    assert names == {"spec_helper", "SpecDictHelper", "iterate_option_specs"}


def test_ground_truth_empty_body(tmp_repo):
    root = tmp_repo({"a.py": "def g():\n    pass\n\ndef h():\n    pass\n\ndef f():\n    g()\n    h()\n"})
    index, _ = build_index(load_config(str(root)))
    g = index.graph
    by_name = {e.name: e.id for e in g.entities}
    assert ground_truth_callees(g, by_name["g"]) == set()
    assert ground_truth_callees(g, by_name["f"]) == {by_name["g"], by_name["h"]}


def test_variant_configs():
    base = ChainConfig()
    assert variant_config("full", base) == base
    assert variant_config("no-wes", base).alpha2 == 0
    assert variant_config("no-dfs", base).l_max == 1
    assert variant_config("no-cce", base).extend is False
    with pytest.raises(ValueError):
        variant_config("no-such", base)


def test_empty_corpus():
    assert run_benchmark([], ["full", "no-wes"]) == []


@pytest.fixture(scope="module")
def single_repo():
    return index_corpus(CORPUS, load_config(str(CORPUS)))[:1]


def test_single_repo_matched_and_deterministic(single_repo):
    a = run_benchmark(single_repo, ["full", "no-wes"])
    b = run_benchmark(single_repo, ["full", "no-wes"])
    assert [r.variant for r in a] == ["full", "no-wes"]
    if a[1].matched:
        assert abs(a[0].mean_callees - a[1].mean_callees) <= 0.5
    assert json.dumps(reports_json(a), sort_keys=True) == json.dumps(reports_json(b), sort_keys=True)


def test_report_consistency(single_repo):
    (report,) = run_benchmark(single_repo, ["full"])
    doc = report.to_json()
    tp = sum(t.tp for t in report.targets)
    fp = sum(t.fp for t in report.targets)
    assert doc["micro"]["precision"] == pytest.approx(tp / (tp + fp))
    for t in report.targets:
        assert 0 <= t.f1 <= 1
    assert doc["n_targets"] == len(report.targets) > 0


def test_no_leak_of_target_body(infrared_index):
    # masking drops the target's Calls edges but keeps its embedding
    from reposcope.evaluation import _prepare

    prepared = _prepare("infrared", infrared_index, ChainConfig())
    for item in prepared:
        assert not item.graph.successors(item.target, Relation.CALLS)
        assert item.graph.embeddings is infrared_index.graph.embeddings


def test_no_dfs_predicts_only_starts(single_repo):
    (r,) = run_benchmark(single_repo, ["no-dfs"], match=False)
    assert r.mean_callees == 0


def test_index_corpus_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        index_corpus(tmp_path / "nope", load_config(str(INFRARED)))


def test_index_corpus_respects_seed():
    cfg = replace(load_config(str(CORPUS)), seed=7)
    corpus = index_corpus(CORPUS, cfg)
    assert len(corpus) >= 5 and all(ix.clusters["seed"] == 7 for _, ix in corpus)
