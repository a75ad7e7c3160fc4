import numpy as np

from conftest import TARGET, entity, graph_of
from reposcope.graph import Relation
from reposcope.pipeline import resolve_target, run_target
from reposcope.retrieval import (
    count_tokens,
    entity_distance,
    retrieve_callers,
    retrieve_similar_fragments,
    retrieve_similar_functions,
    tree_distance,
)
from reposcope.source_model import FUNCTION, Fragment

R = Relation


def test_count_tokens():
    assert count_tokens("") == 0
    assert count_tokens("abcdefgh") == 2
    assert count_tokens("x" * 4000) == 1000
    assert count_tokens("abcde") == 2


def test_tree_distance():
    assert tree_distance("a/b/x.py", "a/b/x.py") == 0
    assert tree_distance("a/b/x.py", "a/b/y.py") == 2
    assert tree_distance("a/b/x.py", "a/c/y.py") == 4


def test_entity_distance_ordering():
    f = entity(0, FUNCTION, "f", file="p/a.py", line=20)
    near = entity(1, FUNCTION, "n", file="p/a.py", line=10)
    far = entity(2, FUNCTION, "m", file="p/a.py", line=30)
    sibling = entity(3, FUNCTION, "s", file="p/b.py", line=1)
    cousin = entity(4, FUNCTION, "c", file="q/b.py", line=1)
    assert entity_distance(near, f)[:3] == entity_distance(far, f)[:3]
    assert entity_distance(near, f) < entity_distance(far, f)  # tie broken by position
    assert entity_distance(sibling, f) < entity_distance(cousin, f)
    assert entity_distance(f, f) == min(entity_distance(e, f) for e in (f, near, far, sibling, cousin))


def test_callers_sorted_by_line_gap():
    ents = [entity(0, FUNCTION, "t", line=100), entity(1, FUNCTION, "a", line=150),
            entity(2, FUNCTION, "b", line=105), entity(3, FUNCTION, "z", line=1)]
    g = graph_of(ents, [(1, R.CALLS, 0), (2, R.CALLS, 0)])
    units = retrieve_callers(g, 0, 5, {})
    assert [u.entity for u in units] == [2, 1]
    assert retrieve_callers(g, 3, 5, {}) == []
    assert len(retrieve_callers(g, 0, 1, {})) == 1


def test_similar_functions_hand_cosines():
    ents = [entity(0, FUNCTION, "f"), entity(1, FUNCTION, "a"), entity(2, FUNCTION, "b"),
            entity(3, FUNCTION, "c")]
    g = graph_of(ents, [])
    # cosines against f: a=0.6, b=1.0, c=-1.0
    g.embeddings = np.array([[1.0, 0.0], [0.6, 0.8], [2.0, 0.0], [-1.0, 0.0]])
    units = retrieve_similar_functions(g, 0, 2, {})
    assert [u.entity for u in units] == [2, 1]
    assert abs(units[1].score - 0.6) < 1e-12
    assert retrieve_similar_functions(g, 0, 0, {}) == []


def test_similar_fragments_order_and_self_exclusion():
    frags = [Fragment("a.py", 1, 20, "one"), Fragment("a.py", 11, 30, "two"),
             Fragment("b.py", 1, 20, "three"), Fragment("c.py", 1, 20, "four")]
    vecs = np.array([[1.0, 0.0], [0.0, 1.0], [0.8, 0.6], [0.6, 0.8]])
    units = retrieve_similar_fragments(frags, vecs, np.array([1.0, 0.0]), 10)
    assert [u.payload.split("\n")[1] for u in units] == ["one", "three", "four", "two"]
    target = entity(9, FUNCTION, "f", file="a.py", line=25)  # lines 25-30
    units = retrieve_similar_fragments(frags, vecs, np.array([1.0, 0.0]), 10, target)
    assert [u.payload.split("\n")[1] for u in units] == ["one", "three", "four"]


def test_fixture_four_views(infrared_index, infrared_cfg):
    t = resolve_target(infrared_index, TARGET)
    run = run_target(infrared_index, t, infrared_cfg)
    ctx = run.context
    for view in ("callers", "chains", "sim_functions", "sim_fragments"):
        assert 0 < len(ctx.view(view)) <= 5, view
    g = infrared_index.graph
    callers = [g[u.entity].name for u in ctx.callers]
    assert "validate_arg_deprecation" in callers
    for u in ctx.callers:
        assert t.entity in g.successors(u.entity, Relation.CALLS)
    sims = [g[u.entity].name for u in ctx.sim_functions]
    assert "get_deprecated_args" not in sims
    scores = [u.score for u in ctx.sim_functions]
    assert scores == sorted(scores, reverse=True)
    assert ctx.callers[0].payload.startswith(
        "# filepath: infrared/core/inspector/inspector.py, owning class: SpecParser\n")
    for u in ctx.sim_fragments:
        assert u.payload.startswith("# ")
        assert "def get_deprecated_args" not in u.payload


def test_convert_non_cli_args_in_top_ten(infrared_index):
    # lexical hashed embeddings place it 10th; a semantic model is needed for top 5
    t = resolve_target(infrared_index, TARGET)
    g = infrared_index.graph
    units = retrieve_similar_functions(g, t.entity, 10, infrared_index.sources)
    assert "_convert_non_cli_args" in [g[u.entity].name for u in units]
