from __future__ import annotations

import random
from dataclasses import replace
from pathlib import Path

import pytest

from reposcope.config import load_config
from reposcope.graph import R_ST, RSSG, SCHEMA, Entity, Relation, RelationTriple
from reposcope.pipeline import build_index
from reposcope.source_model import ATTRIBUTE, CLASS, FUNCTION

FIXTURES = Path(__file__).parent / "fixtures"
INFRARED = FIXTURES / "infrared"
CORPUS = FIXTURES / "corpus"
TARGET = "infrared/core/inspector/inspector.py:SpecParser.get_deprecated_args"

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


def entity(eid: int, kind: str, name: str | None = None, file: str = "pkg/mod.py",
           owner: str = "", signature: str | None = None, docstring: str = "",
           line: int | None = None) -> Entity:
    name = name or f"{kind[0]}{eid}"
    qname = f"{owner}.{name}" if owner else name
    if signature is None:
        signature = {CLASS: f"class {name}", FUNCTION: f"def {name}(self)"}.get(kind, "")
    line = eid * 10 + 1 if line is None else line
    path = file[:-3] + "/" + qname.replace(".", "/")
    return Entity(eid, kind, name, signature, docstring, path, file, qname, (line, line + 5))


def graph_of(entities, edges) -> RSSG:
    """``edges`` are ``(head, relation, tail)`` or ``(head, relation, tail, weight)``."""
    triples = []
    for e in edges:
        h, r, t = e[:3]
        w = e[3] if len(e) > 3 else (1 if r is Relation.CALLS else None)
        triples.append(RelationTriple(h, r, t, w))
    return RSSG(list(entities), triples)


def random_graph(rng: random.Random, n: int, density: float = 1.5) -> RSSG:
    """Schema-valid random graph; Contains is a forest over increasing ids."""
    kinds = [rng.choice([CLASS, CLASS, FUNCTION, FUNCTION, ATTRIBUTE]) for _ in range(n)]
    kinds[0] = CLASS
    ents = [entity(i, k) for i, k in enumerate(kinds)]
    keys = set()
    triples = []
    has_parent = set()
    for _ in range(int(density * n)):
        h, t = rng.randrange(n), rng.randrange(n)
        if h == t:
            continue
        options = [r for r in sorted(R_ST, key=lambda r: r.value)
                   if kinds[h] in SCHEMA[r][0] and kinds[t] in SCHEMA[r][1]]
        if not options:
            continue
        r = rng.choice(options)
        if r is Relation.CONTAINS and (h > t or t in has_parent):
            continue
        if (h, r.value, t) in keys:
            continue
        keys.add((h, r.value, t))
        if r is Relation.CONTAINS:
            has_parent.add(t)
        triples.append(RelationTriple(h, r, t))
    return RSSG(ents, triples)


@pytest.fixture(scope="session")
def infrared_cfg():
    return load_config(str(INFRARED))


@pytest.fixture(scope="session")
def infrared_index(infrared_cfg):
    index, _ = build_index(infrared_cfg)
    return index


@pytest.fixture
def tmp_repo(tmp_path):
    """Write ``{relpath: source}`` into a fresh repository directory."""
    def make(files: dict[str, str]) -> Path:
        root = tmp_path / "repo"
        for rel, text in files.items():
            p = root / rel
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8")
        root.mkdir(exist_ok=True)
        return root
    return make


def cfg_for(root, **kw):
    return replace(load_config(str(root)), **kw)
