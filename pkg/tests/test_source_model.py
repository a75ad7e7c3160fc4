import ast

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reposcope.source_model import (
    ATTRIBUTE,
    CLASS,
    FUNCTION,
    normalize_path,
    parse_file,
    scan_repository,
    slice_fragments,
)

FIVE_LINES = "class A:\n  x: int = 0\n  def f(self):\n    return self.x\n"


def test_empty_file():
    fm = parse_file("a.py", "")
    assert fm.declarations == () and fm.imports == ()


def test_five_line_fixture():
    fm = parse_file("a.py", FIVE_LINES)
    kinds = [(d.kind, d.qualified_name) for d in fm.declarations]
    assert kinds == [(CLASS, "A"), (ATTRIBUTE, "A.x"), (FUNCTION, "A.f")]
    x = fm.get("A.x")
    assert x.annotation_text == "int" and x.parent == "A"
    f = fm.get("A.f")
    assert [c.receiver_chain for c in f.body_call_sites] == [("self", "x")]


def test_five_line_fixture_matches_ast_dump():
    # independent reference: walk the stdlib AST by hand
    tree = ast.parse(FIVE_LINES)
    cls = tree.body[0]
    ann = cls.body[0]
    assert isinstance(ann, ast.AnnAssign) and ast.unparse(ann.annotation) == "int"
    fm = parse_file("a.py", FIVE_LINES)
    assert fm.get("A").line_span == (cls.lineno, cls.end_lineno)
    assert fm.get("A.f").line_span == (cls.body[1].lineno, cls.body[1].end_lineno)


def test_from_import():
    fm = parse_file("pkg/x.py", "from m import C\n")
    (imp,) = fm.imports
    assert imp.imported_name == "C" and imp.source_module == "m"


def test_self_assignment_attribute():
    src = "class B:\n    def __init__(self):\n        self.y = 1\n"
    fm = parse_file("b.py", src)
    assert fm.get("B.y").kind == ATTRIBUTE and fm.get("B.y").parent == "B"


def test_nested_function_calls_attach_to_enclosing():
    src = "def outer():\n    def inner():\n        helper()\n    return inner\n"
    fm = parse_file("c.py", src)
    assert [d.qualified_name for d in fm.declarations] == ["outer"]
    assert ("helper",) in [c.receiver_chain for c in fm.get("outer").body_call_sites]


def test_decorated_and_async_are_functions():
    src = "import functools\n\n@functools.cache\nasync def go(a):\n    pass\n"
    d = parse_file("d.py", src).get("go")
    assert d.kind == FUNCTION and "@functools.cache" in d.signature_text


def test_recoverable_syntax_error():
    src = "def ok():\n    return 1\n\ndef broken(:\n    pass\n"
    fm = parse_file("e.py", src)
    assert fm.get("ok") is not None and fm.recovered_lines


def test_scan_repository(tmp_repo):
    root = tmp_repo({"b/z.py": "x = 1\n", "a.py": "def f():\n    pass\n", "notes.txt": "hi",
                     "build/skip.py": "def g():\n    pass\n"})
    result = scan_repository(root, ["build"])
    assert [f.path for f in result.files] == ["a.py", "b/z.py"]


def test_scan_empty_and_missing(tmp_path):
    assert scan_repository(tmp_path).files == []
    with pytest.raises(FileNotFoundError):
        scan_repository(tmp_path / "nope")


def test_unparseable_file_is_skipped_with_diagnostic(tmp_repo):
    root = tmp_repo({"good.py": "def f():\n    pass\n", "bad.py": "\x00\x00"})
    result = scan_repository(root)
    assert [f.path for f in result.files] == ["good.py"]
    assert any(d.path == "bad.py" for d in result.diagnostics)


def test_normalize_path():
    assert normalize_path("a\\b\\..\\c.py") == "a/c.py"
    assert normalize_path("./x/y.py") == "x/y.py"


@pytest.mark.parametrize("n,expected", [
    (10, [(1, 10)]),
    (30, [(1, 20), (11, 30)]),
    (0, []),
])
def test_slice_fragments(n, expected):
    src = "".join(f"line{i}\n" for i in range(n))
    assert [(f.start_line, f.end_line) for f in slice_fragments("a.py", src, 20, 10)] == expected


@settings(max_examples=200, deadline=None)
@given(n=st.integers(0, 80), window=st.integers(1, 25), stride=st.integers(1, 25))
def test_fragment_coverage(n, window, stride):
    src = "".join(f"l{i}\n" for i in range(n))
    frags = slice_fragments("a.py", src, window, stride)
    for fr in frags[:-1]:
        assert fr.end_line - fr.start_line + 1 == window
    if stride <= window:
        covered = {i for fr in frags for i in range(fr.start_line, fr.end_line + 1)}
        assert covered == set(range(1, n + 1))


def test_parse_is_deterministic():
    src = "class A:\n    def f(self):\n        self.g()\n    def g(self):\n        pass\n"
    assert parse_file("a.py", src) == parse_file("a.py", src)
