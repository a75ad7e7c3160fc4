"""Language-level model of Python source files.

Parsing is done with the stdlib :mod:`ast` module.  Files that fail to parse
are retried with the offending lines blanked out (a cheap form of error
recovery); files that still fail are reported through :class:`ParseDiagnostic`
and skipped by :func:`scan_repository`.
"""

from __future__ import annotations

import ast
import fnmatch
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

log = logging.getLogger(__name__)

CLASS = "class"
FUNCTION = "function"
ATTRIBUTE = "attribute"

#: Marker appended to a receiver-chain element that is itself invoked
#: mid-chain, e.g. ``a.make().run()`` -> ``["a", "make()", "run"]``.
CALL_MARK = "()"

_MAX_RECOVERY_ATTEMPTS = 20


class SourceParseError(Exception):
    """Raised when a file cannot be parsed even after recovery."""

    def __init__(self, path: str, message: str, line: int | None = None):
        super().__init__(f"{path}:{line or '?'}: {message}")
        self.path = path
        self.line = line
        self.message = message


@dataclass(frozen=True)
class CallSite:
    receiver_chain: tuple[str, ...]
    line: int
    is_invocation: bool

    def __post_init__(self):
        if not self.receiver_chain:
            raise ValueError("receiver_chain must be non-empty")


@dataclass(frozen=True)
class Binding:
    """A local ``name = <chain>`` assignment inside a function body."""

    target: str
    value_chain: tuple[str, ...]
    invoked: bool
    line: int
    annotation: str = ""


@dataclass(frozen=True)
class ImportDecl:
    imported_name: str
    alias: str
    source_module: str
    line: int

    @property
    def bound_name(self) -> str:
        """Name the import binds in the importing module's namespace."""
        if self.alias:
            return self.alias
        if self.source_module:
            return self.imported_name
        return self.imported_name.split(".")[0]


@dataclass(frozen=True)
class RawDecl:
    kind: str
    name: str
    qualified_name: str
    signature_text: str
    docstring: str
    annotation_text: str
    parent: str
    line_span: tuple[int, int]
    body_call_sites: tuple[CallSite, ...] = ()
    base_class_names: tuple[str, ...] = ()
    # functions: parameter annotations, return annotation, local bindings
    params: tuple[str, ...] = ()
    param_annotations: tuple[tuple[str, str], ...] = ()
    return_annotation: str = ""
    returned_chains: tuple[tuple[str, ...], ...] = ()
    bindings: tuple[Binding, ...] = ()
    # attributes: right-hand side of the first ``self.x = ...`` and the
    # method it was assigned in (for resolving parameter-typed values)
    value_chain: tuple[str, ...] = ()
    value_invoked: bool = False
    assigned_in: str = ""


@dataclass(frozen=True)
class FileModel:
    path: str
    declarations: tuple[RawDecl, ...] = ()
    imports: tuple[ImportDecl, ...] = ()
    module_call_sites: tuple[CallSite, ...] = ()
    line_count: int = 0
    recovered_lines: tuple[int, ...] = ()

    @property
    def module_name(self) -> str:
        return module_name_for(self.path)

    def get(self, qualified_name: str) -> RawDecl | None:
        for decl in self.declarations:
            if decl.qualified_name == qualified_name:
                return decl
        return None


@dataclass(frozen=True)
class Fragment:
    path: str
    start_line: int
    end_line: int
    text: str


@dataclass(frozen=True)
class ParseDiagnostic:
    path: str
    line: int | None
    message: str


@dataclass
class ScanResult:
    files: list[FileModel] = field(default_factory=list)
    sources: dict[str, str] = field(default_factory=dict)
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)


def normalize_path(path: str) -> str:
    """Repo-relative forward-slash path with ``.`` and ``..`` collapsed."""
    parts: list[str] = []
    for part in str(path).replace("\\", "/").split("/"):
        if part in ("", "."):
            continue
        if part == "..":
            if parts:
                parts.pop()
            continue
        parts.append(part)
    return "/".join(parts)


def module_name_for(path: str) -> str:
    p = PurePosixPath(normalize_path(path))
    parts = list(p.with_suffix("").parts)
    if parts and parts[-1] == "__init__":
        parts.pop()
    return ".".join(parts)


# --------------------------------------------------------------------------
# expression helpers
# --------------------------------------------------------------------------

def expr_chain(node: ast.expr) -> tuple[str, ...] | None:
    """Flatten ``a.b.c`` / ``a.b().c`` into identifiers, or None."""
    parts: list[str] = []
    while True:
        if isinstance(node, ast.Attribute):
            parts.append(node.attr)
            node = node.value
        elif isinstance(node, ast.Call):
            inner = node.func
            if isinstance(inner, (ast.Attribute, ast.Name)):
                # mark the element produced by the call
                node = inner
                tail = expr_chain(inner)
                if tail is None:
                    return None
                tail = tail[:-1] + (tail[-1] + CALL_MARK,)
                return tail + tuple(reversed(parts))
            return None
        elif isinstance(node, ast.Name):
            parts.append(node.id)
            return tuple(reversed(parts))
        else:
            return None


def annotation_names(text: str) -> list[str]:
    """Dotted names mentioned in an annotation expression (strings included)."""
    if not text:
        return []
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        return []
    names: list[str] = []

    def visit(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, str):
            names.extend(annotation_names(node.value))
            return
        chain = expr_chain(node) if isinstance(node, (ast.Name, ast.Attribute)) else None
        if chain is not None:
            names.append(".".join(chain))
            return
        for child in ast.iter_child_nodes(node):
            visit(child)

    visit(tree.body)
    return names


class _CallCollector(ast.NodeVisitor):
    """Collect receiver chains from a function body, nested scopes included."""

    def __init__(self, skip_names: set[str]):
        self.sites: list[CallSite] = []
        self.skip_names = skip_names

    def _record(self, node: ast.expr, invoked: bool) -> bool:
        chain = expr_chain(node)
        if chain is None:
            return False
        if len(chain) == 1 and not invoked and chain[0] in self.skip_names:
            return True
        self.sites.append(CallSite(chain, node.lineno, invoked))
        return True

    def visit_Call(self, node: ast.Call):
        if isinstance(node.func, (ast.Name, ast.Attribute)) and self._record(node.func, True):
            # the receiver was consumed as one chain; only visit inner calls
            self._visit_receiver_calls(node.func)
        else:
            self.visit(node.func)
        for arg in node.args:
            self.visit(arg)
        for kw in node.keywords:
            self.visit(kw.value)

    def _visit_receiver_calls(self, node: ast.expr):
        while isinstance(node, (ast.Attribute, ast.Call)):
            if isinstance(node, ast.Call):
                for arg in node.args:
                    self.visit(arg)
                for kw in node.keywords:
                    self.visit(kw.value)
                node = node.func
            else:
                node = node.value
        if not isinstance(node, ast.Name):
            self.visit(node)

    def visit_Attribute(self, node: ast.Attribute):
        if isinstance(node.ctx, ast.Load) and self._record(node, False):
            self._visit_receiver_calls(node)
            return
        self.generic_visit(node)

    def visit_Name(self, node: ast.Name):
        if isinstance(node.ctx, ast.Load):
            self._record(node, False)

    def visit_Lambda(self, node: ast.Lambda):
        self.visit(node.body)


def _local_names(func: ast.FunctionDef | ast.AsyncFunctionDef) -> set[str]:
    names = {a.arg for a in _all_args(func.args)}
    for node in ast.walk(func):
        if isinstance(node, ast.Name) and isinstance(node.ctx, (ast.Store, ast.Del)):
            names.add(node.id)
        elif isinstance(node, ast.arg):
            names.add(node.arg)
    return names


def _all_args(args: ast.arguments) -> list[ast.arg]:
    out = list(args.posonlyargs) + list(args.args)
    if args.vararg:
        out.append(args.vararg)
    out.extend(args.kwonlyargs)
    if args.kwarg:
        out.append(args.kwarg)
    return out


def _function_signature(node: ast.FunctionDef | ast.AsyncFunctionDef) -> str:
    prefix = "async def" if isinstance(node, ast.AsyncFunctionDef) else "def"
    sig = f"{prefix} {node.name}({ast.unparse(node.args)})"
    if node.returns is not None:
        sig += f" -> {ast.unparse(node.returns)}"
    decorators = [f"@{ast.unparse(d)}" for d in node.decorator_list]
    return "\n".join(decorators + [sig])


def _class_signature(node: ast.ClassDef) -> str:
    bases = [ast.unparse(b) for b in node.bases]
    bases += [ast.unparse(k) for k in node.keywords]
    sig = f"class {node.name}"
    if bases:
        sig += f"({', '.join(bases)})"
    decorators = [f"@{ast.unparse(d)}" for d in node.decorator_list]
    return "\n".join(decorators + [sig])


def _end(node: ast.AST) -> int:
    return getattr(node, "end_lineno", None) or node.lineno


class _ModuleWalker:
    def __init__(self, path: str):
        self.path = path
        self.module = module_name_for(path)
        self.is_package = PurePosixPath(path).name == "__init__.py"
        self.decls: list[RawDecl] = []
        self.imports: list[ImportDecl] = []
        self.module_sites: list[CallSite] = []
        self._seen: set[str] = set()

    # imports ---------------------------------------------------------------
    def _resolve_relative(self, module: str | None, level: int) -> str:
        if not level:
            return module or ""
        base = self.module.split(".") if self.module else []
        if not self.is_package:
            base = base[:-1]
        if level > 1:
            base = base[: len(base) - (level - 1)] if level - 1 <= len(base) else []
        if module:
            base = base + module.split(".")
        return ".".join(base)

    def _import(self, node: ast.Import | ast.ImportFrom):
        if isinstance(node, ast.Import):
            for alias in node.names:
                self.imports.append(ImportDecl(alias.name, alias.asname or "", "", node.lineno))
        else:
            source = self._resolve_relative(node.module, node.level)
            for alias in node.names:
                if alias.name == "*":
                    continue
                self.imports.append(ImportDecl(alias.name, alias.asname or "", source, node.lineno))

    # module body -----------------------------------------------------------
    def walk_module(self, tree: ast.Module):
        for stmt in tree.body:
            self._module_stmt(stmt)

    def _module_stmt(self, stmt: ast.stmt):
        if isinstance(stmt, (ast.Import, ast.ImportFrom)):
            self._import(stmt)
        elif isinstance(stmt, ast.ClassDef):
            self._class(stmt, parent="")
        elif isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            self._function(stmt, parent="", owner_class=None)
        elif isinstance(stmt, (ast.If, ast.Try)) or type(stmt).__name__ == "TryStar":
            for block in _blocks(stmt):
                for inner in block:
                    self._module_stmt(inner)
        else:
            collector = _CallCollector(set())
            collector.visit(stmt)
            self.module_sites.extend(collector.sites)

    def _add(self, decl: RawDecl):
        if decl.qualified_name in self._seen:
            # redefinition (e.g. property setter): keep the first
            return
        self._seen.add(decl.qualified_name)
        self.decls.append(decl)

    def _class(self, node: ast.ClassDef, parent: str):
        qname = f"{parent}.{node.name}" if parent else node.name
        bases = tuple(".".join(c) for c in map(expr_chain, node.bases) if c)
        self._add(RawDecl(
            kind=CLASS, name=node.name, qualified_name=qname,
            signature_text=_class_signature(node),
            docstring=ast.get_docstring(node) or "",
            annotation_text="", parent=parent,
            line_span=(node.lineno, _end(node)),
            base_class_names=bases,
        ))
        attrs: dict[str, dict] = {}
        for stmt in _flatten_class_body(node.body):
            if isinstance(stmt, ast.ClassDef):
                self._class(stmt, parent=qname)
            elif isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self._function(stmt, parent=qname, owner_class=qname, attrs=attrs)
            elif isinstance(stmt, ast.AnnAssign) and isinstance(stmt.target, ast.Name):
                chain, invoked = _value_chain(stmt.value)
                attrs.setdefault(stmt.target.id, dict(
                    annotation=ast.unparse(stmt.annotation), line=stmt.lineno,
                    end=_end(stmt), chain=chain, invoked=invoked, method=""))
        for name, info in sorted(attrs.items(), key=lambda kv: (kv[1]["line"], kv[0])):
            ann = info["annotation"]
            self._add(RawDecl(
                kind=ATTRIBUTE, name=name, qualified_name=f"{qname}.{name}",
                signature_text=f"{name}: {ann}" if ann else "",
                docstring="", annotation_text=ann, parent=qname,
                line_span=(info["line"], info["end"]),
                value_chain=info["chain"] or (), value_invoked=info["invoked"],
                assigned_in=info["method"],
            ))

    def _function(self, node, parent: str, owner_class: str | None, attrs: dict | None = None):
        qname = f"{parent}.{node.name}" if parent else node.name
        locals_ = _local_names(node)
        collector = _CallCollector(locals_)
        for stmt in node.body:
            collector.visit(stmt)
        for deco in node.decorator_list:
            collector.visit(deco)
        params = tuple(
            (a.arg, ast.unparse(a.annotation))
            for a in _all_args(node.args) if a.annotation is not None
        )
        bindings: list[Binding] = []
        returned: list[tuple[str, ...]] = []
        self_name = _self_name(node) if owner_class else None
        for sub in _walk_own_scope(node):
            if isinstance(sub, ast.Assign) and len(sub.targets) == 1:
                target, value = sub.targets[0], sub.value
                ann = ""
            elif isinstance(sub, ast.AnnAssign):
                target, value = sub.target, sub.value
                ann = ast.unparse(sub.annotation)
            elif isinstance(sub, ast.Return) and sub.value is not None:
                chain, invoked = _value_chain(sub.value)
                if chain and invoked:
                    returned.append(chain)
                continue
            else:
                continue
            chain, invoked = _value_chain(value)
            if isinstance(target, ast.Name):
                if chain or ann:
                    bindings.append(Binding(target.id, chain or (), invoked, sub.lineno, ann))
            elif (attrs is not None and self_name and isinstance(target, ast.Attribute)
                  and isinstance(target.value, ast.Name) and target.value.id == self_name):
                info = attrs.get(target.attr)
                if info is None:
                    attrs[target.attr] = dict(annotation=ann, line=sub.lineno, end=_end(sub),
                                              chain=chain, invoked=invoked, method=qname)
                else:
                    if ann and not info["annotation"]:
                        info["annotation"] = ann
                    if chain and not info["chain"]:
                        info.update(chain=chain, invoked=invoked, method=qname)
        self._add(RawDecl(
            kind=FUNCTION, name=node.name, qualified_name=qname,
            signature_text=_function_signature(node),
            docstring=ast.get_docstring(node) or "",
            annotation_text="", parent=parent,
            line_span=(min([node.lineno] + [d.lineno for d in node.decorator_list]), _end(node)),
            body_call_sites=tuple(collector.sites),
            params=tuple(a.arg for a in list(node.args.posonlyargs) + list(node.args.args)),
            param_annotations=params,
            return_annotation=ast.unparse(node.returns) if node.returns is not None else "",
            returned_chains=tuple(returned),
            bindings=tuple(bindings),
        ))


def _self_name(node) -> str | None:
    args = list(node.args.posonlyargs) + list(node.args.args)
    if not args:
        return None
    for deco in node.decorator_list:
        if isinstance(deco, ast.Name) and deco.id == "staticmethod":
            return None
    return args[0].arg


def _value_chain(value: ast.expr | None) -> tuple[tuple[str, ...] | None, bool]:
    if value is None:
        return None, False
    if isinstance(value, ast.Call) and isinstance(value.func, (ast.Name, ast.Attribute)):
        return expr_chain(value.func), True
    if isinstance(value, (ast.Name, ast.Attribute)):
        return expr_chain(value), False
    return None, False


def _walk_own_scope(func):
    """Statements of ``func`` excluding nested function/class bodies."""
    stack = list(func.body)
    while stack:
        node = stack.pop(0)
        yield node
        for child in ast.iter_child_nodes(node):
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)):
                continue
            if isinstance(child, ast.stmt):
                stack.append(child)


def _blocks(stmt):
    if isinstance(stmt, ast.If):
        return [stmt.body, stmt.orelse]
    handlers = [h.body for h in getattr(stmt, "handlers", [])]
    return [stmt.body, *handlers, stmt.orelse, stmt.finalbody]


def _flatten_class_body(body):
    for stmt in body:
        if isinstance(stmt, (ast.If, ast.Try)):
            for block in _blocks(stmt):
                yield from _flatten_class_body(block)
        else:
            yield stmt


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def _parse_with_recovery(path: str, source: str) -> tuple[ast.Module, tuple[int, ...]]:
    lines = source.splitlines(keepends=True)
    blanked: list[int] = []
    for _ in range(_MAX_RECOVERY_ATTEMPTS):
        try:
            return ast.parse("".join(lines), filename=path), tuple(blanked)
        except SyntaxError as exc:
            lineno = exc.lineno
            if not lineno or lineno > len(lines) or lineno in blanked:
                raise SourceParseError(path, exc.msg, lineno) from exc
            raw = lines[lineno - 1]
            indent = raw[: len(raw) - len(raw.lstrip())]
            if isinstance(exc, IndentationError):
                # usually the body of a header we already blanked: line it
                # up with the previous statement instead
                prev = next((ln for ln in reversed(lines[: lineno - 1]) if ln.strip()), "")
                indent = prev[: len(prev) - len(prev.lstrip())]
            newline = "\n" if raw.endswith("\n") else ""
            lines[lineno - 1] = f"{indent}pass{newline}"
            blanked.append(lineno)
        except ValueError as exc:  # null bytes
            raise SourceParseError(path, str(exc)) from exc
    raise SourceParseError(path, "too many syntax errors")


def parse_file(path: str, source: str) -> FileModel:
    """Parse one file into a :class:`FileModel`.

    Raises :class:`SourceParseError` if the file cannot be recovered.
    """
    path = normalize_path(path)
    tree, recovered = _parse_with_recovery(path, source)
    walker = _ModuleWalker(path)
    walker.walk_module(tree)
    decls = sorted(walker.decls, key=lambda d: (d.line_span[0], d.qualified_name))
    return FileModel(
        path=path,
        declarations=tuple(decls),
        imports=tuple(walker.imports),
        module_call_sites=tuple(walker.module_sites),
        line_count=len(source.splitlines()),
        recovered_lines=recovered,
    )


def _excluded(rel: str, excludes: list[str]) -> bool:
    for pattern in excludes:
        if fnmatch.fnmatch(rel, pattern) or any(
            fnmatch.fnmatch(part, pattern) for part in rel.split("/")
        ):
            return True
    return False


def scan_repository(root: str | os.PathLike, excludes: list[str] | None = None) -> ScanResult:
    """Parse every ``.py`` file under ``root`` in lexicographic path order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"repository root not found: {root}")
    excludes = list(excludes or [])
    result = ScanResult()
    paths = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = [d for d in dirnames if not d.startswith(".") and d != "__pycache__"]
        for name in filenames:
            if name.endswith(".py"):
                rel = normalize_path(os.path.relpath(os.path.join(dirpath, name), root))
                if not _excluded(rel, excludes):
                    paths.append(rel)
    for rel in sorted(paths):
        try:
            source = (root / rel).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            result.diagnostics.append(ParseDiagnostic(rel, None, str(exc)))
            continue
        try:
            model = parse_file(rel, source)
        except SourceParseError as exc:
            log.warning("skipping %s", exc)
            result.diagnostics.append(ParseDiagnostic(rel, exc.line, exc.message))
            continue
        if model.recovered_lines:
            result.diagnostics.append(ParseDiagnostic(
                rel, model.recovered_lines[0],
                f"recovered by blanking lines {list(model.recovered_lines)}"))
        result.files.append(model)
        result.sources[rel] = source
    return result


def slice_fragments(file: FileModel | str, source: str, window: int = 20, stride: int = 10) -> list[Fragment]:
    """Fixed-size line windows at offsets 0, stride, 2*stride, ...

    The last window is dropped once a previous window already reached the end
    of the file, so a 30-line file with window 20 / stride 10 yields exactly
    (1-20) and (11-30).
    """
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be >= 1")
    path = file if isinstance(file, str) else file.path
    lines = source.splitlines()
    n = len(lines)
    fragments: list[Fragment] = []
    start = 0
    while start < n:
        end = min(start + window, n)
        fragments.append(Fragment(path, start + 1, end, "\n".join(lines[start:end])))
        if end >= n:
            break
        start += stride
    return fragments
