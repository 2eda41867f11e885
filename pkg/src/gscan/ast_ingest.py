"""Ingest compiler-emitted compact AST JSON and map byte spans to lines.

The compact AST (``solc --ast-compact-json`` / standard-JSON ``ast`` output,
available from compiler 0.4.12 on) is a tree of objects carrying ``nodeType``,
``src`` and arbitrary further attributes.  Child nodes appear either as a
nested object or as a list of objects under an attribute name; this module
discovers them generically so it keeps working across compiler versions.

Line arithmetic deliberately follows the prefix-line-count convention used
throughout the rest of the pipeline: the line of byte offset ``b`` is the
number of lines the decoded prefix ``source[:b]`` splits into.  A span that
starts at byte 0 therefore maps to "line 0" (a sentinel before the first
line), and a span ending at EOF maps to ``line_count``.  Per-line label
arrays must be sized ``line_count + 1`` to cover both ends.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from bisect import bisect_right

from .errors import (
    InvalidEncoding,
    MalformedAst,
    MalformedSpan,
    MissingReference,
    SpanOutOfBounds,
    UnsupportedVersion,
)

MIN_COMPILER_VERSION = (0, 4, 12)

# JSON keys that never denote child nodes even though their values are
# objects/lists (type metadata, external-reference tables, ...).
_NON_CHILD_KEYS = frozenset({
    "typeDescriptions",
    "commonType",
    "externalReferences",
    "nativeSrc",
})

_VERSION_RE = re.compile(r"\d+\.\d+\.\d+")


@dataclass(frozen=True)
class SourceSpan:
    """Byte span ``start:length:fileIndex`` into the merged source file."""

    start: int
    length: int
    file_index: int

    @property
    def end(self) -> int:
        return self.start + self.length


def parse_src(src_string: str) -> SourceSpan:
    """Decompose a ``"start:length:fileIndex"`` triple, no normalization."""
    parts = src_string.split(":")
    if len(parts) != 3:
        raise MalformedSpan(f"expected 3 colon-separated fields, got {src_string!r}")
    try:
        start, length, file_index = (int(p) for p in parts)
    except ValueError:
        raise MalformedSpan(f"non-numeric field in {src_string!r}") from None
    if start < 0 or length < 0:
        raise MalformedSpan(f"negative offset in {src_string!r}")
    return SourceSpan(start, length, file_index)


def format_src(span: SourceSpan) -> str:
    """Inverse of :func:`parse_src`."""
    return f"{span.start}:{span.length}:{span.file_index}"


@dataclass(frozen=True)
class LineIndex:
    """Byte-offset line table for one UTF-8 source file.

    ``line_starts[i]``/``line_ends[i]`` delimit line ``i+1`` including its
    terminator, using ``str.splitlines`` boundaries of the decoded text.
    """

    line_starts: tuple[int, ...]
    line_ends: tuple[int, ...]
    line_count: int
    byte_length: int

    def prefix_line_count(self, byte_offset: int) -> int:
        """Number of lines the decoded prefix ``[0, byte_offset)`` splits into."""
        if byte_offset < 0 or byte_offset > self.byte_length:
            raise SpanOutOfBounds(
                f"offset {byte_offset} outside source of {self.byte_length} bytes"
            )
        if byte_offset == 0:
            return 0
        complete = bisect_right(self.line_ends, byte_offset)
        if complete > 0 and self.line_ends[complete - 1] == byte_offset:
            return complete
        return complete + 1


def build_line_index(source_bytes: bytes) -> LineIndex:
    """Build the line table; raises :class:`InvalidEncoding` on bad UTF-8."""
    try:
        text = source_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(str(exc)) from None
    starts: list[int] = []
    ends: list[int] = []
    offset = 0
    for line in text.splitlines(keepends=True):
        starts.append(offset)
        offset += len(line.encode("utf-8"))
        ends.append(offset)
    return LineIndex(tuple(starts), tuple(ends), len(starts), len(source_bytes))


def span_to_lines(span: SourceSpan, index: LineIndex) -> tuple[int, int]:
    """Inclusive line range covered by ``span`` (prefix-line-count convention).

    The start line is the line count of the decoded prefix ``[0, start)``,
    the end line that of ``[0, start+length)``.  A zero-length span yields a
    single line; a span starting at byte 0 starts at line 0.
    """
    if span.start < 0 or span.end > index.byte_length:
        raise SpanOutOfBounds(f"span {span} outside {index.byte_length}-byte source")
    return index.prefix_line_count(span.start), index.prefix_line_count(span.end)


@dataclass(frozen=True)
class AstNode:
    """One syntactic construct: kind, scalar attributes, span, child groups."""

    id: int
    kind: str
    src: SourceSpan
    attributes: dict = field(default_factory=dict)
    # Ordered (attribute name, child ids) groups, exactly as emitted.
    children: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def child_ids(self) -> tuple[int, ...]:
        return tuple(cid for _, group in self.children for cid in group)

    def child_group(self, name: str) -> tuple[int, ...]:
        for attr, group in self.children:
            if attr == name:
                return group
        return ()


@dataclass
class AstDocument:
    """Validated compact-AST document over one (possibly merged) source file."""

    nodes: dict[int, AstNode]
    order: tuple[int, ...]  # node ids in document (pre)order
    root: int
    source_bytes: bytes
    compiler_version: str | None
    parents: dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.order)

    def node(self, node_id: int) -> AstNode:
        return self.nodes[node_id]

    def parent(self, node_id: int) -> int | None:
        return self.parents.get(node_id)

    def line_index(self) -> LineIndex:
        return build_line_index(self.source_bytes)

    def ancestors(self, node_id: int):
        """Yield ancestor ids from the node's parent up to the root."""
        cur = self.parents.get(node_id)
        while cur is not None:
            yield cur
            cur = self.parents.get(cur)


def _is_node_obj(value) -> bool:
    return isinstance(value, dict) and "nodeType" in value


def _parse_version(text: str) -> tuple[int, int, int]:
    m = _VERSION_RE.search(text)
    if not m:
        raise MalformedAst(f"cannot parse compiler version from {text!r}")
    a, b, c = m.group(0).split(".")
    return int(a), int(b), int(c)


def _pragma_min_version(root_obj: dict) -> str | None:
    """Lowest x.y.z mentioned in any solidity pragma, or None."""
    versions: list[tuple[int, int, int]] = []

    def walk(obj):
        if isinstance(obj, dict):
            if obj.get("nodeType") == "PragmaDirective":
                literals = obj.get("literals") or []
                if literals and literals[0] == "solidity":
                    joined = "".join(literals[1:])
                    for m in re.finditer(r"(\d+)\.(\d+)(?:\.(\d+))?", joined):
                        versions.append(
                            (int(m.group(1)), int(m.group(2)), int(m.group(3) or 0))
                        )
            for v in obj.values():
                walk(v)
        elif isinstance(obj, list):
            for v in obj:
                walk(v)

    walk(root_obj)
    if not versions:
        return None
    return ".".join(str(p) for p in min(versions))


def parse_ast(
    json_text: bytes | str,
    source_bytes: bytes | None = None,
    compiler_version: str | None = None,
) -> AstDocument:
    """Parse a compact-AST JSON document into a validated :class:`AstDocument`.

    ``source_bytes`` is the raw merged source file the AST was produced from;
    it is required for any line mapping but optional for pure graph work.
    ``compiler_version`` overrides version inference from the pragma.

    Raises :class:`MalformedAst` on structural violations,
    :class:`UnsupportedVersion` for pre-0.4.12 (legacy-format) documents and
    :class:`MissingReference` when a referencedDeclaration id is absent.
    """
    if isinstance(json_text, (bytes, bytearray)):
        json_text = json_text.decode("utf-8")
    try:
        root_obj = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise MalformedAst(f"invalid JSON: {exc}") from None
    if not isinstance(root_obj, dict):
        raise MalformedAst("AST root must be a JSON object")
    # Accept solc standard-json wrapping: {"sources": {"x.sol": {"ast": ...}}}
    if "nodeType" not in root_obj and "sources" in root_obj:
        sources = root_obj["sources"]
        if isinstance(sources, dict) and len(sources) == 1:
            (entry,) = sources.values()
            if isinstance(entry, dict) and _is_node_obj(entry.get("ast")):
                root_obj = entry["ast"]
    if "nodeType" not in root_obj:
        if "name" in root_obj and "children" in root_obj:
            # Legacy AST layout predates the compact format.
            raise UnsupportedVersion(
                "legacy AST format (compiler below 0.4.12) is not supported"
            )
        raise MalformedAst("AST root has no nodeType")

    version = compiler_version or _pragma_min_version(root_obj)
    if version is not None and _parse_version(version) < MIN_COMPILER_VERSION:
        raise UnsupportedVersion(
            f"compiler version {version} is below the 0.4.12 minimum"
        )

    nodes: dict[int, AstNode] = {}
    order: list[int] = []
    parents: dict[int, int] = {}
    referenced: list[int] = []
    # Compiler-assigned ids are non-negative; nodes without an id (the Yul
    # subtree) get fresh synthetic ids above every explicit one.
    explicit_ids: set[int] = set()

    def collect_ids(obj):
        if isinstance(obj, dict):
            if "nodeType" in obj and isinstance(obj.get("id"), int):
                explicit_ids.add(obj["id"])
            for v in obj.values():
                collect_ids(v)
        elif isinstance(obj, list):
            for v in obj:
                collect_ids(v)

    collect_ids(root_obj)
    next_synthetic = max(explicit_ids, default=-1) + 1

    def walk(obj: dict, parent_id: int | None) -> int:
        nonlocal next_synthetic
        kind = obj.get("nodeType")
        if not isinstance(kind, str) or not kind:
            raise MalformedAst("node without a nodeType string")
        node_id = obj.get("id")
        if node_id is None:
            node_id = next_synthetic
            next_synthetic += 1
        elif not isinstance(node_id, int):
            raise MalformedAst(f"non-integer node id {node_id!r}")
        if node_id in nodes:
            raise MalformedAst(f"duplicate node id {node_id}")
        src_str = obj.get("src")
        if not isinstance(src_str, str):
            raise MalformedAst(f"node {node_id} ({kind}) has no src")
        span = parse_src(src_str)
        if source_bytes is not None and span.end > len(source_bytes):
            raise MalformedAst(
                f"node {node_id} span {src_str} exceeds {len(source_bytes)}-byte source"
            )

        attributes: dict = {}
        child_groups: list[tuple[str, tuple[int, ...]]] = []
        order.append(node_id)
        if parent_id is not None:
            parents[node_id] = parent_id
        # Reserve the slot so children see a stable preorder position.
        nodes[node_id] = None  # type: ignore[assignment]

        for key, value in obj.items():
            if key in ("id", "nodeType", "src") or key in _NON_CHILD_KEYS:
                continue
            if _is_node_obj(value):
                child_groups.append((key, (walk(value, node_id),)))
            elif isinstance(value, list) and any(_is_node_obj(v) for v in value):
                ids = tuple(walk(v, node_id) for v in value if _is_node_obj(v))
                child_groups.append((key, ids))
            elif isinstance(value, (str, int, float, bool)) or value is None:
                attributes[key] = value
                if key == "referencedDeclaration" and isinstance(value, int):
                    referenced.append(value)
            # Remaining dict/list values are metadata, not children.

        nodes[node_id] = AstNode(
            id=node_id,
            kind=kind,
            src=span,
            attributes=attributes,
            children=tuple(child_groups),
        )
        return node_id

    root_id = walk(root_obj, None)

    # Built-in declarations carry negative ids and live outside the document.
    for ref in referenced:
        if ref >= 0 and ref not in nodes:
            raise MissingReference(f"referencedDeclaration {ref} has no node")

    return AstDocument(
        nodes=nodes,
        order=tuple(order),
        root=root_id,
        source_bytes=source_bytes if source_bytes is not None else b"",
        compiler_version=version,
        parents=parents,
    )
