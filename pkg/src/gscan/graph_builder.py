"""Build the directed homogeneous code graph from a compact AST.

Construction walks six edge families:

1. hierarchy      - parent<->child, both directions, for every AST link
2. control flow   - statement order inside Block/UncheckedBlock/YulBlock
3. ordering       - start->end between sibling children (table below)
4. reference      - identifier<->declaration, both directions
5. branching      - condition/true-branch/false-branch wiring
6. loops & jumps  - loop back-edges plus break/continue/return targets

Families tag edges only while building; :func:`finalize` drops the tags and
collapses duplicate (src, dst) pairs, leaving a plain directed graph whose
node order is AST preorder.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ast_ingest import AstDocument, SourceSpan
from .errors import MissingReference, OrphanJump


class EdgeFamily(enum.Enum):
    AST_HIERARCHY = "AstHierarchy"
    CONTROL_FLOW = "ControlFlow"
    ORDERING = "Ordering"
    REFERENCE = "Reference"
    TRUE_BODY = "TrueBody"
    FALSE_BODY = "FalseBody"


STATEMENT_CONTAINER_KINDS = ("Block", "UncheckedBlock", "YulBlock")

LOOP_KINDS = ("ForStatement", "WhileStatement", "DoWhileStatement", "YulForLoop")

FUNCTION_KINDS = ("FunctionDefinition", "ModifierDefinition")

# kind -> (start attribute candidates, end attribute candidates).  Candidate
# lists absorb compiler naming drift (BinaryOperation children are emitted as
# leftExpression/rightExpression in the compact format).
ORDERING_RULES: dict[str, tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]] = {
    "IndexAccess": ((("baseExpression",), ("indexExpression",)),),
    "IndexRangeAccess": (
        (("baseExpression",), ("startExpression",)),
        (("startExpression",), ("endExpression",)),
    ),
    "FunctionCall": ((("arguments",), ("expression",)),),
    "FunctionTypeName": ((("parameterTypes",), ("returnParameterTypes",)),),
    "Assignment": ((("leftHandSide",), ("rightHandSide",)),),
    "BinaryOperation": (
        (("leftExpression", "leftHandSide"), ("rightExpression", "rightHandSide")),
    ),
    "FunctionDefinition": ((("parameters",), ("returnParameters",)),),
    "YulFunctionDefinition": ((("parameters",), ("returnVariables",)),),
    "Mapping": ((("keyType",), ("valueType",)),),
}

# Loop kind -> attribute names of (init, condition, body, update).
LOOP_CHILD_ATTRS = {
    "ForStatement": ("initializationExpression", "condition", "body", "loopExpression"),
    "YulForLoop": ("pre", "condition", "body", "post"),
    "WhileStatement": (None, "condition", "body", None),
    "DoWhileStatement": (None, "condition", "body", None),
}


@dataclass(frozen=True)
class CodeGraph:
    """Finalized directed homogeneous graph over one contract."""

    node_count: int
    ast_ids: tuple[int, ...]  # graph index -> AST node id, in AST preorder
    spans: tuple[SourceSpan, ...]
    edges: np.ndarray  # (m, 2) int64, deduplicated, numerically sorted

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])


class CodeGraphBuilder:
    """Mutable edge accumulator; edges keep their family until finalize."""

    def __init__(self, doc: AstDocument):
        self.doc = doc
        self.order: tuple[int, ...] = doc.order  # AST preorder
        self.index_of: dict[int, int] = {nid: i for i, nid in enumerate(doc.order)}
        self.tagged_edges: list[tuple[int, int, EdgeFamily]] = []

    def add_edge(self, src_ast_id: int, dst_ast_id: int, family: EdgeFamily) -> None:
        self.tagged_edges.append(
            (self.index_of[src_ast_id], self.index_of[dst_ast_id], family)
        )

    def edges_of_family(self, family: EdgeFamily) -> list[tuple[int, int]]:
        return [(s, d) for s, d, f in self.tagged_edges if f is family]


def build_base_graph(doc: AstDocument) -> CodeGraphBuilder:
    """One graph node per AST node; two hierarchy edges per parent-child link."""
    builder = CodeGraphBuilder(doc)
    for nid in doc.order:
        node = doc.node(nid)
        for _, group in node.children:
            for child in group:
                builder.add_edge(nid, child, EdgeFamily.AST_HIERARCHY)
                builder.add_edge(child, nid, EdgeFamily.AST_HIERARCHY)
    return builder


def add_control_flow_edges(builder: CodeGraphBuilder) -> CodeGraphBuilder:
    """Chain the k statements of every block with k-1 execution-order edges."""
    for nid in builder.order:
        node = builder.doc.node(nid)
        if node.kind not in STATEMENT_CONTAINER_KINDS:
            continue
        statements = node.child_group("statements")
        for a, b in zip(statements, statements[1:]):
            builder.add_edge(a, b, EdgeFamily.CONTROL_FLOW)
    return builder


def add_ordering_edges(builder: CodeGraphBuilder) -> CodeGraphBuilder:
    """Start->end edges between sibling children per ORDERING_RULES."""
    for nid in builder.order:
        node = builder.doc.node(nid)
        rules = ORDERING_RULES.get(node.kind)
        if not rules:
            continue
        for start_attrs, end_attrs in rules:
            starts = _first_group(node, start_attrs)
            ends = _first_group(node, end_attrs)
            for s in starts:
                for e in ends:
                    builder.add_edge(s, e, EdgeFamily.ORDERING)
    return builder


def _first_group(node, attr_candidates: tuple[str, ...]) -> tuple[int, ...]:
    for attr in attr_candidates:
        group = node.child_group(attr)
        if group:
            return group
    return ()


def add_reference_edges(builder: CodeGraphBuilder) -> CodeGraphBuilder:
    """Identifier<->declaration edges, both directions.

    Applies to any node carrying a resolvable ``referencedDeclaration``
    (variables, functions, user-defined types alike).  Negative ids denote
    compiler built-ins and are skipped.
    """
    for nid in builder.order:
        node = builder.doc.node(nid)
        ref = node.attributes.get("referencedDeclaration")
        if not isinstance(ref, int) or ref < 0:
            continue
        if ref not in builder.index_of:
            raise MissingReference(
                f"node {nid} references declaration {ref} with no graph node"
            )
        builder.add_edge(nid, ref, EdgeFamily.REFERENCE)
        builder.add_edge(ref, nid, EdgeFamily.REFERENCE)
    return builder


_BRANCH_BODY_ATTRS = {
    "IfStatement": ("trueBody", "falseBody"),
    "Conditional": ("trueExpression", "falseExpression"),
    "YulIf": ("body", None),
}


def add_branch_edges(builder: CodeGraphBuilder) -> CodeGraphBuilder:
    """Wire conditionals: statement->condition, condition->true/false branch.

    Yul ``if`` has no false branch; Yul ``case`` gets a true-body edge from
    its value to its body (the default case has no value node).
    """
    for nid in builder.order:
        node = builder.doc.node(nid)
        if node.kind in _BRANCH_BODY_ATTRS:
            true_attr, false_attr = _BRANCH_BODY_ATTRS[node.kind]
            condition = node.child_group("condition")
            if not condition:
                continue
            cond = condition[0]
            builder.add_edge(nid, cond, EdgeFamily.CONTROL_FLOW)
            for t in node.child_group(true_attr):
                builder.add_edge(cond, t, EdgeFamily.TRUE_BODY)
            if false_attr:
                for f in node.child_group(false_attr):
                    builder.add_edge(cond, f, EdgeFamily.FALSE_BODY)
        elif node.kind == "YulCase":
            values = node.child_group("value")
            bodies = node.child_group("body")
            if values and bodies:
                builder.add_edge(values[0], bodies[0], EdgeFamily.TRUE_BODY)
    return builder


def add_loop_edges(builder: CodeGraphBuilder) -> CodeGraphBuilder:
    """Loop wiring for for/while/do-while and the Yul for loop.

    Shape for a full for loop: statement->init->condition, condition->body
    (true), condition->statement (false, loop exit), body->update->condition.
    While/do-while have no init/update: the entry edge goes statement->
    condition and the body loops back body->condition.  Missing optional
    children simply skip the edges touching them.
    """
    for nid in builder.order:
        node = builder.doc.node(nid)
        attrs = LOOP_CHILD_ATTRS.get(node.kind)
        if attrs is None:
            continue
        init_attr, cond_attr, body_attr, update_attr = attrs
        init = node.child_group(init_attr)[:1] if init_attr else ()
        cond = node.child_group(cond_attr)[:1]
        body = node.child_group(body_attr)[:1]
        update = node.child_group(update_attr)[:1] if update_attr else ()

        if init:
            builder.add_edge(nid, init[0], EdgeFamily.CONTROL_FLOW)
            if cond:
                builder.add_edge(init[0], cond[0], EdgeFamily.CONTROL_FLOW)
        elif node.kind in ("WhileStatement", "DoWhileStatement") and cond:
            # Entry edge: while-style loops start at their condition node.
            builder.add_edge(nid, cond[0], EdgeFamily.CONTROL_FLOW)
        if cond and body:
            builder.add_edge(cond[0], body[0], EdgeFamily.TRUE_BODY)
        if cond:
            builder.add_edge(cond[0], nid, EdgeFamily.FALSE_BODY)
        if update:
            if body:
                builder.add_edge(body[0], update[0], EdgeFamily.CONTROL_FLOW)
            if cond:
                builder.add_edge(update[0], cond[0], EdgeFamily.CONTROL_FLOW)
        elif node.kind in ("WhileStatement", "DoWhileStatement") and body and cond:
            builder.add_edge(body[0], cond[0], EdgeFamily.CONTROL_FLOW)
    return builder


def _innermost_ancestor(doc: AstDocument, nid: int, kinds: tuple[str, ...]) -> int | None:
    for anc in doc.ancestors(nid):
        if doc.node(anc).kind in kinds:
            return anc
    return None


def _loop_update_target(doc: AstDocument, loop_id: int) -> int:
    """Node a ``continue`` jumps to: the loop update, else the condition,
    else the loop node itself."""
    loop = doc.node(loop_id)
    _, cond_attr, _, update_attr = LOOP_CHILD_ATTRS[loop.kind]
    if update_attr:
        update = loop.child_group(update_attr)
        if update:
            return update[0]
    cond = loop.child_group(cond_attr)
    if cond:
        return cond[0]
    return loop_id


def add_jump_edges(builder: CodeGraphBuilder) -> CodeGraphBuilder:
    """break -> enclosing loop; continue -> its update point;
    return/leave -> enclosing function definition."""
    doc = builder.doc
    for nid in builder.order:
        kind = doc.node(nid).kind
        if kind in ("Break", "YulBreak"):
            loop = _innermost_ancestor(doc, nid, LOOP_KINDS)
            if loop is None:
                raise OrphanJump(f"{kind} node {nid} has no enclosing loop")
            builder.add_edge(nid, loop, EdgeFamily.CONTROL_FLOW)
        elif kind in ("Continue", "YulContinue"):
            loop = _innermost_ancestor(doc, nid, LOOP_KINDS)
            if loop is None:
                raise OrphanJump(f"{kind} node {nid} has no enclosing loop")
            builder.add_edge(nid, _loop_update_target(doc, loop), EdgeFamily.CONTROL_FLOW)
        elif kind == "Return":
            fn = _innermost_ancestor(doc, nid, FUNCTION_KINDS)
            if fn is None:
                raise OrphanJump(f"Return node {nid} has no enclosing function")
            builder.add_edge(nid, fn, EdgeFamily.CONTROL_FLOW)
        elif kind == "YulLeave":
            fn = _innermost_ancestor(
                doc, nid, ("YulFunctionDefinition",) + FUNCTION_KINDS
            )
            if fn is None:
                raise OrphanJump(f"YulLeave node {nid} has no enclosing function")
            builder.add_edge(nid, fn, EdgeFamily.CONTROL_FLOW)
    return builder


def finalize(builder: CodeGraphBuilder) -> CodeGraph:
    """Drop family tags, collapse duplicate (src, dst) pairs, freeze the graph."""
    doc = builder.doc
    unique = sorted({(s, d) for s, d, _ in builder.tagged_edges})
    edges = np.array(unique, dtype=np.int64).reshape(len(unique), 2)
    spans = tuple(doc.node(nid).src for nid in builder.order)
    return CodeGraph(
        node_count=len(builder.order),
        ast_ids=builder.order,
        spans=spans,
        edges=edges,
    )


def build_code_graph(doc: AstDocument) -> CodeGraph:
    """Run every construction stage and finalize."""
    builder = build_base_graph(doc)
    add_control_flow_edges(builder)
    add_ordering_edges(builder)
    add_reference_edges(builder)
    add_branch_edges(builder)
    add_loop_edges(builder)
    add_jump_edges(builder)
    return finalize(builder)


def canonical_serialization(graph: CodeGraph) -> bytes:
    """Deterministic byte form: ``n <count>`` then ``e <src> <dst>`` lines,
    edge lines sorted lexicographically.  This exact stream feeds hashing."""
    lines = [f"n {graph.node_count}"]
    lines.extend(sorted(f"e {s} {d}" for s, d in graph.edges.tolist()))
    return ("\n".join(lines) + "\n").encode("ascii")
