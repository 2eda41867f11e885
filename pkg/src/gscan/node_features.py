"""Encode graph nodes as 29-dimensional integer-code feature vectors.

Layout: dims 0-19 hold merged node-kind groups (one group per dimension,
small integer codes inside the group, 0 = not in group), dims 20-27 hold
attribute codes (visibility, state mutability, storage location, flags,
operator class, literal kind) and dim 28 flags fund-transfer member access
(``transfer`` -> 1, ``send`` -> -1).  Codes are raw integers rather than
one-hot columns to keep the input narrow.

The schema is versioned and travels inside every checkpoint as a text
manifest so a model can only be applied to features it was trained on.
Code 0 always means "not applicable".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .ast_ingest import AstDocument, AstNode
from .errors import UnknownKind
from .graph_builder import CodeGraph

FEATURE_LENGTH = 29


@dataclass(frozen=True)
class KindGroup:
    dim: int
    name: str
    codes: dict  # node kind -> small positive integer


@dataclass(frozen=True)
class AttributeDim:
    dim: int
    name: str
    attribute: str
    codes: dict  # attribute value -> integer code
    unknown_code: int = 0  # code for a present-but-unmapped value
    kinds: tuple[str, ...] | None = None  # restrict to these node kinds


@dataclass(frozen=True)
class FeatureSchema:
    version: str
    kind_groups: tuple[KindGroup, ...]
    attribute_dims: tuple[AttributeDim, ...]
    # Kinds that legitimately encode as an all-defaults row.
    neutral_kinds: tuple[str, ...] = ()
    strict: bool = False

    def known_kinds(self) -> frozenset:
        kinds = set(self.neutral_kinds)
        for group in self.kind_groups:
            kinds.update(group.codes)
        return frozenset(kinds)

    def to_manifest(self) -> str:
        """Canonical text manifest (stable across runs, shipped in checkpoints)."""
        payload = {
            "format": "gscan-feature-schema",
            "version": self.version,
            "length": FEATURE_LENGTH,
            "kind_groups": [
                {"dim": g.dim, "name": g.name, "codes": dict(sorted(g.codes.items()))}
                for g in self.kind_groups
            ],
            "attribute_dims": [
                {
                    "dim": a.dim,
                    "name": a.name,
                    "attribute": a.attribute,
                    "values": sorted(a.codes.items(), key=lambda kv: str(kv[0])),
                    "unknown": a.unknown_code,
                    "kinds": list(a.kinds) if a.kinds else None,
                }
                for a in self.attribute_dims
            ],
            "neutral_kinds": sorted(self.neutral_kinds),
            "strict": self.strict,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_manifest(text: str) -> "FeatureSchema":
        payload = json.loads(text)
        if payload.get("format") != "gscan-feature-schema":
            raise ValueError("not a feature-schema manifest")
        groups = tuple(
            KindGroup(g["dim"], g["name"], dict(g["codes"]))
            for g in payload["kind_groups"]
        )
        attrs = tuple(
            AttributeDim(
                a["dim"],
                a["name"],
                a["attribute"],
                {k: v for k, v in a["values"]},
                a["unknown"],
                tuple(a["kinds"]) if a["kinds"] else None,
            )
            for a in payload["attribute_dims"]
        )
        return FeatureSchema(
            version=payload["version"],
            kind_groups=groups,
            attribute_dims=attrs,
            neutral_kinds=tuple(payload.get("neutral_kinds", ())),
            strict=bool(payload.get("strict", False)),
        )


def _operator_codes() -> dict:
    classes = {
        1: ("+", "-", "*", "/", "%", "**"),
        2: ("==", "!=", "<", ">", "<=", ">="),
        3: ("&&", "||", "!"),
        4: ("&", "|", "^", "~", "<<", ">>"),
        5: ("+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="),
        6: ("=",),
        7: ("++", "--"),
        8: ("delete",),
    }
    return {op: code for code, ops in classes.items() for op in ops}


DEFAULT_SCHEMA = FeatureSchema(
    version="1",
    kind_groups=(
        KindGroup(0, "loop", {
            "DoWhileStatement": 1, "WhileStatement": 2,
            "ForStatement": 3, "YulForLoop": 4,
        }),
        KindGroup(1, "assignment", {"Assignment": 1, "YulAssignment": 2}),
        KindGroup(2, "operation", {"BinaryOperation": 1, "UnaryOperation": 2}),
        KindGroup(3, "call", {
            "FunctionCall": 1, "YulFunctionCall": 2, "FunctionCallOptions": 3,
        }),
        KindGroup(4, "callable-definition", {
            "FunctionDefinition": 1, "YulFunctionDefinition": 2,
            "ModifierDefinition": 3, "EventDefinition": 4, "ErrorDefinition": 5,
        }),
        KindGroup(5, "variable-declaration", {
            "VariableDeclaration": 1, "VariableDeclarationStatement": 2,
            "YulVariableDeclaration": 3, "YulTypedName": 4,
        }),
        KindGroup(6, "mapping-or-array", {"Mapping": 1, "ArrayTypeName": 2}),
        KindGroup(7, "index-access", {"IndexAccess": 1, "IndexRangeAccess": 2}),
        KindGroup(8, "literal", {"Literal": 1, "YulLiteral": 2}),
        KindGroup(9, "identifier", {
            "Identifier": 1, "YulIdentifier": 2, "IdentifierPath": 3,
            "ElementaryTypeNameExpression": 4,
        }),
        KindGroup(10, "member-access", {"MemberAccess": 1}),
        KindGroup(11, "block", {
            "Block": 1, "UncheckedBlock": 2, "YulBlock": 3, "InlineAssembly": 4,
        }),
        KindGroup(12, "branch", {
            "IfStatement": 1, "Conditional": 2, "YulIf": 3,
            "YulSwitch": 4, "YulCase": 5,
        }),
        KindGroup(13, "jump", {
            "Return": 1, "Break": 2, "Continue": 3,
            "YulBreak": 4, "YulContinue": 5, "YulLeave": 6, "Throw": 7,
        }),
        KindGroup(14, "source-structure", {
            "SourceUnit": 1, "PragmaDirective": 2, "ImportDirective": 3,
            "ContractDefinition": 4, "InheritanceSpecifier": 5,
            "UsingForDirective": 6, "StructuredDocumentation": 7,
            "OverrideSpecifier": 8,
        }),
        KindGroup(15, "type-name", {
            "ElementaryTypeName": 1, "UserDefinedTypeName": 2,
            "FunctionTypeName": 3, "UserDefinedValueTypeDefinition": 4,
        }),
        KindGroup(16, "user-type", {
            "StructDefinition": 1, "EnumDefinition": 2, "EnumValue": 3,
        }),
        KindGroup(17, "invocation-plumbing", {
            "ParameterList": 1, "ModifierInvocation": 2,
            "TupleExpression": 3, "NewExpression": 4,
        }),
        KindGroup(18, "plain-statement", {
            "ExpressionStatement": 1, "PlaceholderStatement": 2,
            "EmitStatement": 3, "RevertStatement": 4, "YulExpressionStatement": 5,
        }),
        KindGroup(19, "try-catch", {"TryStatement": 1, "TryCatchClause": 2}),
    ),
    attribute_dims=(
        AttributeDim(20, "visibility", "visibility", {
            "internal": 1, "external": 2, "private": 3, "public": 4,
        }, unknown_code=5),
        AttributeDim(21, "state-mutability", "stateMutability", {
            "pure": 1, "view": 2, "nonpayable": 3, "payable": 4,
        }, unknown_code=5),
        AttributeDim(22, "storage-location", "storageLocation", {
            "default": 1, "storage": 2, "memory": 3, "calldata": 4,
        }, unknown_code=5),
        AttributeDim(23, "constant-flag", "constant", {True: 1, False: 2},
                     unknown_code=3),
        AttributeDim(24, "payable-flag", "payable", {True: 1, False: 2},
                     unknown_code=3),
        AttributeDim(25, "mutability", "mutability", {
            "mutable": 1, "immutable": 2, "constant": 3,
        }, unknown_code=4),
        AttributeDim(26, "operator-class", "operator", _operator_codes(),
                     unknown_code=9),
        AttributeDim(27, "literal-kind", "kind", {
            "number": 1, "string": 2, "bool": 3,
            "hexString": 4, "unicodeString": 5,
        }, unknown_code=6, kinds=("Literal", "YulLiteral")),
        AttributeDim(28, "fund-transfer-member", "memberName", {
            "transfer": 1, "send": -1,
        }, unknown_code=0, kinds=("MemberAccess",)),
    ),
)


def encode_node(node: AstNode, schema: FeatureSchema = DEFAULT_SCHEMA) -> np.ndarray:
    """Encode one node; pure function of (kind, attributes)."""
    if schema.strict and node.kind not in schema.known_kinds():
        raise UnknownKind(f"no schema entry for node kind {node.kind!r}")
    vec = np.zeros(FEATURE_LENGTH, dtype=np.float32)
    for group in schema.kind_groups:
        code = group.codes.get(node.kind)
        if code:
            vec[group.dim] = code
    for adim in schema.attribute_dims:
        if adim.kinds is not None and node.kind not in adim.kinds:
            continue
        if adim.attribute not in node.attributes:
            continue
        value = node.attributes[adim.attribute]
        if value is None:
            continue
        code = adim.codes.get(value, adim.unknown_code)
        vec[adim.dim] = code
    return vec


def encode_graph(
    graph: CodeGraph,
    doc: AstDocument,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> np.ndarray:
    """Feature matrix with row i encoding graph node i (AST preorder)."""
    matrix = np.zeros((graph.node_count, FEATURE_LENGTH), dtype=np.float32)
    for i, ast_id in enumerate(graph.ast_ids):
        matrix[i] = encode_node(doc.node(ast_id), schema)
    return matrix
