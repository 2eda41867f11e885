"""Tiny builders for hand-crafted compact-AST JSON used across tests."""

from __future__ import annotations

import json
import itertools


class NodeFactory:
    """Builds compact-AST node dicts with auto-incrementing ids."""

    def __init__(self, start: int = 1):
        self._ids = itertools.count(start)

    def node(self, kind: str, src: str = "0:0:0", **fields) -> dict:
        return {"id": next(self._ids), "nodeType": kind, "src": src, **fields}

    def source_unit(self, *children, src: str = "0:0:0") -> dict:
        return self.node("SourceUnit", src=src, nodes=list(children))


def doc_bytes(root: dict) -> bytes:
    return json.dumps(root).encode()


def wrap_contract(factory: NodeFactory, *members, src: str = "0:0:0") -> dict:
    contract = factory.node("ContractDefinition", src=src, name="T",
                            contractKind="contract", nodes=list(members))
    return factory.source_unit(contract, src=src)


def graph_index(doc, graph):
    """ast node id -> graph node index."""
    return {ast_id: i for i, ast_id in enumerate(graph.ast_ids)}


def edge_set(graph) -> set[tuple[int, int]]:
    return {tuple(e) for e in graph.edges.tolist()}


def builder_family_edges(builder, family) -> set[tuple[int, int]]:
    return set(builder.edges_of_family(family))
