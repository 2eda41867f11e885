"""Translate line-level annotations to node labels and back.

Line indices follow the prefix-line-count convention of
:func:`gscan.ast_ingest.span_to_lines`: valid indices run from 0 (sentinel
reached only by spans starting at byte 0) through ``line_count`` inclusive,
so per-line arrays are sized ``line_count + 1``.

Projection defaults to union semantics: a line is vulnerable iff ANY node
covering it is.  The alternative ``mode="overwrite"`` applies node verdicts
in node order, letting a later clean node clear lines a vulnerable one set;
it exists to reproduce that exact (order-sensitive) behaviour where needed.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .ast_ingest import LineIndex, SourceSpan, build_line_index, span_to_lines
from .errors import SpanOutOfBounds


def _as_line_index(source: bytes | LineIndex) -> LineIndex:
    if isinstance(source, LineIndex):
        return source
    return build_line_index(source)


def line_label_array(line_count: int) -> np.ndarray:
    """All-clean per-line label array (index 0 is the sentinel slot)."""
    return np.zeros(line_count + 1, dtype=np.int8)


def annotate_node_labels(
    spans: Sequence[SourceSpan],
    line_labels: Sequence[int] | np.ndarray,
    source: bytes | LineIndex,
) -> np.ndarray:
    """Node i is vulnerable iff any line its span covers is annotated.

    A contract with no annotated lines short-circuits to all-clean nodes.
    """
    line_labels = np.asarray(line_labels, dtype=np.int8)
    out = np.zeros(len(spans), dtype=np.int8)
    if not line_labels.any():
        return out
    index = _as_line_index(source)
    for i, span in enumerate(spans):
        start, end = span_to_lines(span, index)
        if end >= len(line_labels):
            raise SpanOutOfBounds(
                f"span line range [{start}, {end}] exceeds "
                f"{len(line_labels)} line labels"
            )
        if line_labels[start:end + 1].any():
            out[i] = 1
    return out


def project_node_predictions(
    spans: Sequence[SourceSpan],
    node_labels: Sequence[int] | np.ndarray,
    source: bytes | LineIndex,
    line_count: int | None = None,
    mode: str = "union",
) -> np.ndarray:
    """Per-line verdicts from per-node verdicts.

    Returns an array of length ``line_count + 1`` (sentinel index 0).  With
    all-clean node labels the result short-circuits to all-clean lines.
    """
    if mode not in ("union", "overwrite"):
        raise ValueError(f"unknown projection mode {mode!r}")
    node_labels = np.asarray(node_labels, dtype=np.int8)
    if len(node_labels) != len(spans):
        raise SpanOutOfBounds(
            f"{len(node_labels)} node labels for {len(spans)} spans"
        )
    index = _as_line_index(source)
    if line_count is None:
        line_count = index.line_count
    out = line_label_array(line_count)
    if not node_labels.any():
        return out
    for i, span in enumerate(spans):
        start, end = span_to_lines(span, index)
        if end > line_count:
            raise SpanOutOfBounds(
                f"span line range [{start}, {end}] exceeds line count {line_count}"
            )
        if mode == "union":
            if node_labels[i]:
                out[start:end + 1] = 1
        else:
            out[start:end + 1] = node_labels[i]
    return out


def vulnerable_lines(line_labels: np.ndarray) -> list[int]:
    """Flagged line numbers, sentinel index 0 dropped."""
    return [i for i in np.flatnonzero(line_labels).tolist() if i > 0]
