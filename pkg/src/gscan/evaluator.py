"""Confusion matrices and classification metrics (node and graph level)."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyEvaluation, LengthMismatch


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(
            self.tp + other.tp, self.tn + other.tn,
            self.fp + other.fp, self.fn + other.fn,
        )


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    # Names of ratios whose denominator was zero (reported as 0.0).
    degenerate: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": list(self.degenerate),
        }


def confusion(pred, truth) -> Confusion:
    """Counts with class 1 = vulnerable."""
    pred = np.asarray(pred).astype(bool)
    truth = np.asarray(truth).astype(bool)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"pred {pred.shape} vs truth {truth.shape}")
    return Confusion(
        tp=int((pred & truth).sum()),
        tn=int((~pred & ~truth).sum()),
        fp=int((pred & ~truth).sum()),
        fn=int((~pred & truth).sum()),
    )


def metrics(c: Confusion) -> Metrics:
    """Accuracy, precision, recall, F1; zero denominators yield 0 + a flag."""
    if c.total == 0:
        raise EmptyEvaluation("no items to evaluate")
    degenerate: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            degenerate.append(name)
            return 0.0
        return num / den

    accuracy = (c.tp + c.tn) / c.total
    precision = ratio(c.tp, c.tp + c.fp, "precision")
    recall = ratio(c.tp, c.tp + c.fn, "recall")
    if precision + recall == 0.0:
        degenerate.append("f1")
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return Metrics(accuracy, precision, recall, f1, tuple(degenerate))


def graph_level_labels(node_labels_per_graph) -> np.ndarray:
    """Graph verdict = OR over its node verdicts (empty graph -> clean)."""
    return np.array(
        [1 if np.asarray(labels).any() else 0 for labels in node_labels_per_graph],
        dtype=np.int8,
    )


@dataclass(frozen=True)
class ReportRow:
    subtype: str
    split: str
    level: str  # "node" | "graph"
    values: Metrics
    items: int


class MetricsReport:
    """Rows of (subtype, split, level) metrics with text/JSON rendering."""

    def __init__(self, rows: list[ReportRow]):
        self.rows = rows

    def to_json(self) -> str:
        return json.dumps(
            [
                {
                    "subtype": r.subtype,
                    "split": r.split,
                    "level": r.level,
                    "items": r.items,
                    **r.values.as_dict(),
                }
                for r in self.rows
            ],
            indent=2,
        )

    def to_text(self) -> str:
        header = f"{'subtype':<10} {'split':<12} {'level':<6} {'items':>7} " \
                 f"{'accuracy':>9} {'precision':>10} {'recall':>8} {'f1':>8}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            v = r.values
            flag = " *" if v.degenerate else ""
            lines.append(
                f"{r.subtype:<10} {r.split:<12} {r.level:<6} {r.items:>7} "
                f"{v.accuracy:>9.4f} {v.precision:>10.4f} {v.recall:>8.4f} "
                f"{v.f1:>8.4f}{flag}"
            )
        if any(r.values.degenerate for r in self.rows):
            lines.append("* zero-denominator ratio reported as 0")
        return "\n".join(lines)
