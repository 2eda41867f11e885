"""Build, deduplicate, split and serialize graph datasets.

A record is one contract reduced to its finalized graph, feature matrix and
node labels.  Records are content-addressed: the digest is the sha256 of the
canonical graph serialization, so contracts differing only in identifier
names, whitespace or comments collide (and deduplicate), while any
structural change separates them.

Corpus directory layout::

    manifest.json        ids, digests, subtype, split assignment
    records/<digest>.bin versioned binary record container
    labels/<id>.lines    vulnerable line numbers, one per line
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ast_ingest import SourceSpan, build_line_index, parse_ast, span_to_lines
from .errors import BadRatios, EmptyDataset, MalformedAst
from .graph_builder import CodeGraph, build_code_graph, canonical_serialization
from .label_mapper import annotate_node_labels, line_label_array
from .node_features import DEFAULT_SCHEMA, FEATURE_LENGTH, FeatureSchema, encode_graph
from . import synthesis

RECORD_MAGIC = b"GSCANREC\n"
RECORD_VERSION = 1


def canonical_hash(graph: CodeGraph) -> str:
    """sha256 over the canonical serialization (topology only)."""
    return hashlib.sha256(canonical_serialization(graph)).hexdigest()


@dataclass
class DatasetRecord:
    record_id: str
    graph: CodeGraph
    features: np.ndarray  # (n, 29) float32
    labels: np.ndarray  # (n,) int8
    subtype: str
    digest: str
    line_count: int = 0
    vulnerable_lines: tuple[int, ...] = ()
    split: str = ""

    @property
    def vulnerable(self) -> bool:
        return bool(self.labels.any())


def build_record(
    record_id: str,
    ast_json: bytes,
    source: bytes,
    subtype: str,
    vulnerable_lines: tuple[int, ...] = (),
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> DatasetRecord:
    """Parse, build the graph, encode features, derive node labels."""
    doc = parse_ast(ast_json, source)
    graph = build_code_graph(doc)
    features = encode_graph(graph, doc, schema)
    index = doc.line_index()
    line_labels = line_label_array(index.line_count)
    for line in vulnerable_lines:
        line_labels[line] = 1
    labels = annotate_node_labels(graph.spans, line_labels, index)
    return DatasetRecord(
        record_id=record_id,
        graph=graph,
        features=features,
        labels=labels,
        subtype=subtype,
        digest=canonical_hash(graph),
        line_count=index.line_count,
        vulnerable_lines=tuple(sorted(vulnerable_lines)),
    )


def deduplicate(records: list[DatasetRecord]) -> list[DatasetRecord]:
    """One representative per digest group: the lexicographically smallest id."""
    groups: dict[str, DatasetRecord] = {}
    for record in records:
        kept = groups.get(record.digest)
        if kept is None or record.record_id < kept.record_id:
            groups[record.digest] = record
    return sorted(groups.values(), key=lambda r: r.record_id)


@dataclass(frozen=True)
class SplitManifest:
    train_ids: tuple[str, ...]
    validation_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float]

    def split_of(self, record_id: str) -> str:
        if record_id in self.train_ids:
            return "train"
        if record_id in self.validation_ids:
            return "validation"
        return "test"


DEFAULT_RATIOS = (0.84, 0.08, 0.08)


def split(
    records: list[DatasetRecord],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitManifest:
    """Seeded shuffle, then partition into train/validation/test."""
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise BadRatios(f"need three non-negative ratios, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(f"ratios {ratios} do not sum to 1")
    if not records:
        raise EmptyDataset("cannot split zero records")
    ids = [r.record_id for r in records]
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    n = len(shuffled)
    cut1 = int(n * ratios[0])
    cut2 = cut1 + int(n * ratios[1])
    return SplitManifest(
        train_ids=tuple(shuffled[:cut1]),
        validation_ids=tuple(shuffled[cut1:cut2]),
        test_ids=tuple(shuffled[cut2:]),
        seed=seed,
        ratios=tuple(ratios),
    )


def generate_synthetic_corpus(
    n_clean: int,
    n_vulnerable: int,
    seed: int = 0,
    schema: FeatureSchema = DEFAULT_SCHEMA,
) -> list[DatasetRecord]:
    """Emit labeled records for generated contracts (no compiler needed).

    Vulnerable variants place the balance update after the external call
    with no lock; their call line and subsequent state-write lines carry
    the annotations.
    """
    if n_clean <= 0 or n_vulnerable <= 0:
        raise EmptyDataset("need positive clean and vulnerable counts")
    records = []
    for record_id, contract in synthesis.generate_contracts(
        n_clean, n_vulnerable, seed
    ):
        records.append(build_record(
            record_id,
            contract.ast_json,
            contract.source,
            contract.subtype,
            vulnerable_lines=_spans_to_lines(contract),
            schema=schema,
        ))
    return records


def _spans_to_lines(contract: synthesis.SynthContract) -> tuple[int, ...]:
    index = build_line_index(contract.source)
    lines: set[int] = set()
    for start, length in contract.vulnerable_spans:
        first, last = span_to_lines(SourceSpan(start, length, 0), index)
        lines.update(range(first, last + 1))
    return tuple(sorted(lines))


# --- record container -------------------------------------------------------

def _pack_record(record: DatasetRecord) -> bytes:
    graph_text = canonical_serialization(record.graph)
    ast_ids = np.asarray(record.graph.ast_ids, dtype=np.int64)
    spans = np.asarray(
        [(s.start, s.length, s.file_index) for s in record.graph.spans],
        dtype=np.int64,
    ).reshape(record.graph.node_count, 3)
    features = np.ascontiguousarray(record.features, dtype=np.float32)
    labels = np.ascontiguousarray(record.labels, dtype=np.int8)
    sections = [
        ("graph", graph_text),
        ("ast_ids", ast_ids.tobytes()),
        ("spans", spans.tobytes()),
        ("features", features.tobytes()),
        ("labels", labels.tobytes()),
    ]
    header = {
        "format": "gscan-record",
        "version": RECORD_VERSION,
        "id": record.record_id,
        "subtype": record.subtype,
        "digest": record.digest,
        "node_count": record.graph.node_count,
        "edge_count": record.graph.edge_count,
        "feature_width": int(record.features.shape[1]),
        "line_count": record.line_count,
        "vulnerable_lines": list(record.vulnerable_lines),
        "sections": [],
    }
    offset = 0
    payload_parts = []
    for name, raw in sections:
        header["sections"].append({"name": name, "offset": offset, "nbytes": len(raw)})
        payload_parts.append(raw)
        offset += len(raw)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return (RECORD_MAGIC + len(header_bytes).to_bytes(8, "little")
            + header_bytes + b"".join(payload_parts))


def _unpack_record(blob: bytes) -> DatasetRecord:
    if not blob.startswith(RECORD_MAGIC):
        raise MalformedAst("not a record container")
    cut = len(RECORD_MAGIC)
    header_len = int.from_bytes(blob[cut:cut + 8], "little")
    header = json.loads(blob[cut + 8:cut + 8 + header_len])
    payload = blob[cut + 8 + header_len:]
    sections = {
        s["name"]: payload[s["offset"]:s["offset"] + s["nbytes"]]
        for s in header["sections"]
    }
    n = header["node_count"]
    graph_lines = sections["graph"].decode("ascii").strip().split("\n")
    edges = np.array(
        [tuple(map(int, line.split()[1:])) for line in graph_lines[1:]],
        dtype=np.int64,
    ).reshape(len(graph_lines) - 1, 2)
    ast_ids = tuple(np.frombuffer(sections["ast_ids"], dtype=np.int64).tolist())
    span_arr = np.frombuffer(sections["spans"], dtype=np.int64).reshape(n, 3)
    spans = tuple(SourceSpan(int(a), int(b), int(c)) for a, b, c in span_arr)
    graph = CodeGraph(node_count=n, ast_ids=ast_ids, spans=spans, edges=edges)
    features = np.frombuffer(sections["features"], dtype=np.float32).reshape(
        n, header["feature_width"]
    ).copy()
    labels = np.frombuffer(sections["labels"], dtype=np.int8).copy()
    return DatasetRecord(
        record_id=header["id"],
        graph=graph,
        features=features,
        labels=labels,
        subtype=header["subtype"],
        digest=header["digest"],
        line_count=header["line_count"],
        vulnerable_lines=tuple(header["vulnerable_lines"]),
    )


def write_corpus(
    records: list[DatasetRecord],
    out_dir: str | Path,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> Path:
    """Deduplicate, split and write the corpus layout; returns manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "records").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    kept = deduplicate(records)
    manifest_split = split(kept, ratios, seed)
    entries = []
    for record in kept:
        (out_dir / "records" / f"{record.digest}.bin").write_bytes(
            _pack_record(record)
        )
        label_path = out_dir / "labels" / f"{record.record_id}.lines"
        label_path.write_text(
            "".join(f"{line}\n" for line in record.vulnerable_lines),
            encoding="ascii",
        )
        entries.append({
            "id": record.record_id,
            "digest": record.digest,
            "subtype": record.subtype,
            "split": manifest_split.split_of(record.record_id),
            "nodes": record.graph.node_count,
            "edges": record.graph.edge_count,
            "vulnerable": record.vulnerable,
        })
    manifest = {
        "format": "gscan-corpus",
        "version": RECORD_VERSION,
        "seed": seed,
        "ratios": list(ratios),
        "total_input_records": len(records),
        "records": entries,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest_path


def load_corpus(
    corpus_dir: str | Path, splits: tuple[str, ...] | None = None
) -> tuple[dict, list[DatasetRecord]]:
    """Read manifest + records, optionally restricted to named splits."""
    corpus_dir = Path(corpus_dir)
    manifest = json.loads((corpus_dir / "manifest.json").read_text())
    records = []
    for entry in manifest["records"]:
        if splits is not None and entry["split"] not in splits:
            continue
        blob = (corpus_dir / "records" / f"{entry['digest']}.bin").read_bytes()
        record = _unpack_record(blob)
        record.split = entry["split"]
        records.append(record)
    return manifest, records
