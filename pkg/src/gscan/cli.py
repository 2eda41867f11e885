"""Command-line surface: build datasets, train, evaluate, scan contracts.

Exit codes are a stable contract: 0 = clean scan / success, 2 = vulnerable
contract found, 1 = any error (including usage errors).
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ast_ingest import build_line_index, parse_ast, span_to_lines
from .checkpoint import (
    checkpoint_digest,
    load_checkpoint,
    require_schema,
    save_checkpoint,
)
from .dataset_pipeline import (
    DEFAULT_RATIOS,
    build_record,
    generate_synthetic_corpus,
    load_corpus,
    write_corpus,
)
from .errors import CompilerUnavailable, EmptyEvaluation, GscanError
from .evaluator import (
    Confusion,
    MetricsReport,
    ReportRow,
    confusion,
    graph_level_labels,
    metrics,
)
from .gcn_core import model_forward, normalize_adjacency
from .graph_builder import build_code_graph
from .label_mapper import project_node_predictions, vulnerable_lines
from .node_features import DEFAULT_SCHEMA, encode_graph
from .trainer import BatchGraph, Hyperparameters, TrainExample, train

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_VULNERABLE = 2

SUBTYPE_MEMBERS = ("call", "send", "transfer")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; force the error exit code to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# --- solc invocation ---------------------------------------------------------

def compile_source(sol_path: Path) -> bytes:
    """Produce compact-AST JSON for one source file via an external compiler.

    The binary comes from $GSCAN_SOLC or `solc` on PATH; raises
    :class:`CompilerUnavailable` when neither exists or compilation fails.
    """
    binary = os.environ.get("GSCAN_SOLC") or shutil.which("solc")
    if not binary:
        raise CompilerUnavailable(
            "no Solidity compiler found (set GSCAN_SOLC or install solc); "
            "pre-generated AST JSON can be scanned with --ast"
        )
    request = {
        "language": "Solidity",
        "sources": {sol_path.name: {"content": sol_path.read_text()}},
        "settings": {"outputSelection": {"*": {"": ["ast"]}}},
    }
    try:
        proc = subprocess.run(
            [binary, "--standard-json"],
            input=json.dumps(request).encode(),
            capture_output=True,
            timeout=300,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise CompilerUnavailable(f"failed to run {binary}: {exc}") from None
    try:
        output = json.loads(proc.stdout)
        ast = output["sources"][sol_path.name]["ast"]
    except (json.JSONDecodeError, KeyError):
        detail = proc.stderr.decode(errors="replace")[:500]
        raise CompilerUnavailable(
            f"compiler produced no AST for {sol_path}: {detail}"
        ) from None
    return json.dumps(ast).encode()


# --- scan --------------------------------------------------------------------

def _subtype_hits(doc, index) -> dict[str, list[int]]:
    hits: dict[str, list[int]] = {}
    for nid in doc.order:
        node = doc.node(nid)
        if node.kind == "MemberAccess":
            member = node.attributes.get("memberName")
            if member in SUBTYPE_MEMBERS:
                line = span_to_lines(node.src, index)[1]
                hits.setdefault(member, []).append(line)
    return {k: sorted(set(v)) for k, v in sorted(hits.items())}


def cmd_scan(args) -> int:
    if bool(args.ast) == bool(args.sol):
        raise GscanError("scan needs exactly one of --ast or --sol")
    params, schema = load_checkpoint(args.checkpoint)
    require_schema(schema, DEFAULT_SCHEMA)

    t_start = time.perf_counter()
    if args.sol:
        sol_path = Path(args.sol)
        source = sol_path.read_bytes()
        ast_json = compile_source(sol_path)
        target = sol_path
    else:
        ast_path = Path(args.ast)
        target = ast_path
        if args.source:
            source = Path(args.source).read_bytes()
        else:
            sibling = ast_path.with_suffix(".sol")
            if not sibling.exists():
                raise GscanError(
                    f"no source for {ast_path}; pass --source or place "
                    f"{sibling.name} alongside it"
                )
            source = sibling.read_bytes()
        ast_json = ast_path.read_bytes()
    doc = parse_ast(ast_json, source)
    t_ast = time.perf_counter()

    graph = build_code_graph(doc)
    features = encode_graph(graph, doc, schema)
    adjacency = normalize_adjacency(graph)
    t_graph = time.perf_counter()

    prediction = model_forward(features, adjacency, params)
    index = build_line_index(source)
    line_verdicts = project_node_predictions(
        graph.spans, prediction.labels, index, mode=args.line_mode
    )
    flagged = vulnerable_lines(line_verdicts)
    t_end = time.perf_counter()

    verdict_vulnerable = bool(prediction.labels.any())
    report = {
        "contract": str(target),
        "graph_vulnerable": verdict_vulnerable,
        "flagged_lines": flagged,
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "vulnerable_nodes": int(prediction.labels.sum()),
        "subtype_hits": _subtype_hits(doc, index),
        "timing_ms": {
            "ast_ms": (t_ast - t_start) * 1e3,
            "graph_ms": (t_graph - t_ast) * 1e3,
            "predict_ms": (t_end - t_graph) * 1e3,
            "total_ms": (t_end - t_start) * 1e3,
        },
    }
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        _print_scan_text(report, source)
    return EXIT_VULNERABLE if verdict_vulnerable else EXIT_CLEAN


def _print_scan_text(report: dict, source: bytes) -> None:
    lines = source.decode("utf-8", errors="replace").splitlines()
    verdict = "VULNERABLE" if report["graph_vulnerable"] else "CLEAN"
    print(f"contract: {report['contract']}")
    print(f"verdict:  {verdict}  "
          f"({report['vulnerable_nodes']}/{report['nodes']} nodes flagged)")
    if report["flagged_lines"]:
        print(f"flagged lines ({len(report['flagged_lines'])}):")
        for line in report["flagged_lines"]:
            text = lines[line - 1].strip() if 0 < line <= len(lines) else ""
            print(f"  {line:>5}: {text}")
    if report["subtype_hits"]:
        hits = ", ".join(
            f"{sub}@{','.join(map(str, where))}"
            for sub, where in report["subtype_hits"].items()
        )
        print(f"transfer subtypes: {hits}")
    t = report["timing_ms"]
    print(f"timing: ast {t['ast_ms']:.1f} ms | graph {t['graph_ms']:.1f} ms | "
          f"predict {t['predict_ms']:.1f} ms | total {t['total_ms']:.1f} ms")


# --- train -------------------------------------------------------------------

def _examples_from_records(records) -> list[TrainExample]:
    return [
        TrainExample.from_graph(
            r.record_id, r.graph, r.features, r.labels, subtype=r.subtype
        )
        for r in records
    ]


def cmd_train(args) -> int:
    if args.profile == "paper":
        hyper = Hyperparameters(seed=args.seed)
    else:
        hyper = Hyperparameters(epochs=200, seed=args.seed)
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if args.lr is not None:
        overrides["learning_rate"] = args.lr
    if args.class_weights:
        w0, w1 = (float(x) for x in args.class_weights.split(","))
        overrides["class_weights"] = (w0, w1)
    if overrides:
        hyper = Hyperparameters(**{**hyper.__dict__, **overrides})

    _, train_records = load_corpus(args.corpus, splits=("train",))
    _, val_records = load_corpus(args.corpus, splits=("validation",))
    result = train(
        _examples_from_records(train_records),
        hyper,
        val_examples=_examples_from_records(val_records) or None,
        log_path=args.log,
    )
    digest = save_checkpoint(args.out, result.best_params, DEFAULT_SCHEMA)
    last_train = [h for h in result.history if h.split == "train"][-1]
    print(f"trained {hyper.epochs} epochs on {len(train_records)} graphs "
          f"(validation: {len(val_records)})")
    print(f"final train loss {last_train.loss:.4f}  f1 {last_train.f1:.4f}")
    if result.best_val_f1 >= 0:
        print(f"best validation f1 {result.best_val_f1:.4f} "
              f"at epoch {result.best_epoch}")
    print(f"checkpoint: {args.out}")
    print(f"digest: {digest}")
    return EXIT_CLEAN


# --- eval --------------------------------------------------------------------

def evaluate_records(records, params) -> MetricsReport:
    """Node- and graph-level metrics per subtype plus a pooled row."""
    if not records:
        raise EmptyEvaluation("no records in the requested split")
    examples = _examples_from_records(records)
    by_subtype: dict[str, list[TrainExample]] = {}
    for ex in examples:
        by_subtype.setdefault(ex.subtype or "unknown", []).append(ex)

    rows: list[ReportRow] = []
    node_total = Confusion()
    graph_total = Confusion()
    split_name = records[0].split or "all"
    for subtype in sorted(by_subtype):
        batch = BatchGraph.build(by_subtype[subtype])
        pred = model_forward(batch.features, batch.adjacency, params)
        node_conf = confusion(pred.labels, batch.labels)
        truth_graph, pred_graph = [], []
        for _, node_slice in batch.per_graph_slices():
            truth_graph.append(batch.labels[node_slice])
            pred_graph.append(pred.labels[node_slice])
        graph_conf = confusion(
            graph_level_labels(pred_graph), graph_level_labels(truth_graph)
        )
        rows.append(ReportRow(subtype, split_name, "node",
                              metrics(node_conf), node_conf.total))
        rows.append(ReportRow(subtype, split_name, "graph",
                              metrics(graph_conf), graph_conf.total))
        node_total = node_total + node_conf
        graph_total = graph_total + graph_conf
    if len(by_subtype) > 1:
        rows.append(ReportRow("all", split_name, "node",
                              metrics(node_total), node_total.total))
        rows.append(ReportRow("all", split_name, "graph",
                              metrics(graph_total), graph_total.total))
    return MetricsReport(rows)


def cmd_eval(args) -> int:
    params, schema = load_checkpoint(args.checkpoint)
    require_schema(schema, DEFAULT_SCHEMA)
    _, records = load_corpus(args.corpus, splits=(args.split,))
    report = evaluate_records(records, params)
    print(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_CLEAN


# --- build-dataset -----------------------------------------------------------

def cmd_build_dataset(args) -> int:
    if bool(args.synthetic) == bool(args.ast_dir):
        raise GscanError("build-dataset needs exactly one of --synthetic or --ast-dir")
    ratios = DEFAULT_RATIOS
    if args.ratios:
        ratios = tuple(float(x) for x in args.ratios.split(","))
    if args.synthetic:
        n_clean, n_vulnerable = (int(x) for x in args.synthetic.split(","))
        records = generate_synthetic_corpus(n_clean, n_vulnerable, seed=args.seed)
    else:
        records = _records_from_ast_dir(Path(args.ast_dir))
    manifest_path = write_corpus(records, args.out, ratios=ratios, seed=args.seed)
    manifest = json.loads(manifest_path.read_text())
    kept = len(manifest["records"])
    print(f"corpus: {args.out}")
    print(f"records: {kept} kept of {len(records)} built "
          f"({len(records) - kept} duplicates removed)")
    return EXIT_CLEAN


def _records_from_ast_dir(ast_dir: Path):
    """Ingest <stem>.json ASTs with sibling <stem>.sol sources and optional
    <stem>.lines annotation files."""
    records = []
    for ast_path in sorted(ast_dir.glob("*.json")):
        sol_path = ast_path.with_suffix(".sol")
        if not sol_path.exists():
            raise GscanError(f"{ast_path} has no sibling {sol_path.name}")
        annotations: tuple[int, ...] = ()
        lines_path = ast_path.with_suffix(".lines")
        if lines_path.exists():
            annotations = tuple(
                int(line) for line in lines_path.read_text().split() if line
            )
        ast_json = ast_path.read_bytes()
        doc = parse_ast(ast_json, sol_path.read_bytes())
        subtype = "none"
        for nid in doc.order:
            member = doc.node(nid).attributes.get("memberName")
            if member in SUBTYPE_MEMBERS:
                subtype = member
                break
        records.append(build_record(
            ast_path.stem, ast_json, sol_path.read_bytes(), subtype,
            vulnerable_lines=annotations,
        ))
    if not records:
        raise GscanError(f"no *.json AST files under {ast_dir}")
    return records


# --- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gscan",
        description="Reentrancy line-level scanner: AST -> code graph -> "
                    "GCN node classifier -> source lines.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="scan one contract and report lines")
    p.add_argument("--ast", help="compact AST JSON file")
    p.add_argument("--sol", help="Solidity source (needs external compiler)")
    p.add_argument("--source", help="source file for --ast (default: sibling .sol)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--line-mode", choices=("union", "overwrite"), default="union")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("train", help="train on a corpus directory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--profile", choices=("quick", "paper"), default="quick")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--class-weights", help="w_clean,w_vulnerable")
    p.add_argument("--log", help="append per-epoch JSONL metrics here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a corpus split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", choices=("train", "validation", "test"),
                   default="test")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("build-dataset", help="build a corpus directory")
    p.add_argument("--synthetic", metavar="N,M",
                   help="generate N clean + M vulnerable contracts")
    p.add_argument("--ast-dir", help="ingest pre-generated AST JSON files")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", help="train,validation,test (default 0.84,0.08,0.08)")
    p.set_defaults(func=cmd_build_dataset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GscanError as exc:
        print(f"gscan: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
