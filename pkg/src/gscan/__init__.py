"""Line-level reentrancy scanning for Solidity contracts.

Pipeline: compiler-emitted AST -> dependency/hierarchy-preserving code graph
-> 29-dim node features -> graph-convolutional node classifier -> verdicts
mapped back to source lines through byte spans.
"""

__version__ = "0.1.0"

from .ast_ingest import (
    AstDocument,
    AstNode,
    LineIndex,
    SourceSpan,
    build_line_index,
    format_src,
    parse_ast,
    parse_src,
    span_to_lines,
)
from .graph_builder import (
    CodeGraph,
    EdgeFamily,
    build_code_graph,
    canonical_serialization,
)
from .node_features import DEFAULT_SCHEMA, FeatureSchema, encode_graph, encode_node
from .label_mapper import annotate_node_labels, project_node_predictions
from .gcn_core import (
    Architecture,
    DEFAULT_ARCHITECTURE,
    ModelParams,
    Prediction,
    compute_gradients,
    cross_entropy_loss,
    gcn_layer_forward,
    model_forward,
    normalize_adjacency,
)
from .checkpoint import checkpoint_digest, load_checkpoint, save_checkpoint
from .trainer import Hyperparameters, TrainExample, adam_step, make_batches, train
from .evaluator import confusion, graph_level_labels, metrics
from .dataset_pipeline import (
    DatasetRecord,
    canonical_hash,
    deduplicate,
    generate_synthetic_corpus,
    load_corpus,
    split,
    write_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
