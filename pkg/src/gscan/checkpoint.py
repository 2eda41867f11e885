"""Versioned checkpoint container.

Layout: magic line, 8-byte little-endian header length, UTF-8 JSON header,
then the raw tensor payload (little-endian float32, concatenated in a fixed
order).  The header records the feature-schema manifest, layer shapes, tensor
offsets and a sha256 of the payload, so a file is self-describing and
digest-checkable.  Nothing time- or host-dependent is written: identical
params and schema produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .gcn_core import ModelParams
from .node_features import FeatureSchema

MAGIC = b"GSCANCKPT\n"
FORMAT_VERSION = 1
_TENSOR_DTYPE = "<f4"


def save_checkpoint(
    path: str | Path, params: ModelParams, schema: FeatureSchema
) -> str:
    """Write params + schema manifest; returns the file's sha256 digest."""
    arch = params.architecture
    chunks: list[bytes] = []
    tensor_meta = []
    offset = 0
    for name, arr in params.tensors():
        raw = np.ascontiguousarray(arr, dtype=np.dtype(_TENSOR_DTYPE)).tobytes()
        tensor_meta.append({
            "name": name,
            "shape": list(arr.shape),
            "dtype": _TENSOR_DTYPE,
            "offset": offset,
            "nbytes": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    header = {
        "format": "gscan-checkpoint",
        "version": FORMAT_VERSION,
        "feature_schema": schema.to_manifest(),
        "architecture": {
            "conv_dims": list(arch.conv_dims),
            "dense_dims": list(arch.dense_dims),
        },
        "tensors": tensor_meta,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    blob = MAGIC + len(header_bytes).to_bytes(8, "little") + header_bytes + payload
    Path(path).write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def load_checkpoint(path: str | Path) -> tuple[ModelParams, FeatureSchema]:
    """Read and verify a checkpoint; raises :class:`CheckpointError` on any
    corruption, version or digest mismatch."""
    blob = Path(path).read_bytes()
    if not blob.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    cut = len(MAGIC)
    header_len = int.from_bytes(blob[cut:cut + 8], "little")
    header_start = cut + 8
    try:
        header = json.loads(blob[header_start:header_start + header_len])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: corrupt header: {exc}") from None
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint version {header.get('version')}"
        )
    payload = blob[header_start + header_len:]
    if hashlib.sha256(payload).hexdigest() != header["payload_sha256"]:
        raise CheckpointError(f"{path}: payload digest mismatch")

    tensors: dict[str, np.ndarray] = {}
    for meta in header["tensors"]:
        raw = payload[meta["offset"]:meta["offset"] + meta["nbytes"]]
        arr = np.frombuffer(raw, dtype=np.dtype(meta["dtype"])).reshape(meta["shape"])
        tensors[meta["name"]] = arr.copy()

    n_conv = len(header["architecture"]["conv_dims"]) - 1
    n_dense = len(header["architecture"]["dense_dims"]) - 1
    try:
        params = ModelParams(
            conv_weights=[tensors[f"conv{i}.W"] for i in range(n_conv)],
            conv_biases=[tensors[f"conv{i}.b"] for i in range(n_conv)],
            dense_weights=[tensors[f"dense{i}.W"] for i in range(n_dense)],
            dense_biases=[tensors[f"dense{i}.b"] for i in range(n_dense)],
        )
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing tensor {exc}") from None
    schema = FeatureSchema.from_manifest(header["feature_schema"])
    return params, schema


def checkpoint_digest(path: str | Path) -> str:
    """sha256 over the checkpoint file bytes (the determinism contract)."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def require_schema(path_schema: FeatureSchema, current: FeatureSchema) -> None:
    """Reject a checkpoint whose feature schema differs from the encoder's."""
    if path_schema.to_manifest() != current.to_manifest():
        raise CheckpointError(
            f"checkpoint feature schema v{path_schema.version} does not match "
            f"encoder schema v{current.version}"
        )
