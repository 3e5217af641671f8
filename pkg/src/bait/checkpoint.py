"""Model checkpoints in the embedding-store container.

The store framing is reused with space byte 2 ("params") and the unit byte
repurposed as the model kind (0 related, 1 top-k, 2 attention). Record 0
carries the config as binary32 values; the flat float32 parameter stream
(tensors in declaration order, attention projections first) is chunked into
records of at most 65535 values each, header dim = 1. The reader rebuilds
tensor shapes from the config record, so chunking is transport-only.
"""

from __future__ import annotations

import numpy as np

from .errors import StoreFormatError, StoreTruncatedError
from .nn.attention import AttentionParams
from .nn.layers import DenseLayerParams
from .relatednet import RelatedNetConfig, RelatedNetParams
from .stage2 import AgreemNetConfig, AgreemNetParams, TopKNetConfig, TopKNetParams
from .store import MAX_RECORD_ROWS, Space, read_store_file, write_store_file

KIND_RELATEDNET, KIND_TOPKNET, KIND_AGREEMNET = 0, 1, 2
KIND_NAMES = {KIND_RELATEDNET: "relatednet", KIND_TOPKNET: "topknet",
              KIND_AGREEMNET: "agreemnet"}


def _config_vector(config) -> tuple[int, list[float]]:
    if isinstance(config, RelatedNetConfig):
        return KIND_RELATEDNET, [config.k, config.hidden_a, config.hidden_b,
                                 config.dropout_p, config.sim_dim]
    if isinstance(config, TopKNetConfig):
        return KIND_TOPKNET, [config.k, config.hidden_a, config.hidden_b,
                              config.dropout_p, config.nli_dim]
    if isinstance(config, AgreemNetConfig):
        return KIND_AGREEMNET, [config.num_heads, config.d_k, config.d_v,
                                config.hidden_a, config.hidden_b,
                                config.dropout_p, config.sim_dim, config.nli_dim]
    raise StoreFormatError(f"cannot checkpoint config type {type(config).__name__}")


def _config_from_vector(kind: int, values: np.ndarray):
    v = [float(x) for x in values]
    if kind == KIND_RELATEDNET:
        return RelatedNetConfig(int(v[0]), int(v[1]), int(v[2]), v[3], int(v[4]))
    if kind == KIND_TOPKNET:
        return TopKNetConfig(int(v[0]), int(v[1]), int(v[2]), v[3], int(v[4]))
    if kind == KIND_AGREEMNET:
        return AgreemNetConfig(int(v[0]), int(v[1]), int(v[2]), int(v[3]),
                               int(v[4]), v[5], int(v[6]), int(v[7]))
    raise StoreFormatError(f"unknown checkpoint kind byte {kind}")


def _expected_shapes(config) -> list[tuple[int, ...]]:
    if isinstance(config, RelatedNetConfig):
        sizes = config.layer_sizes()
        attention = []
    elif isinstance(config, TopKNetConfig):
        sizes = config.layer_sizes()
        attention = []
    else:
        sizes = config.classifier_sizes()
        h, dk, dv = config.num_heads, config.d_k, config.d_v
        attention = [(h * dk, config.sim_dim), (h * dk, config.sim_dim),
                     (h * dv, config.nli_dim), (config.nli_dim, h * dv)]
    dense = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        dense += [(n_out, n_in), (n_out,)]
    return attention + dense


def save_checkpoint(path, config, params) -> None:
    kind, config_values = _config_vector(config)
    flat = np.concatenate(
        [np.asarray(a, dtype=np.float32).ravel() for a in params.flat()])
    records = [(0, np.asarray(config_values, dtype=np.float32)[None, :].T)]
    # record 0 is (len, 1); chunk the parameter stream the same way
    for i in range(0, len(flat), MAX_RECORD_ROWS):
        chunk = flat[i:i + MAX_RECORD_ROWS]
        records.append((len(records), chunk[:, None]))
    write_store_file(path, int(Space.PARAMS), kind, 1, records)


def load_checkpoint(path):
    """Returns (kind_name, config, params)."""
    space, kind, dim, records = read_store_file(path)
    if space != int(Space.PARAMS):
        raise StoreFormatError(f"{path}: not a checkpoint (space byte {space})")
    if dim != 1:
        raise StoreFormatError(f"{path}: checkpoints use dim 1, found {dim}")
    if not records or records[0][0] != 0:
        raise StoreFormatError(f"{path}: missing leading config record")
    config = _config_from_vector(kind, records[0][1].ravel())
    flat = np.concatenate([m.ravel() for _, m in
                           sorted(records[1:], key=lambda r: r[0])]) \
        if len(records) > 1 else np.empty(0, dtype=np.float32)
    shapes = _expected_shapes(config)
    total = sum(int(np.prod(s)) for s in shapes)
    if len(flat) != total:
        raise StoreTruncatedError(
            f"{path}: payload holds {len(flat)} values, config implies {total}")
    arrays = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(flat[offset:offset + size].reshape(shape).copy())
        offset += size
    if kind == KIND_AGREEMNET:
        attention = AttentionParams(config.num_heads, config.d_k, config.d_v,
                                    *arrays[:4])
        layers = [DenseLayerParams(w, b) for w, b in
                  zip(arrays[4::2], arrays[5::2])]
        return KIND_NAMES[kind], config, AgreemNetParams(attention, layers)
    layers = [DenseLayerParams(w, b) for w, b in zip(arrays[::2], arrays[1::2])]
    params_cls = RelatedNetParams if kind == KIND_RELATEDNET else TopKNetParams
    return KIND_NAMES[kind], config, params_cls(layers)
