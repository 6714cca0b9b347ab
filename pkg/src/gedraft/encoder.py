"""Permutation-invariant multi-scale graph encoder.

A linear input projection is followed by K enhanced message-passing layers
(isomorphism-network aggregation -> linear -> layer norm -> relu, residual
add, then a two-layer feed-forward block). A graph-level readout (mean,
max, sum, or global context attention) is taken at every scale 0..K.

Graphs are encoded in batches grouped by node count so each group runs as
one set of batched tensor ops.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .graphs import Graph

READOUTS = ("mean", "max", "sum", "gca")


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


def init_encoder_params(
    rng: np.random.Generator, alphabet_size: int, hidden: int, layers: int, readout: str
) -> dict:
    if layers < 1:
        raise ValueError(f"need layers >= 1, got {layers}")
    if readout not in READOUTS:
        raise ValueError(f"unknown readout {readout!r}")
    p: dict[str, Tensor] = {}

    def param(name, values):
        p[name] = Tensor(values, requires_grad=True)

    param("encoder.proj.W", xavier_uniform(rng, alphabet_size, hidden, (alphabet_size, hidden)))
    param("encoder.proj.b", np.zeros(hidden))
    for k in range(1, layers + 1):
        pre = f"encoder.layer{k}"
        param(f"{pre}.eps", np.zeros(()))
        param(f"{pre}.gin.W", xavier_uniform(rng, hidden, hidden, (hidden, hidden)))
        param(f"{pre}.gin.b", np.zeros(hidden))
        param(f"{pre}.gin.ln.gain", np.ones(hidden))
        param(f"{pre}.gin.ln.bias", np.zeros(hidden))
        param(f"{pre}.ffn.W1", xavier_uniform(rng, hidden, hidden, (hidden, hidden)))
        param(f"{pre}.ffn.b1", np.zeros(hidden))
        param(f"{pre}.ffn.W2", xavier_uniform(rng, hidden, hidden, (hidden, hidden)))
        param(f"{pre}.ffn.b2", np.zeros(hidden))
    if readout == "gca":
        for k in range(layers + 1):
            param(f"encoder.gca.W{k}", xavier_uniform(rng, hidden, hidden, (hidden, hidden)))
    return p


def gin_aggregate(x, adjacency, eps) -> Tensor:
    """(1 + eps) * x_i + sum of neighbor features.

    x is (n, h) or batched (B, n, h) with adjacency (n, n) / (B, n, n);
    eps may be a float or a scalar Tensor.
    """
    x = ad.as_tensor(x)
    adjacency = ad.as_tensor(adjacency)
    if x.shape[:-1] != adjacency.shape[:-1]:
        raise ad.ShapeError(
            f"adjacency shape {adjacency.shape} does not match features {x.shape}"
        )
    scale = ad.add(eps, Tensor(1.0)) if isinstance(eps, Tensor) else float(1 + eps)
    self_term = ad.mul(x, scale) if isinstance(scale, Tensor) else ad.scalar_mul(x, scale)
    return ad.add(self_term, ad.matmul(adjacency, x))


def enhanced_layer(x, adjacency, params: dict, prefix: str) -> Tensor:
    """x + GIN(x) through a feed-forward block: FFN(x + GIN(x))."""
    agg = gin_aggregate(x, adjacency, params[f"{prefix}.eps"])
    lin = ad.add(ad.matmul(agg, params[f"{prefix}.gin.W"]), params[f"{prefix}.gin.b"])
    gin = ad.relu(
        ad.layer_norm(lin, params[f"{prefix}.gin.ln.gain"], params[f"{prefix}.gin.ln.bias"])
    )
    res = ad.add(x, gin)
    mid = ad.relu(ad.add(ad.matmul(res, params[f"{prefix}.ffn.W1"]), params[f"{prefix}.ffn.b1"]))
    return ad.add(ad.matmul(mid, params[f"{prefix}.ffn.W2"]), params[f"{prefix}.ffn.b2"])


def readout(x, kind: str, weight=None) -> Tensor:
    """Aggregate node features (n, h) or (B, n, h) into graph vector(s)."""
    x = ad.as_tensor(x)
    node_axis = x.ndim - 2
    if kind == "mean":
        return ad.reduce_mean(x, axis=node_axis)
    if kind == "max":
        return ad.reduce_max(x, axis=node_axis)
    if kind == "sum":
        return ad.reduce_sum(x, axis=node_axis)
    if kind == "gca":
        if weight is None:
            raise ValueError("gca readout needs its weight matrix")
        context = ad.tanh(ad.matmul(ad.reduce_mean(x, axis=node_axis), weight))
        if x.ndim == 2:
            scores = ad.sigmoid(ad.matmul(x, context))  # (n,)
            return ad.matmul(scores, x)  # (h,)
        b, _, h = x.shape
        scores = ad.sigmoid(ad.matmul(x, ad.reshape(context, (b, h, 1))))  # (B,n,1)
        out = ad.matmul(ad.swapaxes(scores, 1, 2), x)  # (B,1,h)
        return ad.reshape(out, (b, h))
    raise ValueError(f"unknown readout {kind!r}")


def _encode_stack(xs: Tensor, adjacency: Tensor, params, layers, readout_kind):
    """Per-scale readouts for one batch of same-size graphs."""
    scales = []

    def read(x, k):
        w = params.get(f"encoder.gca.W{k}") if readout_kind == "gca" else None
        return readout(x, readout_kind, w)

    x = ad.add(ad.matmul(xs, params["encoder.proj.W"]), params["encoder.proj.b"])
    scales.append(read(x, 0))
    for k in range(1, layers + 1):
        x = enhanced_layer(x, adjacency, params, f"encoder.layer{k}")
        scales.append(read(x, k))
    return scales


def encode_graphs(
    graphs: list[Graph], params: dict, alphabet_size: int, layers: int, readout_kind: str
) -> list[Tensor]:
    """Encode a batch of graphs; returns one (B, hidden) tensor per scale.

    Rows follow the input order. Graphs are grouped by node count so that
    each group is a single batched pass.
    """
    for g in graphs:
        if g.labels and max(g.labels) >= alphabet_size:
            raise ValueError(f"graph {g.id!r} has a label outside the alphabet")
    groups: dict[int, list[int]] = {}
    for idx, g in enumerate(graphs):
        groups.setdefault(g.n, []).append(idx)
    per_group_scales = []
    order: list[int] = []
    for n in sorted(groups):
        idxs = groups[n]
        order.extend(idxs)
        xs = Tensor(np.stack([graphs[i].one_hot(alphabet_size) for i in idxs]))
        adj = Tensor(np.stack([graphs[i].adjacency() for i in idxs]))
        per_group_scales.append(_encode_stack(xs, adj, params, layers, readout_kind))
    inverse = np.empty(len(graphs), dtype=np.intp)
    inverse[np.asarray(order, dtype=np.intp)] = np.arange(len(graphs))
    out = []
    for k in range(layers + 1):
        stacked = ad.concat([gs[k] for gs in per_group_scales], axis=0)
        out.append(ad.index_rows(stacked, inverse))
    return out


def encode(g: Graph, params: dict, alphabet_size: int, layers: int, readout_kind: str):
    """Multi-scale embedding of a single graph: K+1 vectors of width hidden."""
    scales = encode_graphs([g], params, alphabet_size, layers, readout_kind)
    return [ad.reshape(s, (s.shape[1],)) for s in scales]
