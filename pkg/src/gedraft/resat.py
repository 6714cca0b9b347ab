"""Remaining-subgraph alignment probing.

For a base graph G, a random-walk induced subgraph S, and the remaining
graph R (G minus S's edges and the resulting isolated nodes), a frozen
trained encoder/fusion stack produces the fused embedding of (G, S) and
the multi-scale embedding of R. A fresh MLP is trained to map the former
to the latter; its best validation MSE measures how much structural-
difference information the fusion output retains. Lower is better.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, backward
from .encoder import encode_graphs, xavier_uniform
from .graphs import (
    EMPTY_REMAINDER,
    Graph,
    SubgraphExtraction,
    random_walk_subgraph,
    remaining_subgraph,
)
from .metrics import evaluate, spearman_checked
from .model import ModelConfig, fused_pair_embedding, params_equal
from .optim import Adam
from .rng import SplitMix64


@dataclass(frozen=True)
class ResatTriple:
    base: Graph
    extraction: SubgraphExtraction
    remaining: Graph


def build_resat_dataset(graphs, per_graph: int, seed: int, max_attempts: int = 20):
    """Returns (triples, skipped graph ids); deterministic given seed.

    A draw whose remaining graph is empty is resampled; a base graph that
    exhausts max_attempts on any draw is skipped entirely.
    """
    if per_graph < 0:
        raise ValueError(f"need per_graph >= 0, got {per_graph}")
    rng = SplitMix64(seed)
    triples: list[ResatTriple] = []
    skipped: list[str] = []
    for g in graphs:
        if g.n < 4:
            skipped.append(g.id)
            continue
        own: list[ResatTriple] = []
        ok = True
        for _ in range(per_graph):
            for _attempt in range(max_attempts):
                ex = random_walk_subgraph(g, rng.next_u64())
                rem = remaining_subgraph(g, ex)
                if rem is not EMPTY_REMAINDER:
                    own.append(ResatTriple(g, ex, rem))
                    break
            else:
                ok = False
                break
        if ok:
            triples.extend(own)
        else:
            skipped.append(g.id)
    return triples, skipped


def probe_embeddings(params: dict, cfg: ModelConfig, triples):
    """Frozen-model embeddings for probing.

    Returns {"fused": (n, fused_dim), "target": (n, (K+1)*hidden)} and,
    for the diffatt variant, additionally "pre_attention": the concat of
    the raw per-scale embedding pairs before attention rescaling.
    """
    bases = [t.base for t in triples]
    subs = [t.extraction.subgraph for t in triples]
    rems = [t.remaining for t in triples]
    # distinct ids are required by the batched encoder; subgraph/remainder
    # ids are derived from the base id and unique per triple
    subs = [Graph(f"{g.id}#s{i}", g.labels, g.edges) for i, g in enumerate(subs)]
    rems = [Graph(f"{g.id}#r{i}", g.labels, g.edges) for i, g in enumerate(rems)]
    everything = bases + subs + rems
    # deduplicate bases while keeping one encoding pass
    unique: dict[str, int] = {}
    glist: list[Graph] = []
    for g in everything:
        if g.id not in unique:
            unique[g.id] = len(glist)
            glist.append(g)
    scales = encode_graphs(glist, params, cfg.alphabet_size, cfg.layers, cfg.readout)
    scales = [Tensor(s.values) for s in scales]  # detach: probing is frozen
    idx_base = [unique[g.id] for g in bases]
    idx_sub = [unique[g.id] for g in subs]
    idx_rem = [unique[g.id] for g in rems]
    scales_i = [ad.index_rows(s, idx_base) for s in scales]
    scales_j = [ad.index_rows(s, idx_sub) for s in scales]
    fused = fused_pair_embedding(scales_i, scales_j, params, cfg)
    target = ad.concat([ad.index_rows(s, idx_rem) for s in scales], axis=-1)
    out = {"fused": fused.values.copy(), "target": target.values.copy()}
    if cfg.fusion == "diffatt":
        pre = ad.concat(
            [ad.concat([hi, hj], axis=-1) for hi, hj in zip(scales_i, scales_j)],
            axis=-1,
        )
        out["pre_attention"] = pre.values.copy()
    return out


def _probe_mlp_params(rng, in_dim, out_dim, width):
    def t(v):
        return Tensor(v, requires_grad=True)

    return {
        "W1": t(xavier_uniform(rng, in_dim, width, (in_dim, width))),
        "b1": t(np.zeros(width)),
        "W2": t(xavier_uniform(rng, width, width, (width, width))),
        "b2": t(np.zeros(width)),
        "W3": t(xavier_uniform(rng, width, out_dim, (width, out_dim))),
        "b3": t(np.zeros(out_dim)),
    }


def _probe_forward(x: Tensor, p: dict) -> Tensor:
    h = ad.relu(ad.add(ad.matmul(x, p["W1"]), p["b1"]))
    h = ad.relu(ad.add(ad.matmul(h, p["W2"]), p["b2"]))
    return ad.add(ad.matmul(h, p["W3"]), p["b3"])


def resat_probe(
    inputs: np.ndarray,
    targets: np.ndarray,
    seed: int,
    epochs: int = 200,
    batch_size: int = 64,
    lr: float = 0.001,
    width_multipliers=(1, 2),
) -> float:
    """Best validation MSE of an alignment MLP trained on an 80/20 split.

    The probe has two relu hidden layers of width m * max(in_dim, out_dim)
    for each multiplier m; the best validation MSE over the grid is
    returned. Inputs and targets are fixed arrays, so the probed model is
    untouched by construction.
    """
    n = len(inputs)
    if n < 10:
        raise ValueError(f"need at least 10 triples, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = max(1, int(round(n * 0.8)))
    tr, va = perm[:n_train], perm[n_train:]
    x_tr, y_tr = inputs[tr], targets[tr]
    x_va, y_va = Tensor(inputs[va]), Tensor(targets[va])
    best_overall = None
    for mult in width_multipliers:
        width = mult * max(inputs.shape[1], targets.shape[1])
        p = _probe_mlp_params(rng, inputs.shape[1], targets.shape[1], width)
        opt = Adam(p, lr=lr)
        best = None
        for _epoch in range(epochs):
            order = rng.permutation(len(tr))
            for start in range(0, len(tr), batch_size):
                idx = order[start : start + batch_size]
                opt.zero_grad()
                loss = ad.mse_loss(
                    _probe_forward(Tensor(x_tr[idx]), p), Tensor(y_tr[idx])
                )
                backward(loss)
                opt.step()
            vloss = float(
                ad.mse_loss(_probe_forward(x_va, p), y_va).values
            )
            if best is None or vloss < best:
                best = vloss
        if best_overall is None or best < best_overall:
            best_overall = best
    return best_overall


@dataclass
class ResatReport:
    rows: list  # dicts: variant, gsc_mse_e3, resat_mse (+ before/after)
    rho: float
    rho_defined: bool

    def to_json(self):
        return {"rows": self.rows, "rho": self.rho, "rho_defined": self.rho_defined}

    def render(self) -> str:
        lines = [f"{'variant':<16} {'GSC MSE(1e-3)':>14} {'RESAT MSE':>12}"]
        for row in self.rows:
            if "resat_mse_before" in row:
                lines.append(
                    f"{row['variant'] + ' (before)':<16} {row['gsc_mse_e3']:>14.4f} "
                    f"{row['resat_mse_before']:>12.4f}"
                )
                lines.append(
                    f"{row['variant'] + ' (after)':<16} {'':>14} "
                    f"{row['resat_mse']:>12.4f}"
                )
            else:
                lines.append(
                    f"{row['variant']:<16} {row['gsc_mse_e3']:>14.4f} "
                    f"{row['resat_mse']:>12.4f}"
                )
        rho = f"{self.rho:.3f}" if self.rho_defined else "undefined"
        lines.append(f"GSC-vs-RESAT spearman rho: {rho}")
        return "\n".join(lines)


def resat_compare(
    variants: dict, dataset, triples, seeds=(0,), probe_epochs: int = 200
) -> ResatReport:
    """Probe each trained variant; variants maps name -> (params, cfg).

    For diffatt both the pre-attention and post-attention embeddings are
    probed. The cross-variant Spearman rho relates GSC test MSE to the
    alignment MSE (post-attention value for diffatt).
    """
    if not variants:
        raise ValueError("no variants to compare")
    rows = []
    for name, (params, cfg) in variants.items():
        before_snapshot = {k: t.values.copy() for k, t in params.items()}
        emb = probe_embeddings(params, cfg, triples)
        gsc = evaluate(params, cfg, dataset, ks=()).mse_e3
        after = float(
            np.mean(
                [
                    resat_probe(emb["fused"], emb["target"], s, epochs=probe_epochs)
                    for s in seeds
                ]
            )
        )
        row = {"variant": name, "gsc_mse_e3": gsc, "resat_mse": after}
        if "pre_attention" in emb:
            row["resat_mse_before"] = float(
                np.mean(
                    [
                        resat_probe(
                            emb["pre_attention"], emb["target"], s, epochs=probe_epochs
                        )
                        for s in seeds
                    ]
                )
            )
        frozen = {k: Tensor(v) for k, v in before_snapshot.items()}
        if not params_equal(frozen, {k: Tensor(t.values) for k, t in params.items()}):
            raise RuntimeError(f"probing mutated parameters of variant {name!r}")
        rows.append(row)
    if len(rows) >= 2:
        corr = spearman_checked(
            [r["gsc_mse_e3"] for r in rows], [r["resat_mse"] for r in rows]
        )
        rho, defined = corr.value, corr.defined
    else:
        rho, defined = 0.0, False
    return ResatReport(rows, rho, defined)
