"""GED search wrapper, brute-force verifier, bounds, and scores.

Admissibility of the lower bound used here and inside the search:

* Node bound. Any edit path induces a partial label-preserving-or-relabeled
  matching between the two node sets. At most ``sum_l min(c1[l], c2[l])``
  nodes can be matched without a relabel, so at least
  ``max(N1, N2) - sum_l min(c1[l], c2[l])`` node operators (relabels plus
  insertions/deletions, each counted once) are required.
* Edge bound. Every edge operator changes the edge count by exactly one and
  node operators never change it (deleting a non-isolated node requires its
  edge deletions first, which are separate operators), so at least
  ``|E1 - E2|`` edge operators are required.

The two bounds charge disjoint operator kinds, so their sum is a lower
bound on the true GED.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import permutations

from ..graphs import Graph, require_valid

if os.environ.get("GEDRAFT_PURE"):
    from . import _astar_py as _kernel

    BACKEND = "python"
else:
    try:
        from . import _astar as _kernel  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _astar_py as _kernel

        BACKEND = "python"

DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class EditOp:
    """One unit-cost edit operator.

    Operand conventions: edge-delete / node-delete / node-relabel use g1
    node ids; node-insert carries (g2_id, label); edge-insert uses g2 node
    ids (mapped g1 nodes are identified with their images).
    """

    kind: str
    operands: tuple

    def to_json(self):
        return {"kind": self.kind, "operands": list(self.operands)}


@dataclass(frozen=True)
class GedResult:
    cost: int
    path: tuple[EditOp, ...]
    mapping: tuple[tuple[int, int], ...]  # matched (g1 node, g2 node) pairs
    expansions: int

    def to_json(self):
        return {
            "cost": self.cost,
            "path": [op.to_json() for op in self.path],
            "mapping": [list(p) for p in self.mapping],
        }


class GedBudgetExceeded(Exception):
    """Search ran out of node expansions; carries the best upper bound."""

    def __init__(self, best_cost, expansions):
        self.best_cost = best_cost
        self.expansions = expansions
        bound = "none" if best_cost is None else str(best_cost)
        super().__init__(
            f"expansion budget exhausted after {expansions} expansions; "
            f"best upper bound: {bound}"
        )


def _alphabet_size(g1: Graph, g2: Graph) -> int:
    return max(max(g1.labels), max(g2.labels)) + 1


def ged_exact(g1: Graph, g2: Graph, budget: int = DEFAULT_BUDGET) -> GedResult:
    """Minimal-cost edit path from g1 to (a graph equal up to ids to) g2."""
    require_valid(g1)
    require_valid(g2)
    cost, assign, expansions, optimal = _kernel.solve(
        g1.n,
        list(g1.labels),
        g1.adjacency_masks(),
        g2.n,
        list(g2.labels),
        g2.adjacency_masks(),
        _alphabet_size(g1, g2),
        budget,
    )
    if not optimal:
        raise GedBudgetExceeded(cost, expansions)
    path, mapping = _build_path(g1, g2, assign)
    assert len(path) == cost, "path length disagrees with search cost"
    return GedResult(cost, tuple(path), tuple(mapping), expansions)


def _build_path(g1: Graph, g2: Graph, assign):
    """Expand a node assignment into an explicit edit path."""
    n2 = g2.n
    image = {u: v for u, v in enumerate(assign) if v != n2}
    mapping = sorted(image.items())
    e2_images = {
        (min(image[u], image[w]), max(image[u], image[w]))
        for u, w in g1.edges
        if u in image and w in image
    }
    path: list[EditOp] = []
    for u, w in g1.edges:
        if u in image and w in image and g2.has_edge(image[u], image[w]):
            continue
        path.append(EditOp("edge-delete", (u, w)))
    for u in range(g1.n):
        if u not in image:
            path.append(EditOp("node-delete", (u,)))
    for u, v in mapping:
        if g1.labels[u] != g2.labels[v]:
            path.append(EditOp("node-relabel", (u, g2.labels[v])))
    used = set(image.values())
    for v in range(n2):
        if v not in used:
            path.append(EditOp("node-insert", (v, g2.labels[v])))
    for v, w in g2.edges:
        matched = (v, w) in e2_images and v in used and w in used
        if not matched:
            path.append(EditOp("edge-insert", (v, w)))
    return path, mapping


def apply_edit_path(g1: Graph, g2: Graph, result: GedResult) -> Graph:
    """Replay the edit path on g1; the outcome lives in g2's id space."""
    labels = dict(enumerate(g1.labels))
    edges = set(g1.edges)
    image = dict(result.mapping)
    for op in result.path:
        if op.kind == "edge-delete":
            u, w = op.operands
            edges.remove((min(u, w), max(u, w)))
        elif op.kind == "node-delete":
            (u,) = op.operands
            if any(u in e for e in edges):
                raise ValueError(f"deleting node {u} with incident edges")
            del labels[u]
    # rename survivors to their g2 images
    labels = {image[u]: lab for u, lab in labels.items()}
    edges = {
        (min(image[u], image[w]), max(image[u], image[w])) for u, w in edges
    }
    for op in result.path:
        if op.kind == "node-relabel":
            u, new = op.operands
            labels[image[u]] = new
        elif op.kind == "node-insert":
            v, lab = op.operands
            labels[v] = lab
        elif op.kind == "edge-insert":
            v, w = op.operands
            edges.add((min(v, w), max(v, w)))
    ids = sorted(labels)
    if ids != list(range(len(ids))):
        raise ValueError("replayed node set is not contiguous in g2 ids")
    return Graph.make(g2.id, [labels[i] for i in ids], edges)


BRUTEFORCE_MAX_N = 6


def ged_bruteforce(g1: Graph, g2: Graph) -> int:
    """Exhaustive minimum over injections of the smaller node set.

    With unit costs, deleting a node from the smaller graph while a free
    slot remains on the larger side is never strictly cheaper than mapping
    it, so full injections suffice.
    """
    if max(g1.n, g2.n) > BRUTEFORCE_MAX_N:
        raise ValueError(
            f"brute force limited to n <= {BRUTEFORCE_MAX_N}, "
            f"got {g1.n} and {g2.n}"
        )
    small, large = (g1, g2) if g1.n <= g2.n else (g2, g1)
    large_edges = set(large.edges)
    best = None
    for m in permutations(range(large.n), small.n):
        cost = large.n - small.n
        for i in range(small.n):
            if small.labels[i] != large.labels[m[i]]:
                cost += 1
        matched = 0
        for u, w in small.edges:
            a, b = m[u], m[w]
            if (min(a, b), max(a, b)) in large_edges:
                matched += 1
        cost += (small.num_edges - matched) + (large.num_edges - matched)
        if best is None or cost < best:
            best = cost
    return best


def lower_bound_labels(g1: Graph, g2: Graph) -> int:
    """Admissible lower bound: label-multiset distance plus edge-count gap."""
    size = _alphabet_size(g1, g2)
    c1 = [0] * size
    c2 = [0] * size
    for lab in g1.labels:
        c1[lab] += 1
    for lab in g2.labels:
        c2[lab] += 1
    overlap = sum(min(a, b) for a, b in zip(c1, c2))
    node_bound = max(g1.n, g2.n) - overlap
    return node_bound + abs(g1.num_edges - g2.num_edges)


def nged(cost: int, n1: int, n2: int) -> float:
    """Edit cost normalized by the mean node count of the pair."""
    if n1 < 1 or n2 < 1:
        raise ValueError("node counts must be >= 1")
    return cost / ((n1 + n2) / 2)


def similarity(nged_value: float) -> float:
    """Similarity score exp(-nged), in (0, 1]."""
    if nged_value < 0:
        raise ValueError(f"nged must be >= 0, got {nged_value}")
    return math.exp(-nged_value)
