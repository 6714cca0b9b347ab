"""Pure-Python best-first search kernel for exact unit-cost GED.

States are partial assignments of g1's nodes, processed in id order; node i
is either mapped to an unused g2 node or deleted (encoded as n2). Costs are
charged so that every node edit and every edge edit is counted exactly once:

* mapping/deleting node i charges its node edit plus all edge edits between
  i and already-processed g1 nodes, and all g2 edges between i's image and
  already-used g2 nodes that are not images of g1 edges;
* completion charges one insertion per unused g2 node plus one per g2 edge
  with at least one unused endpoint.

The heuristic adds the label-multiset bound on the unprocessed/unused nodes
and the absolute difference of uncharged edge counts; both are admissible
(see gedraft.ged.bounds).

Tie-breaking is deterministic: (f, g descending, assignment lexicographic).
"""

from __future__ import annotations

import heapq


def _popcount(x: int) -> int:
    return bin(x).count("1")


def solve(n1, labels1, adj1, n2, labels2, adj2, alphabet_size, budget):
    """Search for a minimal assignment.

    adj1/adj2 are per-node neighbor bitmasks. Returns
    (cost, assignment, expansions, optimal) where assignment[i] in 0..n2
    (n2 = deleted). When the expansion budget runs out before proving
    optimality, returns the best complete assignment found so far (or the
    heuristic-greedy completion is absent: cost of best frontier completion
    is not fabricated; optimal=False and assignment may be None).
    """
    e2_total = sum(_popcount(m) for m in adj2) // 2

    # label counts of the g1 suffix starting at i, and edges inside the prefix
    suffix_counts = [[0] * alphabet_size for _ in range(n1 + 1)]
    for i in range(n1 - 1, -1, -1):
        row = suffix_counts[i + 1][:]
        row[labels1[i]] += 1
        suffix_counts[i] = row
    prefix_mask = [0] * (n1 + 1)
    for i in range(n1):
        prefix_mask[i + 1] = prefix_mask[i] | (1 << i)
    e1_prefix = [0] * (n1 + 1)
    for i in range(n1):
        e1_prefix[i + 1] = e1_prefix[i] + _popcount(adj1[i] & prefix_mask[i])
    e1_total = e1_prefix[n1]

    count2_all = [0] * alphabet_size
    for lab in labels2:
        count2_all[lab] += 1

    def heuristic(i, used_mask, e2_used):
        r1 = n1 - i
        r2 = n2 - _popcount(used_mask)
        c1 = suffix_counts[i]
        overlap = 0
        for lab in range(alphabet_size):
            c2 = count2_all[lab] - _used_label_counts[lab]
            overlap += min(c1[lab], c2)
        node_bound = max(r1, r2) - overlap
        e1_rem = e1_total - e1_prefix[i]
        e2_rem = e2_total - e2_used
        return node_bound + abs(e1_rem - e2_rem)

    # label counts of used g2 nodes, keyed per state: recomputed on pop
    _used_label_counts = [0] * alphabet_size

    def completion_cost(used_mask, e2_used):
        return (n2 - _popcount(used_mask)) + (e2_total - e2_used)

    empty = ()
    _used_label_counts = [0] * alphabet_size
    h0 = heuristic(0, 0, 0)
    heap = [(h0, 0, empty)]
    expansions = 0
    best_cost = None
    best_assign = None
    while heap:
        f, neg_g, assign = heapq.heappop(heap)
        g = -neg_g
        if best_cost is not None and f >= best_cost:
            break
        i = len(assign)
        if i == n1:
            # g already includes completion cost (charged when reaching depth n1)
            if best_cost is None or g < best_cost:
                best_cost, best_assign = g, assign
            continue
        if expansions >= budget:
            return best_cost, best_assign, expansions, False
        expansions += 1

        used_mask = 0
        e2_used = 0
        for lab in range(alphabet_size):
            _used_label_counts[lab] = 0
        for w, vw in enumerate(assign):
            if vw != n2:
                e2_used += _popcount(adj2[vw] & used_mask)
                used_mask |= 1 << vw
                _used_label_counts[labels2[vw]] += 1

        proc_mask = prefix_mask[i]
        # branch: delete node i
        delta = 1 + _popcount(adj1[i] & proc_mask)
        g_child = g + delta
        child = assign + (n2,)
        if i + 1 == n1:
            total = g_child + completion_cost(used_mask, e2_used)
            if best_cost is None or total < best_cost:
                best_cost, best_assign = total, child
        else:
            h = heuristic(i + 1, used_mask, e2_used)
            if best_cost is None or g_child + h < best_cost:
                heapq.heappush(heap, (g_child + h, -g_child, child))

        # branch: map node i to each unused v
        for v in range(n2):
            if (used_mask >> v) & 1:
                continue
            delta = 1 if labels1[i] != labels2[v] else 0
            # edge edits between i and processed g1 nodes; every used g2
            # node is the image of some mapped w, so the XOR also charges
            # insertions of g2 edges from v into the used set
            for w in range(i):
                e1 = (adj1[i] >> w) & 1
                vw = assign[w]
                e2 = (adj2[v] >> vw) & 1 if vw != n2 else 0
                delta += e1 ^ e2
            g_child = g + delta
            child = assign + (v,)
            new_used = used_mask | (1 << v)
            new_e2_used = e2_used + _popcount(adj2[v] & used_mask)
            if i + 1 == n1:
                total = g_child + completion_cost(new_used, new_e2_used)
                if best_cost is None or total < best_cost:
                    best_cost, best_assign = total, child
            else:
                _used_label_counts[labels2[v]] += 1
                h = heuristic(i + 1, new_used, new_e2_used)
                _used_label_counts[labels2[v]] -= 1
                if best_cost is None or g_child + h < best_cost:
                    heapq.heappush(heap, (g_child + h, -g_child, child))
    return best_cost, best_assign, expansions, True
