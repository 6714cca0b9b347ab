# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled best-first search kernel for exact unit-cost GED.

Semantics (cost charging, heuristic, tie-breaking) are identical to the
pure-Python kernel in _astar_py.py; see that module for the derivation.
Node count is limited to 64 per graph by the bitmask representation.
"""

import heapq

from libc.stdlib cimport calloc, free

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int popcount(unsigned long long x) nogil:
    return __builtin_popcountll(x)


def solve(int n1, labels1, adj1, int n2, labels2, adj2,
          int alphabet_size, long long budget):
    if n1 > 64 or n2 > 64:
        raise ValueError("compiled kernel supports at most 64 nodes per graph")

    cdef unsigned long long a1[64]
    cdef unsigned long long a2[64]
    cdef int l1[64]
    cdef int l2[64]
    cdef int i, k, w, v, lab
    for i in range(n1):
        a1[i] = adj1[i]
        l1[i] = labels1[i]
    for i in range(n2):
        a2[i] = adj2[i]
        l2[i] = labels2[i]

    cdef int e2_total = 0
    for i in range(n2):
        e2_total += popcount(a2[i])
    e2_total //= 2

    cdef int *suffix = <int *> calloc((n1 + 1) * alphabet_size, sizeof(int))
    cdef int *count2 = <int *> calloc(alphabet_size, sizeof(int))
    cdef int *used_lab = <int *> calloc(alphabet_size, sizeof(int))
    cdef int *e1_prefix = <int *> calloc(n1 + 1, sizeof(int))
    cdef int *assign_c = <int *> calloc(n1 + 1, sizeof(int))
    if not (suffix and count2 and used_lab and e1_prefix and assign_c):
        free(suffix); free(count2); free(used_lab); free(e1_prefix); free(assign_c)
        raise MemoryError()

    cdef unsigned long long prefix_mask, used_mask, new_used
    cdef int e1_total, e2_used, new_e2_used
    cdef int g, f, gc, delta, h, depth, total
    cdef int r1, r2, overlap, node_bound, e1_rem, e2_rem, c2
    cdef long long expansions = 0
    cdef int best_cost = -1
    cdef bint optimal = True
    best_assign = None

    try:
        for i in range(n1 - 1, -1, -1):
            for lab in range(alphabet_size):
                suffix[i * alphabet_size + lab] = suffix[(i + 1) * alphabet_size + lab]
            suffix[i * alphabet_size + l1[i]] += 1
        prefix_mask = 0
        for i in range(n1):
            e1_prefix[i + 1] = e1_prefix[i] + popcount(a1[i] & prefix_mask)
            prefix_mask |= (<unsigned long long> 1) << i
        e1_total = e1_prefix[n1]
        for i in range(n2):
            count2[l2[i]] += 1

        # root heuristic (no used nodes)
        for lab in range(alphabet_size):
            used_lab[lab] = 0
        r1 = n1
        r2 = n2
        overlap = 0
        for lab in range(alphabet_size):
            c2 = count2[lab]
            if suffix[lab] < c2:
                overlap += suffix[lab]
            else:
                overlap += c2
        node_bound = (r1 if r1 > r2 else r2) - overlap
        e1_rem = e1_total
        e2_rem = e2_total
        h = node_bound + (e1_rem - e2_rem if e1_rem > e2_rem else e2_rem - e1_rem)

        heap = [(h, 0, ())]
        while heap:
            item = heapq.heappop(heap)
            f = item[0]
            g = -item[1]
            assign = item[2]
            if best_cost >= 0 and f >= best_cost:
                break
            depth = len(assign)
            if depth == n1:
                if best_cost < 0 or g < best_cost:
                    best_cost = g
                    best_assign = assign
                continue
            if expansions >= budget:
                optimal = False
                break
            expansions += 1

            used_mask = 0
            e2_used = 0
            for lab in range(alphabet_size):
                used_lab[lab] = 0
            for w in range(depth):
                v = assign[w]
                assign_c[w] = v
                if v != n2:
                    e2_used += popcount(a2[v] & used_mask)
                    used_mask |= (<unsigned long long> 1) << v
                    used_lab[l2[v]] += 1

            prefix_mask = 0
            for w in range(depth):
                prefix_mask |= (<unsigned long long> 1) << w

            # branch: delete node `depth`
            delta = 1 + popcount(a1[depth] & prefix_mask)
            gc = g + delta
            if depth + 1 == n1:
                total = gc + (n2 - popcount(used_mask)) + (e2_total - e2_used)
                if best_cost < 0 or total < best_cost:
                    best_cost = total
                    best_assign = assign + (n2,)
            else:
                h = _heuristic(depth + 1, n1, n2, alphabet_size, suffix, count2,
                               used_lab, used_mask, e1_total, e1_prefix,
                               e2_total, e2_used)
                if best_cost < 0 or gc + h < best_cost:
                    heapq.heappush(heap, (gc + h, -gc, assign + (n2,)))

            # branch: map node `depth` to each unused v
            for v in range(n2):
                if (used_mask >> v) & 1:
                    continue
                delta = 1 if l1[depth] != l2[v] else 0
                for w in range(depth):
                    if assign_c[w] != n2:
                        delta += ((a1[depth] >> w) & 1) ^ ((a2[v] >> assign_c[w]) & 1)
                    else:
                        delta += (a1[depth] >> w) & 1
                gc = g + delta
                new_used = used_mask | ((<unsigned long long> 1) << v)
                new_e2_used = e2_used + popcount(a2[v] & used_mask)
                if depth + 1 == n1:
                    total = gc + (n2 - popcount(new_used)) + (e2_total - new_e2_used)
                    if best_cost < 0 or total < best_cost:
                        best_cost = total
                        best_assign = assign + (v,)
                else:
                    used_lab[l2[v]] += 1
                    h = _heuristic(depth + 1, n1, n2, alphabet_size, suffix,
                                   count2, used_lab, new_used, e1_total,
                                   e1_prefix, e2_total, new_e2_used)
                    used_lab[l2[v]] -= 1
                    if best_cost < 0 or gc + h < best_cost:
                        heapq.heappush(heap, (gc + h, -gc, assign + (v,)))
    finally:
        free(suffix)
        free(count2)
        free(used_lab)
        free(e1_prefix)
        free(assign_c)

    cost = best_cost if best_cost >= 0 else None
    return cost, best_assign, expansions, optimal


cdef inline int _heuristic(int i, int n1, int n2, int alphabet_size,
                           int *suffix, int *count2, int *used_lab,
                           unsigned long long used_mask, int e1_total,
                           int *e1_prefix, int e2_total, int e2_used) nogil:
    cdef int r1 = n1 - i
    cdef int r2 = n2 - popcount(used_mask)
    cdef int overlap = 0
    cdef int lab, c1, c2
    for lab in range(alphabet_size):
        c1 = suffix[i * alphabet_size + lab]
        c2 = count2[lab] - used_lab[lab]
        overlap += c1 if c1 < c2 else c2
    cdef int node_bound = (r1 if r1 > r2 else r2) - overlap
    cdef int e1_rem = e1_total - e1_prefix[i]
    cdef int e2_rem = e2_total - e2_used
    cdef int edge_bound = e1_rem - e2_rem if e1_rem > e2_rem else e2_rem - e1_rem
    return node_bound + edge_bound
