"""Compiled kernels for bipartite matching on CSR adjacency.

All arrays are int64. ``indptr``/``indices`` describe left -> right edges;
the ``t_`` variants describe right -> left (the transpose).
"""
import numpy as np
from numba import njit

_INF = np.int64(1) << 62


@njit(cache=True)
def hopcroft_karp(indptr, indices, n_left, n_right):
    """Maximum matching; returns ``match_left`` with -1 for unmatched rows."""
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    for u in range(n_left):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if match_r[v] == -1:
                match_l[u] = v
                match_r[v] = u
                break

    dist = np.empty(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    cursor = np.empty(n_left, dtype=np.int64)
    ustack = np.empty(n_left + 1, dtype=np.int64)
    vstack = np.empty(n_left + 1, dtype=np.int64)
    while True:
        head = 0
        tail = 0
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                dist[u] = _INF
        found = False
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr[u], indptr[u + 1]):
                w = match_r[indices[e]]
                if w == -1:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if not found:
            break

        for u in range(n_left):
            cursor[u] = indptr[u]
        augmented = 0
        for s in range(n_left):
            if match_l[s] != -1:
                continue
            depth = 0
            ustack[0] = s
            while depth >= 0:
                u = ustack[depth]
                moved = False
                while cursor[u] < indptr[u + 1]:
                    v = indices[cursor[u]]
                    cursor[u] += 1
                    w = match_r[v]
                    if w == -1:
                        vstack[depth] = v
                        for d in range(depth + 1):
                            match_l[ustack[d]] = vstack[d]
                            match_r[vstack[d]] = ustack[d]
                        augmented += 1
                        depth = -1
                        moved = True
                        break
                    if dist[w] == dist[u] + 1:
                        vstack[depth] = v
                        depth += 1
                        ustack[depth] = w
                        moved = True
                        break
                if not moved:
                    dist[u] = _INF
                    depth -= 1
        if augmented == 0:
            break
    return match_l


@njit(cache=True)
def match_right_from_left(match_l, n_right):
    match_r = np.full(n_right, -1, dtype=np.int64)
    for u in range(match_l.shape[0]):
        if match_l[u] != -1:
            match_r[match_l[u]] = u
    return match_r


@njit(cache=True)
def reachable_rows(indptr, indices, match_l, match_r, start):
    """Rows reachable from ``start`` by alternating paths (free edge out, matched edge back)."""
    n_left = match_l.shape[0]
    seen = np.zeros(n_left, dtype=np.bool_)
    queue = np.empty(n_left, dtype=np.int64)
    seen[start] = True
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v == match_l[u]:
                continue
            w = match_r[v]
            if w != -1 and not seen[w]:
                seen[w] = True
                queue[tail] = w
                tail += 1
    return seen


@njit(cache=True)
def condition_41_kernel(indptr, indices, t_indptr, t_indices, n):
    """Returns (matching size, condition flag).

    With a maximum matching of size n-1 exposing row r and column c, the
    rows that some maximum matching can leave exposed are those alternating-
    reachable from r, and likewise for columns from c. The two searches touch
    disjoint vertices (otherwise an augmenting path would exist), so any pair
    of such row and column can be exposed together; the condition holds iff
    some index j appears in both sets.
    """
    if n == 0:
        return 0, True
    match_l = hopcroft_karp(indptr, indices, n, n)
    size = 0
    for u in range(n):
        if match_l[u] != -1:
            size += 1
    if size == n:
        return size, True
    if size < n - 1:
        return size, False
    match_r = match_right_from_left(match_l, n)
    r = -1
    c = -1
    for u in range(n):
        if match_l[u] == -1:
            r = u
        if match_r[u] == -1:
            c = u
    rows = reachable_rows(indptr, indices, match_l, match_r, r)
    # columns: same search on the transpose with the roles of the matchings swapped
    cols = reachable_rows(t_indptr, t_indices, match_r, match_l, c)
    for j in range(n):
        if rows[j] and cols[j]:
            return size, True
    return size, False
