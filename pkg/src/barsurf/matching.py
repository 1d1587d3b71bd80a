"""Epsilon-matchings and the bottleneck distance between barcodes.

A matching may delete finite bars of length at most 2*eps (they count
as matched with an interval of length zero); every longer bar must be
matched to a bar whose endpoints differ by at most eps, infinite
deaths only against infinite deaths. Degrees are ignored: matchings
are taken between full barcodes.

The engine is exact: feasibility is decided by bipartite maximum
matchings and the distance is found by binary search over the finite
candidate set of endpoint differences and half-lengths.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .persistence import Bar, Barcode


@dataclass(frozen=True)
class Matching:
    pairs: tuple          # (bar from A, bar from B)
    deleted_a: tuple
    deleted_b: tuple
    eps: float

    def cost(self) -> float:
        """Largest endpoint move or deleted half-length actually used."""
        worst = 0.0
        for a, b in self.pairs:
            worst = max(worst, abs(a.birth - b.birth))
            if a.death is not None:
                worst = max(worst, abs(a.death - b.death))
        for bar in self.deleted_a + self.deleted_b:
            worst = max(worst, 0.5 * bar.length)
        return worst


def _hopcroft_karp(adj, n_left, n_right):
    """Maximum matching; adj maps left index to an iterable of rights."""
    INF = math.inf
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    while True:
        dist = [INF] * n_left
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] is INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break

        def dfs(u):
            for v in adj[u]:
                w = match_r[v]
                if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                    match_l[u] = v
                    match_r[v] = u
                    return True
            dist[u] = INF
            return False

        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u)
    return match_l, match_r


def _combine_matchings(m1, m2, n_left, n_right, long_left, long_right):
    """Merge a matching covering long_left with one covering long_right.

    Components of the symmetric difference are alternating paths or
    cycles; inside a component the edges of one matching can be swapped
    for the other without touching the rest. A component never exposes
    both a left vertex covered only by m1 and a right vertex covered
    only by m2 (the alternation parity forbids it), so choosing m2 on
    components holding an m2-only right vertex keeps both sides covered.
    """
    result = dict(m1)
    edges1 = set(m1.items())
    edges2 = set(m2.items())
    nbr = {}
    for u, v in edges1 ^ edges2:
        nbr.setdefault(("L", u), []).append(("R", v))
        nbr.setdefault(("R", v), []).append(("L", u))
    visited = set()
    for start in list(nbr):
        if start in visited:
            continue
        stack, comp = [start], []
        visited.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for nxt in nbr[node]:
                if nxt not in visited:
                    visited.add(nxt)
                    stack.append(nxt)
        rights = [n[1] for n in comp if n[0] == "R"]
        lefts = [n[1] for n in comp if n[0] == "L"]
        needs_m2 = any(v in long_right and v not in m1.values() and v in m2.values()
                       for v in rights)
        if needs_m2:
            for u in lefts:
                result.pop(u, None)
            for u in lefts:
                if u in m2:
                    result[u] = m2[u]
    return result


def epsilon_matching(barcode_a: Barcode, barcode_b: Barcode, eps: float):
    """Return a Matching within eps, or None when none exists."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    inf_a = sorted(barcode_a.infinite_bars(), key=lambda b: b.birth)
    inf_b = sorted(barcode_b.infinite_bars(), key=lambda b: b.birth)
    if len(inf_a) != len(inf_b):
        return None
    # Sorted pairing minimises the largest birth shift on the line.
    if any(abs(a.birth - b.birth) > eps for a, b in zip(inf_a, inf_b)):
        return None
    pairs = list(zip(inf_a, inf_b))

    fin_a = barcode_a.finite_bars()
    fin_b = barcode_b.finite_bars()
    adj = []
    for a in fin_a:
        adj.append([j for j, b in enumerate(fin_b)
                    if abs(a.birth - b.birth) <= eps and abs(a.death - b.death) <= eps])
    long_a = {i for i, a in enumerate(fin_a) if a.length > 2 * eps}
    long_b = {j for j, b in enumerate(fin_b) if b.length > 2 * eps}

    # A matching covering the mandatory bars of both sides exists as soon
    # as each side can be covered separately (Mendelsohn-Dulmage).
    adj_long = [adj[i] if i in long_a else [] for i in range(len(fin_a))]
    m1_l, _ = _hopcroft_karp(adj_long, len(fin_a), len(fin_b))
    if any(m1_l[i] == -1 for i in long_a):
        return None
    m2_l, m2_r = _hopcroft_karp(adj, len(fin_a), len(fin_b))
    if any(m2_r[j] == -1 for j in long_b):
        return None

    m1 = {i: v for i, v in enumerate(m1_l) if v != -1}
    m2 = {i: v for i, v in enumerate(m2_l) if v != -1}
    combined = _combine_matchings(m1, m2, len(fin_a), len(fin_b), long_a, long_b)
    if any(i not in combined for i in long_a) or \
       any(j not in combined.values() for j in long_b):
        raise RuntimeError("matching combination failed to cover mandatory bars")

    used_b = set(combined.values())
    pairs.extend((fin_a[i], fin_b[j]) for i, j in sorted(combined.items()))
    deleted_a = tuple(a for i, a in enumerate(fin_a) if i not in combined)
    deleted_b = tuple(b for j, b in enumerate(fin_b) if j not in used_b)
    return Matching(tuple(pairs), deleted_a, deleted_b, eps)


def bottleneck_distance(barcode_a: Barcode, barcode_b: Barcode) -> float:
    """Exact bottleneck distance; +inf when infinite-bar counts differ."""
    inf_a = sorted(b.birth for b in barcode_a.infinite_bars())
    inf_b = sorted(b.birth for b in barcode_b.infinite_bars())
    if len(inf_a) != len(inf_b):
        return math.inf

    fin_a = barcode_a.finite_bars()
    fin_b = barcode_b.finite_bars()
    candidates = {0.0}
    candidates.update(abs(x - y) for x, y in zip(inf_a, inf_b))
    for a in fin_a:
        candidates.add(0.5 * a.length)
        for b in fin_b:
            candidates.add(abs(a.birth - b.birth))
            candidates.add(abs(a.death - b.death))
    for b in fin_b:
        candidates.add(0.5 * b.length)

    grid = sorted(candidates)
    lo, hi = 0, len(grid) - 1
    if epsilon_matching(barcode_a, barcode_b, grid[lo]) is not None:
        return grid[lo]
    if epsilon_matching(barcode_a, barcode_b, grid[hi]) is None:
        raise RuntimeError("no feasible matching at the largest candidate")
    # Invariant: infeasible at grid[lo], feasible at grid[hi].
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if epsilon_matching(barcode_a, barcode_b, grid[mid]) is None:
            lo = mid
        else:
            hi = mid
    return grid[hi]
