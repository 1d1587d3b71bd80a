"""Lower-star filtrations and sublevel-set persistence barcodes.

Bars follow the half-open convention (birth, death], infinite bars are
(birth, +infinity) and carry death None. Degree 0 is computed by
union-find with the elder rule; degrees 1 and 2 by column reduction of
the triangle boundary matrix over the two-element field, with clearing
(edge columns are never reduced, their pairs come from union-find).
The reduction is sequential, so results are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .mesh import CircleField, ScalarField


class Bar(NamedTuple):
    birth: float
    death: float | None  # None encodes +infinity
    degree: int

    @property
    def is_finite(self) -> bool:
        return self.death is not None

    @property
    def length(self) -> float:
        return math.inf if self.death is None else self.death - self.birth


def bar_sort_key(bar: Bar):
    return (bar.degree, bar.birth, math.inf if bar.death is None else bar.death)


@dataclass(frozen=True)
class Barcode:
    """A finite multiset of bars plus the boundary flag of its surface."""

    bars: tuple
    boundary: bool = False

    def __post_init__(self):
        for b in self.bars:
            if b.death is not None and not b.birth < b.death:
                raise ValueError(f"bar with nonpositive length: {b}")
            if b.degree < 0:
                raise ValueError("negative degree")

    def finite_bars(self):
        return [b for b in self.bars if b.is_finite]

    def infinite_bars(self):
        return [b for b in self.bars if not b.is_finite]

    def in_degree(self, k):
        return [b for b in self.bars if b.degree == k]

    @property
    def n_finite(self):
        return sum(1 for b in self.bars if b.is_finite)

    def min_endpoint(self):
        """Smallest bar endpoint, or None for an empty barcode."""
        if not self.bars:
            return None
        return min(b.birth for b in self.bars)

    def max_endpoint(self):
        if not self.bars:
            return None
        return max(b.death if b.death is not None else b.birth for b in self.bars)

    def validate(self, betti=None):
        if betti is not None:
            for k, bk in enumerate(betti):
                got = sum(1 for b in self.infinite_bars() if b.degree == k)
                if got != bk:
                    raise ValueError(f"{got} infinite bars in degree {k}, expected {bk}")
        if self.boundary:
            if any(b.degree == 2 for b in self.bars):
                raise ValueError("bars of top degree on a surface with boundary")
        lo, hi = self.min_endpoint(), self.max_endpoint()
        for b in self.finite_bars():
            if not (lo <= b.birth and b.death <= hi):
                raise ValueError("finite bar outside the endpoint range")
        return True

    # -- serialisation ----------------------------------------------------

    def to_json_dict(self):
        return {
            "bars": [{"birth": b.birth, "death": b.death, "degree": b.degree}
                     for b in sorted(self.bars, key=bar_sort_key)],
            "boundary": self.boundary,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_json_dict(), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json_dict(cls, data):
        bars = tuple(Bar(float(d["birth"]),
                         None if d["death"] is None else float(d["death"]),
                         int(d["degree"]))
                     for d in data["bars"])
        return cls(bars, bool(data.get("boundary", False)))

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_diagram_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["degree", "birth", "death"])
            for b in sorted(self.bars, key=bar_sort_key):
                writer.writerow([b.degree, repr(b.birth),
                                 "inf" if b.death is None else repr(b.death)])

    @classmethod
    def from_diagram_csv(cls, path, boundary=False):
        bars = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                if not row:
                    continue
                death = None if row[2].strip() == "inf" else float(row[2])
                bars.append(Bar(float(row[1]), death, int(row[0])))
        return cls(tuple(bars), boundary)


@dataclass(frozen=True)
class Filtration:
    """Simplices of a surface ordered by (lower-star value, dim, vertices)."""

    surface: object
    vertex_order: np.ndarray    # vertex ids, ascending value
    vertex_values: np.ndarray   # values in that order
    edge_order: np.ndarray      # indices into surface.edges, ascending
    edge_values: np.ndarray
    triangle_order: np.ndarray  # indices into surface.triangles, ascending
    triangle_values: np.ndarray

    def validate(self):
        if np.any(np.diff(self.vertex_values) < 0) or \
           np.any(np.diff(self.edge_values) < 0) or \
           np.any(np.diff(self.triangle_values) < 0):
            raise ValueError("filtration values are not non-decreasing")
        values = np.empty(self.surface.n_vertices)
        values[self.vertex_order] = self.vertex_values
        ev = np.max(values[self.surface.edges], axis=1)
        tv = np.max(values[self.surface.triangles], axis=1)
        if not np.array_equal(ev[self.edge_order], self.edge_values) or \
           not np.array_equal(tv[self.triangle_order], self.triangle_values):
            raise ValueError("simplex values disagree with the lower-star rule")
        # Faces precede cofaces because a face value never exceeds the
        # coface value and ties are broken by dimension.
        return True


def lower_star_filtration(fld: ScalarField) -> Filtration:
    """Order every simplex at the maximum of its vertex values."""
    if not fld.is_simple:
        raise ValueError("tied vertex values; apply perturb_to_simple first")
    surface = fld.surface
    values = fld.values

    vertex_order = np.lexsort((fld.tie_break, values))
    edge_vals = np.max(values[surface.edges], axis=1)
    e_sort = np.lexsort((surface.edges[:, 1], surface.edges[:, 0], edge_vals))
    tri_vals = np.max(values[surface.triangles], axis=1)
    t_sort = np.lexsort((surface.triangles[:, 2], surface.triangles[:, 1],
                         surface.triangles[:, 0], tri_vals))
    return Filtration(
        surface=surface,
        vertex_order=vertex_order,
        vertex_values=values[vertex_order],
        edge_order=e_sort,
        edge_values=edge_vals[e_sort],
        triangle_order=t_sort,
        triangle_values=tri_vals[t_sort],
    )


def compute_barcode(filtration: Filtration) -> Barcode:
    """Persistence barcode of a lower-star filtration.

    Creator/destroyer pairs with equal filtration values are dropped, so
    only genuine topology changes of the PL function produce bars.
    """
    surface = filtration.surface
    values = np.empty(surface.n_vertices)
    values[filtration.vertex_order] = filtration.vertex_values

    bars = []

    # Degree 0: union-find over vertices in edge order, elder rule.
    parent = list(range(surface.n_vertices))
    birth = values.tolist()

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = surface.edges
    merged = np.zeros(surface.n_edges, dtype=bool)
    for idx, val in zip(filtration.edge_order.tolist(),
                        filtration.edge_values.tolist()):
        u, v = int(edges[idx, 0]), int(edges[idx, 1])
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        merged[idx] = True
        if birth[ru] > birth[rv]:
            ru, rv = rv, ru
        # ru is the elder component; the younger one dies at this edge.
        if birth[rv] < val:
            bars.append(Bar(birth[rv], val, 0))
        parent[rv] = ru

    roots = {find(v) for v in range(surface.n_vertices)}
    for r in roots:
        bars.append(Bar(birth[r], None, 0))

    # Skip the provably positive triangle of each closed component: the
    # only 2-cycle of a connected closed surface is the sum of all its
    # triangles, so the component's last triangle creates its H2 class.
    comp_root = np.array([find(v) for v in range(surface.n_vertices)])
    closed_roots = {r for r in roots
                    if not np.any(surface.boundary_vertex[comp_root == r])}
    skip = set()
    if closed_roots:
        seen = set()
        tri_first_vertex = comp_root[surface.triangles[filtration.triangle_order, 0]]
        for pos in range(len(filtration.triangle_order) - 1, -1, -1):
            r = int(tri_first_vertex[pos])
            if r in closed_roots and r not in seen:
                seen.add(r)
                skip.add(pos)
                bars.append(Bar(float(filtration.triangle_values[pos]), None, 2))
                if len(seen) == len(closed_roots):
                    break

    # Degrees 1 and 2: reduce triangle columns over GF(2). Rows are edges
    # indexed by their filtration rank so the pivot is just the maximum.
    edge_rank = np.empty(surface.n_edges, dtype=np.int64)
    edge_rank[filtration.edge_order] = np.arange(surface.n_edges)
    tri_edge_ranks = edge_rank[surface.triangle_edges]  # (F, 3)

    cols = []
    pairs = {}
    edge_value_by_rank = filtration.edge_values
    tri_rows = tri_edge_ranks[filtration.triangle_order].tolist()
    tri_vals = filtration.triangle_values.tolist()
    for pos, (rows, tval) in enumerate(zip(tri_rows, tri_vals)):
        if pos in skip:
            continue
        col = set(rows)
        while True:
            if not col:
                raise RuntimeError(
                    f"inconsistent filtration: unexpected 2-cycle at triangle {pos}")
            low = max(col)
            j = pairs.get(low)
            if j is None:
                break
            col ^= cols[j]
        pairs[low] = len(cols)
        cols.append(col)
        bval = float(edge_value_by_rank[low])
        if bval < tval:
            bars.append(Bar(bval, tval, 1))

    # Positive edges never used as pivots create essential degree-1 classes.
    paired_ranks = set(pairs)
    for idx in np.nonzero(~merged)[0].tolist():
        rk = int(edge_rank[idx])
        if rk not in paired_ranks:
            bars.append(Bar(float(np.max(values[edges[idx]])), None, 1))

    barcode = Barcode(tuple(sorted(bars, key=bar_sort_key)),
                      boundary=surface.has_boundary)
    b_inf = [sum(1 for b in barcode.infinite_bars() if b.degree == k)
             for k in range(3)]
    if tuple(b_inf) != tuple(surface.betti):
        raise RuntimeError(
            f"inconsistent filtration: infinite bars {b_inf} vs Betti {surface.betti}")
    return barcode


def circle_barcode(fld: CircleField) -> Barcode:
    """Sublevel persistence of a PL function on the circle.

    Degree 0 pairs every non-global local minimum with a local maximum by
    the elder rule; degree 1 holds the single essential class born at the
    global maximum.
    """
    values = fld.values
    if not fld.is_simple:
        raise ValueError("tied values; circle fields must be simple")
    m = len(values)
    order = np.argsort(values)
    parent = list(range(m))
    birth = values.tolist()
    active = [False] * m

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    bars = []
    loop_birth = None
    for v in order.tolist():
        left, right = (v - 1) % m, (v + 1) % m
        active[v] = True
        for nbr in (left, right):
            if not active[nbr]:
                continue
            rn, rv = find(nbr), find(v)
            if rn == rv:
                # Both arcs already joined: the circle closes here.
                loop_birth = values[v]
                continue
            if birth[rn] > birth[rv]:
                rn, rv = rv, rn
            if birth[rv] < values[v]:
                bars.append(Bar(birth[rv], float(values[v]), 0))
            parent[rv] = rn
    bars.append(Bar(float(np.min(values)), None, 0))
    if loop_birth is None:
        raise RuntimeError("cyclic input never closed its loop")
    bars.append(Bar(float(loop_birth), None, 1))
    return Barcode(tuple(sorted(bars, key=bar_sort_key)), boundary=False)


def spectral_invariants(barcode: Barcode) -> dict:
    """Ascending births of the infinite bars, per degree."""
    out = {}
    for b in barcode.infinite_bars():
        out.setdefault(b.degree, []).append(b.birth)
    return {k: sorted(v) for k, v in sorted(out.items())}
