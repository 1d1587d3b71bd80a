"""Triangulated surfaces, cyclic 1-complexes and scalar fields on them.

Surfaces are immutable after construction and every operation here is a
pure function, so instances can be shared freely between workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

TWO_PI = 2.0 * np.pi


class SimplicialSurface:
    """A triangulated orientable surface, closed or with boundary.

    Parameters
    ----------
    n_vertices : int
        Number of vertices; vertex ids are 0 .. n_vertices-1.
    triangles : array-like of shape (F, 3)
        Vertex triples. Edges, boundary flags and Betti numbers are
        derived from them.
    coordinates : array-like of shape (V, 2), optional
        Chart coordinates (radians for torus charts, plain plane
        coordinates otherwise); needed by `sample_field`.
    grid_n : int, optional
        Set by `build_flat_torus_grid`; enables vectorised fast paths
        for fields living on the periodic grid.
    """

    def __init__(self, n_vertices, triangles, coordinates=None, grid_n=None):
        self.n_vertices = int(n_vertices)
        tris = np.asarray(triangles, dtype=np.int64)
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise ValueError("triangles must be an (F, 3) array")
        tris = np.sort(tris, axis=1)
        self.triangles = tris
        self.coordinates = None if coordinates is None else np.asarray(coordinates, dtype=float)
        self.grid_n = grid_n

        pairs = np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]])
        keys = pairs[:, 0] * np.int64(self.n_vertices) + pairs[:, 1]
        edge_keys, counts = np.unique(keys, return_counts=True)
        if np.any(counts > 2):
            raise ValueError("an edge belongs to more than two triangles")
        self.edges = np.stack(np.divmod(edge_keys, self.n_vertices), axis=1)
        self.edge_tri_count = counts
        self.boundary_edges = self.edges[counts == 1]

        self.boundary_vertex = np.zeros(self.n_vertices, dtype=bool)
        if len(self.boundary_edges):
            self.boundary_vertex[self.boundary_edges.ravel()] = True

        self.triangle_edges = np.searchsorted(
            edge_keys, keys).reshape(3, -1).T.copy()

        self._edge_keys = edge_keys
        self._component_of = self._compute_components()
        self.betti = self._compute_betti()
        self._links = None

    # -- topology ---------------------------------------------------------

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def has_boundary(self):
        return bool(len(self.boundary_edges))

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def edge_index(self, u, v):
        if u > v:
            u, v = v, u
        key = u * self.n_vertices + v
        pos = int(np.searchsorted(self._edge_keys, key))
        if pos >= len(self._edge_keys) or self._edge_keys[pos] != key:
            raise KeyError(f"no edge ({u}, {v})")
        return pos

    def component_of_vertex(self):
        return self._component_of

    def _compute_components(self):
        graph = coo_matrix(
            (np.ones(len(self.edges), dtype=np.int8),
             (self.edges[:, 0], self.edges[:, 1])),
            shape=(self.n_vertices, self.n_vertices))
        _, labels = connected_components(graph, directed=False)
        return labels.astype(np.int64)

    def _compute_betti(self):
        roots = np.unique(self._component_of)
        b0 = len(roots)
        # A connected orientable component carries a fundamental class iff
        # it is closed, so b2 counts the boundaryless components.
        b2 = 0
        for r in roots:
            verts = self._component_of == r
            if not np.any(self.boundary_vertex[verts]):
                b2 += 1
        b1 = b0 + b2 - self.euler_characteristic
        return (b0, b1, b2)

    def vertex_links(self):
        """Cyclic link (closed vertex) or link path (boundary vertex) per vertex."""
        if self._links is None:
            self._links = _build_links(self)
        return self._links

    def validate(self):
        """Check the manifold and Euler invariants, raising on failure."""
        if np.any((self.edge_tri_count < 1) | (self.edge_tri_count > 2)):
            raise ValueError("edge-triangle incidence out of range")
        b0, b1, b2 = self.betti
        if self.euler_characteristic != b0 - b1 + b2:
            raise ValueError("Euler characteristic disagrees with Betti numbers")
        self.vertex_links()  # raises if some link is not a cycle or path
        return True


def _build_links(surface):
    """Return per-vertex neighbour sequences in cyclic (or path) order."""
    V = surface.n_vertices
    star = [[] for _ in range(V)]
    for a, b, c in surface.triangles:
        star[a].append((int(b), int(c)))
        star[b].append((int(a), int(c)))
        star[c].append((int(a), int(b)))
    links = []
    for v in range(V):
        pairs = star[v]
        if not pairs:
            raise ValueError(f"isolated vertex {v}")
        adj = {}
        for a, b in pairs:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        degs = {x: len(ys) for x, ys in adj.items()}
        if surface.boundary_vertex[v]:
            ends = [x for x, d in degs.items() if d == 1]
            if len(ends) != 2 or any(d > 2 for d in degs.values()):
                raise ValueError(f"link of boundary vertex {v} is not a path")
            start = min(ends)
        else:
            if any(d != 2 for d in degs.values()):
                raise ValueError(f"link of interior vertex {v} is not a cycle")
            start = min(adj)
        walk = [start]
        prev = None
        while True:
            nxts = [x for x in adj[walk[-1]] if x != prev]
            if not nxts:
                break
            prev = walk[-1]
            walk.append(nxts[0])
            if walk[-1] == start:
                walk.pop()
                break
        if len(walk) != len(adj):
            raise ValueError(f"link of vertex {v} is disconnected")
        links.append(walk)
    return links


@dataclass(frozen=True)
class ScalarField:
    """Real values on the vertices of a surface.

    `tie_break` supplies the total order used wherever values coincide;
    it defaults to the vertex index.
    """

    surface: SimplicialSurface
    values: np.ndarray
    tie_break: np.ndarray = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if len(vals) != self.surface.n_vertices:
            raise ValueError("value array length must equal the vertex count")
        object.__setattr__(self, "values", vals)
        if self.tie_break is None:
            object.__setattr__(self, "tie_break", np.arange(len(vals)))

    @property
    def is_simple(self):
        return len(np.unique(self.values)) == len(self.values)

    def min_nonzero_gap(self):
        distinct = np.unique(self.values)
        if len(distinct) < 2:
            return None
        return float(np.min(np.diff(distinct)))


@dataclass(frozen=True)
class CircleField:
    """Cyclically ordered samples of a function on the circle."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if len(vals) < 3:
            raise ValueError("a circle field needs at least 3 samples")
        object.__setattr__(self, "values", vals)

    @property
    def is_simple(self):
        return len(np.unique(self.values)) == len(self.values)

    def total_variation(self):
        v = self.values
        return float(np.sum(np.abs(np.diff(v))) + abs(v[0] - v[-1]))


@dataclass(frozen=True)
class CriticalReport:
    """Classified critical vertices of a simple field.

    Saddles come with their multiplicity (half the number of link sign
    changes minus one); `total` counts saddles with multiplicity.
    `adjacent_critical` flags critical vertices that share an edge,
    which is how resolved plateaus of a degenerate input show up.
    """

    minima: tuple
    maxima: tuple
    saddles: tuple  # (vertex, value, multiplicity)
    total: int
    adjacent_critical: bool

    @property
    def n_minima(self):
        return len(self.minima)

    @property
    def n_maxima(self):
        return len(self.maxima)

    @property
    def saddle_multiplicity(self):
        return sum(m for _, _, m in self.saddles)


def build_flat_torus_grid(n: int) -> SimplicialSurface:
    """Periodic n x n triangulated grid on [0, 2*pi)^2.

    Vertex (i, j) has id i*n + j and coordinates (2*pi*i/n, 2*pi*j/n);
    each grid square is split along its (+1, +1) diagonal.
    """
    if n < 3:
        raise ValueError("grid size must be at least 3")
    ids = np.arange(n * n).reshape(n, n)
    right = np.roll(ids, -1, axis=0)
    up = np.roll(ids, -1, axis=1)
    diag = np.roll(ids, (-1, -1), axis=(0, 1))
    t1 = np.stack([ids, right, diag], axis=-1).reshape(-1, 3)
    t2 = np.stack([ids, diag, up], axis=-1).reshape(-1, 3)
    triangles = np.concatenate([t1, t2])
    i, j = np.divmod(np.arange(n * n), n)
    coords = np.stack([TWO_PI * i / n, TWO_PI * j / n], axis=1)
    return SimplicialSurface(n * n, triangles, coordinates=coords, grid_n=n)


def sample_field(surface: SimplicialSurface, evaluator) -> ScalarField:
    """Evaluate a coordinate function at every vertex.

    The evaluator is tried on coordinate arrays first and falls back to
    per-vertex calls. Boundary vertices are forced to the value 0.
    """
    if surface.coordinates is None:
        raise ValueError("surface carries no coordinates; sampling unsupported")
    xs, ys = surface.coordinates[:, 0], surface.coordinates[:, 1]
    try:
        values = np.asarray(evaluator(xs, ys), dtype=float)
        if values.shape != xs.shape:
            raise TypeError
    except TypeError:
        values = np.array([float(evaluator(float(x), float(y))) for x, y in zip(xs, ys)])
    if surface.has_boundary:
        values = values.copy()
        values[surface.boundary_vertex] = 0.0
    return ScalarField(surface, values)


def field_from_grid(values2d, surface: SimplicialSurface | None = None) -> ScalarField:
    """Wrap an (n, n) value array as a field on the periodic grid."""
    grid = np.asarray(values2d, dtype=float)
    n = grid.shape[0]
    if grid.shape != (n, n):
        raise ValueError("grid values must be square")
    if surface is None:
        surface = build_flat_torus_grid(n)
    elif surface.grid_n != n:
        raise ValueError("surface grid size does not match the value array")
    return ScalarField(surface, grid.reshape(-1))


def perturb_to_simple(fld: ScalarField, seed: int = 0) -> ScalarField:
    """Make vertex values pairwise distinct.

    Vertices are visited in lexicographic (value, tie_break) order and
    nudged upward by the minimal float steps needed to make the values
    strictly increasing along that order. This realises the documented
    tie order numerically, preserves every strictly ordered input pair
    and moves each value by a few ulps, far below half the minimal
    nonzero gap whenever float64 can express such offsets at all. The
    result does not depend on the seed (kept for signature stability);
    already-simple fields are returned unchanged.
    """
    if fld.is_simple:
        return fld
    values = fld.values
    order = np.lexsort((fld.tie_break, values))
    out = values.tolist()
    prev = -math.inf
    for idx in order.tolist():
        v = out[idx]
        if v <= prev:
            v = math.nextafter(prev, math.inf)
            out[idx] = v
        prev = v
    return ScalarField(fld.surface, np.array(out), fld.tie_break)


def classify_critical_points(fld: ScalarField) -> CriticalReport:
    """PL classification of the interior vertices of a simple field.

    Counts sign changes of (neighbour value - vertex value) around each
    link cycle: none means an extremum, two a regular vertex and 2m with
    m >= 2 a saddle of multiplicity m - 1.
    """
    if not fld.is_simple:
        raise ValueError("tied values; perturb the field first")
    surface = fld.surface
    if surface.grid_n is not None:
        return _classify_on_grid(fld)
    values = fld.values
    links = surface.vertex_links()
    minima, maxima, saddles = [], [], []
    critical = np.zeros(surface.n_vertices, dtype=bool)
    for v in range(surface.n_vertices):
        if surface.boundary_vertex[v]:
            continue
        diffs = values[np.asarray(links[v])] - values[v]
        signs = diffs > 0
        changes = int(np.sum(signs != np.roll(signs, 1)))
        if changes == 0:
            critical[v] = True
            if signs[0]:
                minima.append((v, float(values[v])))
            else:
                maxima.append((v, float(values[v])))
        elif changes >= 4:
            critical[v] = True
            saddles.append((v, float(values[v]), changes // 2 - 1))
    return _finish_report(surface, minima, maxima, saddles, critical)


def _classify_on_grid(fld: ScalarField) -> CriticalReport:
    n = fld.surface.grid_n
    grid = fld.values.reshape(n, n)
    # Link neighbours of (i, j) in cyclic order for the (+1, +1) diagonal split.
    offsets = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)]
    signs = np.stack([np.roll(grid, (-di, -dj), axis=(0, 1)) > grid
                      for di, dj in offsets])
    changes = np.zeros((n, n), dtype=np.int64)
    for k in range(6):
        changes += signs[k] != signs[(k + 1) % 6]
    minima_mask = (changes == 0) & signs[0]
    maxima_mask = (changes == 0) & ~signs[0]
    saddle_mask = changes >= 4
    ids = np.arange(n * n).reshape(n, n)
    vals = grid
    minima = [(int(v), float(vals.flat[v])) for v in ids[minima_mask]]
    maxima = [(int(v), float(vals.flat[v])) for v in ids[maxima_mask]]
    saddles = [(int(v), float(vals.flat[v]), int(changes.flat[v]) // 2 - 1)
               for v in ids[saddle_mask]]
    critical = (minima_mask | maxima_mask | saddle_mask).reshape(-1)
    return _finish_report(fld.surface, minima, maxima, saddles, critical)


def _finish_report(surface, minima, maxima, saddles, critical_mask):
    adjacent = False
    if np.any(critical_mask):
        eu, ev = surface.edges[:, 0], surface.edges[:, 1]
        adjacent = bool(np.any(critical_mask[eu] & critical_mask[ev]))
    total = len(minima) + len(maxima) + sum(m for _, _, m in saddles)
    return CriticalReport(
        minima=tuple(sorted(minima, key=lambda p: p[1])),
        maxima=tuple(sorted(maxima, key=lambda p: p[1])),
        saddles=tuple(sorted(saddles, key=lambda p: p[1])),
        total=total,
        adjacent_critical=adjacent,
    )


# -- file formats -----------------------------------------------------------

def read_off(path) -> SimplicialSurface:
    """Read an ASCII OFF mesh (triangles only)."""
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    pos = 1
    nv, nf = int(tokens[pos]), int(tokens[pos + 1])
    pos += 3  # skip the (redundant) edge count
    coords = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    triangles = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise ValueError("only triangular faces are supported")
        triangles.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += 4
    return SimplicialSurface(nv, np.array(triangles), coordinates=coords[:, :2])


def read_field_csv(path, surface: SimplicialSurface) -> ScalarField:
    """Read a `vertex_id,value` CSV into a field on the given surface."""
    values = np.full(surface.n_vertices, np.nan)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:2]] != ["vertex_id", "value"]:
            raise ValueError("expected header 'vertex_id,value'")
        for row in reader:
            if row:
                values[int(row[0])] = float(row[1])
    if np.any(np.isnan(values)):
        raise ValueError("missing vertex values in field file")
    if surface.has_boundary and np.any(values[surface.boundary_vertex] != 0.0):
        raise ValueError("boundary vertices must carry the value 0")
    return ScalarField(surface, values)


def write_field_csv(path, fld: ScalarField):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex_id", "value"])
        for i, v in enumerate(fld.values):
            writer.writerow([i, repr(float(v))])
