"""Loop-erased walks, Wilson's spanning-tree sampler, and the Peano contour.

Loop erasure removes loops in chronological order: L_0 = x_0 and, writing
n_j for the *last* index at which the path visits L_j, L_{j+1} = x_{n_j + 1}.
Wilson's algorithm grows a spanning tree by successive loop-erased walks to
the current trunk; its law is uniform over spanning trees regardless of the
vertex order.  The contour of a wired spanning tree of a rectangle is a
space-filling path on the quarter-shifted half-integer lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..lattice import LatticeDomain, LatticePath, srw_path

__all__ = [
    "SpanningTree",
    "loop_erase",
    "sample_lerw",
    "wilson_ust",
    "tree_path",
    "wired_grid_graph",
    "contour_cycle",
    "ust_peano",
]


@dataclass
class SpanningTree:
    """Rooted spanning tree as a parent map (root maps to itself)."""

    parent: dict
    root: int

    def __post_init__(self):
        if self.parent.get(self.root) != self.root:
            raise ValueError("root must map to itself")
        # acyclicity and spanning: every vertex must reach the root
        for v in self.parent:
            seen = set()
            cur = v
            while cur != self.root:
                if cur in seen:
                    raise ValueError(f"cycle through vertex {cur}")
                seen.add(cur)
                cur = self.parent[cur]

    @property
    def vertices(self):
        return list(self.parent)

    def edges(self):
        return [(v, p) for v, p in self.parent.items() if v != p]


def _adjacency_of(graph) -> list:
    if isinstance(graph, LatticeDomain):
        return graph.adjacency
    return list(graph)


def loop_erase(path: LatticePath) -> LatticePath:
    """Chronological loop erasure; output is a simple subsequence of the
    input with the same endpoints, and the operation is idempotent."""
    verts = path.vertices
    if not verts:
        raise ValueError("cannot loop-erase an empty path")
    last = {}
    for i, v in enumerate(verts):
        last[v] = i
    out = [verts[0]]
    n = last[verts[0]]
    m = len(verts) - 1
    while n < m:
        nxt = verts[n + 1]
        out.append(nxt)
        n = last[nxt]
    return LatticePath(vertices=out)


def sample_lerw(domain: LatticeDomain, start: int, absorbing: Optional[set],
                rng: np.random.Generator, condition_endpoint: Optional[int] = None,
                reversed_output: bool = False, rejection_cap: int = 10 ** 6) -> LatticePath:
    """Loop-erased exit walk, optionally conditioned on its exit vertex.

    Conditioning is by rejection on the walk's exit vertex (which loop
    erasure preserves); `reversed_output` indexes the path backwards so it
    starts on the absorbing set.
    """
    if absorbing is None:
        absorbing = set(domain.boundary)
    for _ in range(rejection_cap):
        walk = srw_path(domain, start, absorbing, rng)
        if condition_endpoint is None or walk.end == condition_endpoint:
            le = loop_erase(walk)
            if reversed_output:
                return LatticePath(vertices=list(reversed(le.vertices)))
            return le
    raise RuntimeError(
        f"rejection sampling failed to hit endpoint {condition_endpoint} "
        f"within {rejection_cap} attempts")


def wilson_ust(graph, vertex_order: Sequence[int], rng: np.random.Generator,
               root: Optional[int] = None) -> SpanningTree:
    """Wilson's algorithm on a connected graph (adjacency lists or domain).

    The trunk starts at `root` (default: first vertex of the order); each
    remaining vertex launches a walk run to the trunk whose loop erasure is
    grafted on.  The resulting law is the uniform spanning tree measure.
    """
    adjacency = _adjacency_of(graph)
    order = list(vertex_order)
    if root is None:
        root = order[0]
    in_tree = [False] * len(adjacency)
    in_tree[root] = True
    parent = {root: root}
    for v0 in order:
        if in_tree[v0]:
            continue
        # random walk from v0 until it meets the trunk
        path = [v0]
        cur = v0
        while not in_tree[cur]:
            nb = adjacency[cur]
            cur = nb[int(rng.random() * len(nb))]
            path.append(cur)
        le = loop_erase(LatticePath(vertices=path))
        for a, b in zip(le.vertices, le.vertices[1:]):
            parent[a] = b
            in_tree[a] = True
    return SpanningTree(parent=parent, root=root)


def tree_path(tree: SpanningTree, a: int, b: int) -> LatticePath:
    """The unique path between two vertices of a spanning tree."""
    up_a = [a]
    cur = a
    while cur != tree.root:
        cur = tree.parent[cur]
        up_a.append(cur)
    pos = {v: i for i, v in enumerate(up_a)}
    up_b = [b]
    cur = b
    while cur not in pos:
        cur = tree.parent[cur]
        up_b.append(cur)
    meet = pos[cur]
    return LatticePath(vertices=up_a[:meet + 1] + list(reversed(up_b[:-1])))


# ---------------------------------------------------------------------------
# wired rectangle and its Peano contour
# ---------------------------------------------------------------------------


def wired_grid_graph(width: int, height: int):
    """Grid graph on [0,w) x [0,h) with the bottom row contracted to a root.

    The bottom side is the wired arc: all its vertices are identified into
    the root, so sampled trees are uniform over spanning trees of the
    rectangle that contain the bottom side.  Vertices (x, y) with y >= 1 are
    indexed x + (y-1)*width; the root has the last index.  Returns
    (adjacency, root, coords) with coords[v] = (x, y) and coords[root] =
    None.
    """
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    n_upper = width * (height - 1)
    root = n_upper
    adjacency = [[] for _ in range(n_upper + 1)]
    coords = {}
    for y in range(1, height):
        for x in range(width):
            v = x + (y - 1) * width
            coords[v] = (x, y)
            if x + 1 < width:
                adjacency[v].append(v + 1)
                adjacency[v + 1].append(v)
            if y + 1 < height:
                adjacency[v].append(v + width)
                adjacency[v + width].append(v)
    for x in range(width):
        if height > 1:
            adjacency[x].append(root)
            adjacency[root].append(x)
    coords[root] = None
    return adjacency, root, coords


def _norm_edge(a, b):
    return (a, b) if a <= b else (b, a)


def _wall_edges(tree: SpanningTree, coords, width: int):
    """Physical wall segments of the wired tree drawing.

    Edges to the contracted root vanish (their child already sits on the
    wired arc); the wired arc itself is drawn as the bottom-row chain, so
    the drawing is a spanning tree of the rectangle that contains the
    bottom side.
    """
    walls = set()
    for v, p in tree.edges():
        cv = coords[v]
        if coords[p] is None:
            # edge into the contracted wired row attaches straight down
            walls.add(_norm_edge(cv, (cv[0], 0)))
        else:
            walls.add(_norm_edge(cv, coords[p]))
    for x in range(width - 1):
        walls.add(_norm_edge((x, 0), (x + 1, 0)))
    return walls


def contour_cycle(walls: set, primal_vertices: set) -> list:
    """Closed contour around a set of wall edges, on the quarter lattice.

    Fine vertices are the four quadrant points around each primal vertex,
    stored in quarter coordinates (4x+-1, 4y+-1).  A fine edge may cross a
    primal edge iff that edge is *not* a wall, and may cross a dual edge iff
    its primal partner *is* a wall; edges leaving the fine-vertex set are
    forbidden.  For a tree wall-set, every fine vertex has exactly two
    permitted edges, so the permitted graph is a single Hamiltonian cycle,
    which is returned as a list of quarter-coordinate pairs.
    """
    fine = set()
    for (x, y) in primal_vertices:
        for sx in (-1, 1):
            for sy in (-1, 1):
                fine.add((4 * x + sx, 4 * y + sy))

    def permitted(f, g):
        if g not in fine:
            return False
        mx, my = (f[0] + g[0]) // 2, (f[1] + g[1]) // 2
        if mx % 4 == 0:       # crossing a vertical primal edge
            e = _norm_edge((mx // 4, (my - 1) // 4), (mx // 4, (my - 1) // 4 + 1))
            return e not in walls
        if my % 4 == 0:       # crossing a horizontal primal edge
            e = _norm_edge(((mx - 1) // 4, my // 4), ((mx - 1) // 4 + 1, my // 4))
            return e not in walls
        if mx % 4 == 2:       # crossing a dual edge; partner is horizontal
            y0 = round(my / 4.0)
            e = _norm_edge(((mx - 2) // 4, y0), ((mx - 2) // 4 + 1, y0))
            return e in walls
        # my % 4 == 2: partner is vertical
        x0 = round(mx / 4.0)
        e = _norm_edge((x0, (my - 2) // 4), (x0, (my - 2) // 4 + 1))
        return e in walls

    moves = ((2, 0), (-2, 0), (0, 2), (0, -2))
    # verify the degree-2 property while building the adjacency
    nbrs = {}
    for f in fine:
        out = [(f[0] + dx, f[1] + dy) for dx, dy in moves
               if permitted(f, (f[0] + dx, f[1] + dy))]
        if len(out) != 2:
            raise ValueError(f"malformed wall set: fine vertex {f} has "
                             f"{len(out)} permitted edges")
    for f in fine:
        nbrs[f] = [(f[0] + dx, f[1] + dy) for dx, dy in moves
                   if permitted(f, (f[0] + dx, f[1] + dy))]

    start = min(fine)
    cycle = [start]
    prev = None
    cur = start
    while True:
        a, b = nbrs[cur]
        nxt = b if a == prev else a
        if nxt == start:
            break
        cycle.append(nxt)
        prev, cur = cur, nxt
    if len(cycle) != len(fine):
        raise ValueError("wall set does not produce a single space-filling cycle")
    return cycle


def ust_peano(tree: SpanningTree, coords, width: int, height: int) -> list:
    """Space-filling contour of a wired-rectangle spanning tree.

    The tree drawing contains the wired bottom side; its closed contour is a
    single cycle through all 4*w*h quarter-lattice vertices around the
    rectangle's vertices.  The straight run underneath the wired side (the
    2*w vertices on the quarter-row y = -1/4, which sit outside the explored
    region) is cut out, leaving the space-filling path between the two ends
    of the wired arc.  Returns the path as quarter-coordinate pairs, which
    visits each of the remaining 4*w*h - 2*w fine vertices exactly once.
    """
    walls = _wall_edges(tree, coords, width)
    primal = {(x, y) for x in range(width) for y in range(height)}
    cycle = contour_cycle(walls, primal)
    keep = [f[1] != -1 for f in cycle]
    if all(keep) or not any(keep):
        raise ValueError("contour never runs under the wired side; wiring malformed")
    n = len(cycle)
    # rotate so position 0 is the first kept vertex after the dropped run
    s = next(i for i in range(n) if keep[i] and not keep[i - 1])
    cycle = cycle[s:] + cycle[:s]
    keep = keep[s:] + keep[:s]
    first_bad = keep.index(False)
    if any(keep[first_bad:]):
        raise ValueError("wired-side stretch is not contiguous; wiring malformed")
    return cycle[:first_bad]
