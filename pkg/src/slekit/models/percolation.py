"""Critical site percolation on the triangular lattice.

Sites live in axial coordinates (i, j) embedded as (i + j/2, j*sqrt(3)/2);
each site is one hexagonal cell of the dual honeycomb picture.  Neighbors
are (+-1,0), (0,+-1), (+1,-1), (-1,+1).  On a rhombus the left-right open
crossing and the top-bottom closed crossing are complementary events for
every configuration, which pins the crossing probability at exactly 1/2 when
p = 1/2.  The exploration interface walks on honeycomb vertices (triangular
faces), turning according to the colors of the three cells around each face.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

__all__ = [
    "TRI_STRUCTURE",
    "PercolationConfig",
    "percolation_sample",
    "crossing",
    "cardy_crossing_experiment",
    "arm_indicator",
    "arm_probability",
    "exploration_domain",
    "exploration_interface",
    "extract_interface",
    "dump_config_rle",
    "load_config_rle",
]

# 3x3 labeling structure for triangular adjacency in (i, j) array indexing
TRI_STRUCTURE = np.array([[0, 1, 1],
                          [1, 1, 1],
                          [1, 1, 0]], dtype=bool)

_NEIGHBOR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


@dataclass
class PercolationConfig:
    """One sampled site configuration.

    colors[i, j] is True for open (white) cells on the rhombus [0,n)x[0,m);
    `ring` optionally carries pre-colored boundary cells for exploration
    domains.
    """

    colors: np.ndarray
    p: float
    seed: Optional[int] = None
    ring: dict = field(default_factory=dict)


def percolation_sample(n: int, m: int, p: float, rng: np.random.Generator,
                       seed: Optional[int] = None) -> PercolationConfig:
    """i.i.d. site colors with open-probability p on an n x m rhombus."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    colors = rng.random((n, m)) < p
    return PercolationConfig(colors=colors, p=p, seed=seed)


def crossing(config: PercolationConfig, direction: str = "leftright",
             open_sites: bool = True) -> bool:
    """Does some same-color cluster touch both opposite sides of the rhombus?

    direction 'leftright' joins the i = 0 and i = n-1 columns; 'topbottom'
    joins the j = 0 and j = m-1 rows.  open_sites False tests closed cells.
    """
    colors = config.colors if open_sites else ~config.colors
    labels, _ = ndimage.label(colors, structure=TRI_STRUCTURE)
    if direction == "leftright":
        a, b = labels[0, :], labels[-1, :]
    elif direction == "topbottom":
        a, b = labels[:, 0], labels[:, -1]
    else:
        raise ValueError(f"unknown direction {direction!r}")
    sa = np.unique(a[a > 0])
    sb = np.unique(b[b > 0])
    return bool(np.intersect1d(sa, sb, assume_unique=True).size > 0)


# ---------------------------------------------------------------------------
# Cardy crossings in an equilateral triangle
# ---------------------------------------------------------------------------


def _triangle_mask(side: int) -> np.ndarray:
    """Cells (i, j) with i, j >= 0 and i + j <= side (an equilateral patch)."""
    n = side + 1
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return ii + jj <= side


def cardy_crossing_experiment(side: int, fraction: float, trials: int,
                              rng: np.random.Generator, p: float = 0.5) -> tuple:
    """Estimate the crossing probability matched by the linear formula.

    The lattice triangle has corner cells C = (0,0), A = (side,0),
    O = (0,side).  The target arc runs along side CA from C out to the cell
    at `fraction` of the way to A; the source arc is the full side AO
    (i + j = side).  Returns (hits, trials); hits/trials estimates the
    continuum crossing probability, which equals `fraction`.

    fraction = 0 gives an empty target arc, hence probability exactly 0.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    mask = _triangle_mask(side)
    n = side + 1
    # target arc: the nearest-integer number of cells covering `fraction`
    # of the side's n cells (ties round up), counted from the C corner
    arc_len = int(np.floor(fraction * n + 0.5))
    if fraction == 0.0 or arc_len == 0:
        return 0, trials
    hits = 0
    for _ in range(trials):
        colors = (rng.random((n, n)) < p) & mask
        labels, _ = ndimage.label(colors, structure=TRI_STRUCTURE)
        ii = np.arange(n)
        src = labels[ii, side - ii]          # side AO: i + j = side
        tgt = labels[:arc_len, 0]            # side CA prefix from C
        ls = np.unique(src[src > 0])
        lt = np.unique(tgt[tgt > 0])
        if np.intersect1d(ls, lt, assume_unique=True).size > 0:
            hits += 1
    return hits, trials


# ---------------------------------------------------------------------------
# arm events in an annulus
# ---------------------------------------------------------------------------


def _axial_radius(n: int) -> np.ndarray:
    """Euclidean distance of cell centers from the origin for [-n..n]^2."""
    idx = np.arange(-n, n + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    x = ii + 0.5 * jj
    y = jj * (np.sqrt(3.0) / 2.0)
    return np.sqrt(x * x + y * y)


def arm_indicator(colors: np.ndarray, radius: np.ndarray, r0: float, N: float,
                  n_arms: int = 1) -> bool:
    """At least n_arms distinct open clusters join the inner disc to radius N.

    `colors` and `radius` are aligned arrays over the [-N..N]^2 axial block;
    cells outside the annulus r0 <= r <= N do not participate.
    """
    annulus = (radius >= r0) & (radius <= N)
    labels, _ = ndimage.label(colors & annulus, structure=TRI_STRUCTURE)
    inner = (radius >= r0) & (radius < r0 + 1.0)
    outer = (radius > N - 1.0) & (radius <= N)
    li = np.unique(labels[inner & (labels > 0)])
    lo = np.unique(labels[outer & (labels > 0)])
    return np.intersect1d(li, lo, assume_unique=True).size >= n_arms


def arm_probability(N: int, trials: int, rng: np.random.Generator,
                    n_arms: int = 1, r0: float = 2.0, p: float = 0.5) -> tuple:
    """Monte Carlo estimate of the n-arm probability at outer radius N."""
    span = int(np.ceil(N)) + 1
    radius = _axial_radius(span)
    hits = 0
    for _ in range(trials):
        colors = rng.random(radius.shape) < p
        if arm_indicator(colors, radius, r0, float(N), n_arms):
            hits += 1
    return hits, trials


# ---------------------------------------------------------------------------
# exploration interface
# ---------------------------------------------------------------------------
#
# Faces of the triangular lattice are the honeycomb vertices.  An UP face
# (i, j) has corner cells {(i,j), (i+1,j), (i,j+1)}; a DOWN face (i, j) has
# {(i+1,j), (i,j+1), (i+1,j+1)}.  Crossing from face to face passes between
# the two shared cells, and the interface keeps black cells on one fixed
# side of its motion.


@dataclass
class ExplorationDomain:
    """Rhombus of interior cells with a pre-colored two-arc boundary ring.

    The ring cycle runs clockwise in the embedding: bottom row left-to-right,
    right column upward, top row right-to-left, left column downward.  Cells
    from `black_arc` are colored black (closed), `white_arc` white (open).
    The junction edges carry the start (a) and end (b) of the interface.
    """

    n: int
    m: int
    black_arc: set
    white_arc: set
    a_junction: tuple   # (black cell, white cell) at the start
    b_junction: tuple   # (black cell, white cell) at the end


def exploration_domain(n: int, m: int) -> ExplorationDomain:
    """Standard two-arc rhombus: bottom+right ring black, top+left white."""
    if n < 2 or m < 2:
        raise ValueError("rhombus must be at least 2 x 2")
    black = [(i, -1) for i in range(0, n + 1)] + [(n, j) for j in range(0, m)]
    white = [(i, m) for i in range(-1, n)] + [(-1, j) for j in range(0, m)]
    return ExplorationDomain(
        n=n, m=m, black_arc=set(black), white_arc=set(white),
        a_junction=((0, -1), (-1, 0)),
        b_junction=((n, m - 1), (n - 1, m)))


_FACE_CORNERS = {
    "U": ((0, 0), (1, 0), (0, 1)),
    "D": ((1, 0), (0, 1), (1, 1)),
}


def _face_cells(face):
    kind, i, j = face
    return [(i + di, j + dj) for di, dj in _FACE_CORNERS[kind]]


def _face_through(c1, c2):
    """The two faces sharing the lattice edge {c1, c2}."""
    faces = []
    for kind in ("U", "D"):
        for di, dj in _FACE_CORNERS[kind]:
            i, j = c1[0] - di, c1[1] - dj
            cells = set((i + a, j + b) for a, b in _FACE_CORNERS[kind])
            if c2 in cells:
                faces.append((kind, i, j))
    # dedupe (each corner offset can rediscover the same face)
    out = []
    for f in faces:
        if f not in out:
            out.append(f)
    return out


@dataclass
class ExplorationPath:
    """Interface as a face (honeycomb-vertex) sequence with flank colors."""

    faces: list
    crossed_edges: list   # (black cell, white cell) per step
    revealed: dict        # cell -> color revealed by the myopic walk


def exploration_interface(domain: ExplorationDomain,
                          rng_cells: np.ndarray) -> ExplorationPath:
    """Trace the interface from the a-junction to the b-junction.

    `rng_cells` is an (n, m) array of uniforms.  Cell colors are revealed
    lazily (black iff uniform < 1/2) the first time the walk looks at the
    cell ahead of it, exactly like the myopic self-avoiding walk; a full
    configuration sampled from the same array couples the two constructions
    pathwise.  The face sequence starts at the boundary vertex next to the
    a-junction and ends at the one next to the b-junction, always keeping
    revealed black cells on one fixed side.
    """
    n, m = domain.n, domain.m
    known = {}
    for c in domain.black_arc:
        known[c] = True    # True = black
    for c in domain.white_arc:
        known[c] = False

    def color_of(cell):
        if cell in known:
            return known[cell]
        i, j = cell
        if not (0 <= i < n and 0 <= j < m):
            raise ValueError(f"walk reached unknown exterior cell {cell}")
        val = bool(rng_cells[i, j] < 0.5)
        known[cell] = val
        return val

    def third(face, pair):
        return next(c for c in _face_cells(face) if c not in pair)

    def inward(face):
        c = third(face, set(domain.a_junction))
        return 0 <= c[0] < n and 0 <= c[1] < m

    # start at the outward face of the a-edge (the boundary honeycomb vertex)
    cand = _face_through(*domain.a_junction)
    cur = next(f for f in cand if not inward(f))
    pair = domain.a_junction
    faces = [cur]
    crossed = []
    revealed = {}
    for _ in range(8 * (n + 2) * (m + 2)):
        nxt = next(f for f in _face_through(*pair) if f != cur)
        faces.append(nxt)
        crossed.append(pair)
        cur = nxt
        if pair == domain.b_junction:
            break
        ahead = third(cur, pair)
        col = color_of(ahead)
        if 0 <= ahead[0] < n and 0 <= ahead[1] < m:
            revealed[ahead] = col
        pair = (ahead, pair[1]) if col else (pair[0], ahead)
    else:
        raise RuntimeError("exploration walk exceeded its step budget")
    return ExplorationPath(faces=faces, crossed_edges=crossed, revealed=revealed)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def extract_interface(domain: ExplorationDomain, rng_cells: np.ndarray) -> set:
    """Interface edge set from the fully revealed configuration.

    Colors every cell, clusters same-color cells by union-find, and returns
    the set of lattice edges with the black cluster of the black arc on one
    side and the white cluster of the white arc on the other.  For a
    two-arc boundary this edge set is exactly the a -> b interface.
    """
    n, m = domain.n, domain.m
    color = {}
    for c in domain.black_arc:
        color[c] = True
    for c in domain.white_arc:
        color[c] = False
    for i in range(n):
        for j in range(m):
            color[(i, j)] = bool(rng_cells[i, j] < 0.5)
    uf = _UnionFind(color.keys())
    for c in color:
        i, j = c
        for di, dj in _NEIGHBOR_OFFSETS:
            w = (i + di, j + dj)
            if w in color and color[w] == color[c]:
                uf.union(c, w)
    b_root = uf.find(domain.a_junction[0])
    w_root = uf.find(domain.a_junction[1])
    edges = set()
    for c in color:
        if not color[c] or uf.find(c) != b_root:
            continue
        i, j = c
        for di, dj in _NEIGHBOR_OFFSETS:
            w = (i + di, j + dj)
            if w in color and not color[w] and uf.find(w) == w_root:
                edges.add((c, w))
    return edges


# ---------------------------------------------------------------------------
# configuration serialization
# ---------------------------------------------------------------------------


def dump_config_rle(config: PercolationConfig) -> str:
    """Run-length-encoded row-major bitmap with a JSON header.

    Runs alternate open/closed starting with the open count; the first run
    may be zero.
    """
    flat = config.colors.astype(bool).ravel()
    runs = []
    current = True
    count = 0
    for v in flat:
        if v == current:
            count += 1
        else:
            runs.append(count)
            current = v
            count = 1
    runs.append(count)
    return json.dumps({
        "height": int(config.colors.shape[1]),
        "p": config.p,
        "rle": runs,
        "seed": config.seed,
        "width": int(config.colors.shape[0]),
    }, sort_keys=True)


def load_config_rle(payload: str) -> PercolationConfig:
    obj = json.loads(payload)
    n, m = obj["width"], obj["height"]
    flat = np.empty(n * m, dtype=bool)
    pos = 0
    current = True
    for run in obj["rle"]:
        flat[pos:pos + run] = current
        pos += run
        current = not current
    if pos != n * m:
        raise ValueError("run lengths do not cover the bitmap")
    return PercolationConfig(colors=flat.reshape(n, m), p=obj["p"], seed=obj["seed"])
