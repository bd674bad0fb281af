"""Finite lattice domains, random walks, and exact Green-function algebra.

Domains are built on the square lattice (delta Z)^2 or the triangular lattice
in axial coordinates (p, q) embedded as delta*(p + q/2, q*sqrt(3)/2).  A
vertex is interior iff its plane embedding lies strictly inside the continuum
shape; the absorbing boundary consists of the exterior neighbors of interior
vertices.  Green matrices and discrete Dirichlet problems are solved exactly
(sparse direct factorization), which makes small domains usable as oracles
for walk-based estimators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

__all__ = [
    "LatticeDomain",
    "LatticePath",
    "build_domain",
    "srw_path",
    "green_matrix",
    "green_diagonal",
    "harmonic_solve",
    "domain_to_json",
]

SQUARE_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))
TRIANGULAR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


def embed(kind: str, p: int, q: int, mesh: float = 1.0) -> complex:
    """Plane embedding of a lattice coordinate."""
    if kind == "square":
        return complex(p * mesh, q * mesh)
    if kind == "triangular":
        return complex(mesh * (p + 0.5 * q), mesh * q * math.sqrt(3.0) / 2.0)
    raise ValueError(f"unknown lattice kind {kind!r}")


@dataclass
class LatticeDomain:
    """A finite lattice graph with marked absorbing boundary.

    vertices: list of (p, q) integer coordinates, interior first then
    boundary; `interior` and `boundary` are index lists into it.  Adjacency
    is symmetric and restricted to the vertex set.
    """

    kind: str
    mesh: float
    vertices: list
    interior: list
    boundary: list
    adjacency: list
    index: dict = field(repr=False, default_factory=dict)
    arcs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {v: i for i, v in enumerate(self.vertices)}

    @property
    def n(self) -> int:
        return len(self.vertices)

    def position(self, i: int) -> complex:
        p, q = self.vertices[i]
        return embed(self.kind, p, q, self.mesh)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def steps(self):
        return SQUARE_STEPS if self.kind == "square" else TRIANGULAR_STEPS


@dataclass
class LatticePath:
    """Ordered vertex-index sequence with consecutive vertices adjacent."""

    vertices: list

    def __len__(self):
        return len(self.vertices)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]


def _shape_predicate(shape: str, **kw) -> Callable[[complex], bool]:
    if shape == "disc":
        r = kw.get("radius", 1.0)
        c = kw.get("center", 0j)
        return lambda z: abs(z - c) < r
    if shape == "square":
        side = kw.get("side", 1.0)
        return lambda z: 0.0 < z.real < side and 0.0 < z.imag < side
    if shape == "triangle":
        # equilateral triangle with base [0, side] on the real axis
        side = kw.get("side", 1.0)
        h = side * math.sqrt(3.0) / 2.0

        def inside(z):
            if not 0.0 < z.imag < h:
                return False
            half = side / 2.0
            slope = z.imag / math.sqrt(3.0)
            return slope < z.real < side - slope

        return inside
    if shape == "annulus":
        r0 = kw.get("inner", 0.25)
        r1 = kw.get("outer", 1.0)
        return lambda z: r0 < abs(z) < r1
    raise ValueError(f"unknown shape {shape!r}")


def build_domain(shape: str, mesh: float, kind: str = "square", **shape_params) -> LatticeDomain:
    """Grid approximation of a continuum shape.

    Interior = lattice vertices strictly inside the shape; absorbing
    boundary = exterior lattice neighbors of interior vertices.  Raises if
    the interior is empty.
    """
    if mesh <= 0.0:
        raise ValueError(f"mesh must be positive, got {mesh}")
    pred = _shape_predicate(shape, **shape_params)
    steps = SQUARE_STEPS if kind == "square" else TRIANGULAR_STEPS

    # bounding box scan in lattice coordinates
    extent = shape_params.get("outer", None) or shape_params.get("radius", None) \
        or shape_params.get("side", 2.0)
    extent = max(2.0, float(extent) + shape_params.get("center", 0j).__abs__() if
                 isinstance(shape_params.get("center", 0j), complex) else float(extent))
    bound = int(math.ceil(2.0 * extent / mesh)) + 2
    interior_set = set()
    for p in range(-bound, bound + 1):
        for q in range(-bound, bound + 1):
            if pred(embed(kind, p, q, mesh)):
                interior_set.add((p, q))
    if not interior_set:
        raise ValueError(f"empty interior for shape={shape!r} at mesh={mesh}")

    boundary_set = set()
    for (p, q) in interior_set:
        for dp, dq in steps:
            w = (p + dp, q + dq)
            if w not in interior_set:
                boundary_set.add(w)

    vertices = sorted(interior_set) + sorted(boundary_set)
    index = {v: i for i, v in enumerate(vertices)}
    interior = [index[v] for v in sorted(interior_set)]
    boundary = [index[v] for v in sorted(boundary_set)]
    adjacency = []
    for v in vertices:
        nb = []
        for dp, dq in steps:
            w = (v[0] + dp, v[1] + dq)
            if w in index:
                nb.append(index[w])
        adjacency.append(nb)
    return LatticeDomain(kind=kind, mesh=mesh, vertices=vertices,
                         interior=interior, boundary=boundary,
                         adjacency=adjacency, index=index)


def srw_path(domain: LatticeDomain, start: int, absorbing: Optional[set],
             rng: np.random.Generator, step_cap: int = 10 ** 9) -> LatticePath:
    """Simple random walk from `start` stopped on first entry to `absorbing`.

    Steps are uniform over the graph neighbors of the current vertex (for
    grid domains the interior neighborhood is the full lattice one); the
    returned path includes both endpoints.
    """
    if absorbing is None:
        absorbing = set(domain.boundary)
    if start in absorbing:
        return LatticePath(vertices=[start])
    adjacency = domain.adjacency
    path = [start]
    cur = start
    absorbed = False
    block = 1024
    for _ in range(0, step_cap, block):
        draws = rng.random(size=block)
        for x in draws:
            nb = adjacency[cur]
            cur = nb[int(x * len(nb))]
            path.append(cur)
            if cur in absorbing:
                absorbed = True
                break
        if absorbed:
            break
    else:
        raise RuntimeError(f"walk exceeded step cap {step_cap}")
    if not absorbed:
        raise RuntimeError(f"walk exceeded step cap {step_cap}")
    return LatticePath(vertices=path)


def _transition_blocks(domain: LatticeDomain, absorbing: set):
    """Sparse free-to-free and free-to-absorbing walk blocks (p = 1/deg)."""
    free = [i for i in range(domain.n) if i not in absorbing]
    fpos = {v: k for k, v in enumerate(free)}
    rows_i, cols_i, vals_i = [], [], []
    rows_b, cols_b, vals_b = [], [], []
    a_list = sorted(absorbing)
    apos = {v: k for k, v in enumerate(a_list)}
    for k, v in enumerate(free):
        deg = len(domain.adjacency[v])
        if deg == 0:
            raise ValueError(f"free vertex {v} has no neighbors")
        for w in domain.adjacency[v]:
            if w in absorbing:
                rows_b.append(k)
                cols_b.append(apos[w])
                vals_b.append(1.0 / deg)
            else:
                rows_i.append(k)
                cols_i.append(fpos[w])
                vals_i.append(1.0 / deg)
    n_f, n_a = len(free), len(a_list)
    P_ii = sparse.csr_matrix((vals_i, (rows_i, cols_i)), shape=(n_f, n_f))
    P_ia = sparse.csr_matrix((vals_b, (rows_b, cols_b)), shape=(n_f, n_a))
    return free, a_list, P_ii, P_ia


def green_matrix(domain: LatticeDomain, absorbing: Optional[set] = None) -> tuple:
    """Expected visit counts G(x, y) for the walk killed on `absorbing`.

    Returns (free_vertices, G) with G[j, k] the expected number of visits to
    free vertex k starting from free vertex j (counting the start).  Raises
    if some free vertex cannot reach the absorbing set.
    """
    if absorbing is None:
        absorbing = set(domain.boundary)
    if not absorbing:
        raise ValueError("absorbing set must be non-empty")
    free, _a_list, P_ii, _P_ia = _transition_blocks(domain, absorbing)
    n = len(free)
    if n == 0:
        return [], np.zeros((0, 0))
    eye = sparse.identity(n, format="csc")
    try:
        G = spsolve(eye - P_ii.tocsc(), np.eye(n))
    except Exception as exc:  # singular system: disconnected component
        raise ValueError(f"free region not connected to absorbing set: {exc}")
    G = np.atleast_2d(np.asarray(G))
    if not np.all(np.isfinite(G)) or np.any(G < -1e-9):
        raise ValueError("free region not connected to absorbing set")
    return free, G


def green_diagonal(domain: LatticeDomain, x: int, absorbing: set) -> float:
    """G(x, x): expected visits to x before hitting `absorbing`, from x."""
    if x in absorbing:
        return 0.0
    free, G = green_matrix(domain, absorbing)
    j = free.index(x)
    return float(G[j, j])


def harmonic_solve(domain: LatticeDomain, boundary_values: dict,
                   absorbing: Optional[set] = None) -> dict:
    """Discrete Dirichlet problem: harmonic extension of boundary data.

    boundary_values maps every absorbing vertex index to its value; returns
    {vertex index: value} on the free vertices.  The maximum principle holds
    exactly for the discrete solution.
    """
    if absorbing is None:
        absorbing = set(domain.boundary)
    missing = absorbing - set(boundary_values)
    if missing:
        raise ValueError(f"boundary data missing on {len(missing)} vertices")
    free, a_list, P_ii, P_ia = _transition_blocks(domain, absorbing)
    g = np.array([boundary_values[v] for v in a_list], dtype=float)
    rhs = P_ia @ g
    n = len(free)
    if n == 0:
        return {}
    u = spsolve((sparse.identity(n) - P_ii).tocsc(), rhs)
    u = np.atleast_1d(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("free region not connected to absorbing set")
    return {v: float(u[k]) for k, v in enumerate(free)}


def exit_distribution(domain: LatticeDomain, start: int,
                      absorbing: Optional[set] = None) -> dict:
    """Exact exit law of the walk from `start` over the absorbing set."""
    if absorbing is None:
        absorbing = set(domain.boundary)
    free, a_list, P_ii, P_ia = _transition_blocks(domain, absorbing)
    if start in absorbing:
        return {start: 1.0}
    j = free.index(start)
    n = len(free)
    e = np.zeros(n)
    e[j] = 1.0
    # row of (I - P_ii)^{-1} via transposed solve
    row = spsolve((sparse.identity(n) - P_ii).T.tocsc(), e)
    probs = np.asarray(row @ P_ia).ravel()
    return {v: float(probs[k]) for k, v in enumerate(a_list)}


def domain_to_json(domain: LatticeDomain) -> str:
    """Stable-key-order JSON dump of a domain."""
    payload = {
        "kind": domain.kind,
        "mesh": domain.mesh,
        "vertices": [{"p": p, "q": q,
                      "x": embed(domain.kind, p, q, domain.mesh).real,
                      "y": embed(domain.kind, p, q, domain.mesh).imag}
                     for (p, q) in domain.vertices],
        "adjacency": domain.adjacency,
        "interior": domain.interior,
        "boundary": domain.boundary,
        "arcs": {k: sorted(v) for k, v in domain.arcs.items()},
    }
    return json.dumps(payload, sort_keys=True)
