"""Reflected walks on the triangular lattice and half-plane Brownian excursions.

The wedge walk lives on {m + m' w : m, m' >= 0} with w = exp(i pi/3).  In the
interior it is plain simple random walk (1/6 to each neighbor); on the two
boundary rays it gets an outward bias of 1/3 along the ray (the discrete
version of oblique reflection at 120 degrees from the boundary), and from the
origin it moves to 1 or w with probability 1/2.  Its hitting distribution on
the far segment {m + m' = N} is exactly uniform.

Brownian excursions are W = X + iY with X a standard Brownian motion and Y a
three-dimensional Bessel process; Y is stepped exactly as the modulus of a
3-d Brownian increment, which keeps it positive pathwise.
"""

from __future__ import annotations

import math
from typing import Optional

import numba
import numpy as np

from ..seeds import child_rng, child_seed

__all__ = [
    "wedge_reflected_walk",
    "wedge_hitting_counts",
    "wedge_exact_hitting_law",
    "halfplane_reflected_step_rules",
    "wedge_to_halfplane",
    "sample_brownian_excursion",
    "excursion_avoids_hull",
    "excursion_avoid_batch",
    "excursion_level_crossing_batch",
    "cylinder_nondisconnection_batch",
]

_INTERIOR_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


def halfplane_reflected_step_rules(state: tuple) -> dict:
    """Transition rule of the wedge walk at a given state (m, m').

    Returns {move: probability} with moves in axial coordinates.  Interior
    states are plain simple random walk; the boundary rays carry the 1/3
    outward bias; the origin splits evenly between its two rays.
    """
    m, mp = state
    if m < 0 or mp < 0:
        raise ValueError(f"state {state} outside the wedge")
    if m == 0 and mp == 0:
        return {(1, 0): 0.5, (0, 1): 0.5}
    if mp == 0:
        return {(1, 0): 1.0 / 3.0, (-1, 0): 1.0 / 6.0, (0, 1): 1.0 / 6.0,
                (-1, 1): 1.0 / 6.0, (0, 0): 1.0 / 6.0}
    if m == 0:
        return {(0, 1): 1.0 / 3.0, (1, 0): 1.0 / 6.0, (1, -1): 1.0 / 6.0,
                (0, -1): 1.0 / 6.0, (0, 0): 1.0 / 6.0}
    return {mv: 1.0 / 6.0 for mv in _INTERIOR_MOVES}


def wedge_reflected_walk(N: int, rng: np.random.Generator) -> int:
    """Run the wedge walk from the origin to the segment m + m' = N.

    Returns the hit index m' in {0, ..., N}; the law is uniform.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    m, mp = 0, 0
    while m + mp < N:
        u = rng.random()
        if m == 0 and mp == 0:
            if u < 0.5:
                m = 1
            else:
                mp = 1
        elif mp == 0:
            if u < 2.0 / 6.0:
                m += 1
            elif u < 3.0 / 6.0:
                m -= 1
            elif u < 4.0 / 6.0:
                mp = 1
            elif u < 5.0 / 6.0:
                m -= 1
                mp = 1
            # else stay
        elif m == 0:
            if u < 2.0 / 6.0:
                mp += 1
            elif u < 3.0 / 6.0:
                m = 1
            elif u < 4.0 / 6.0:
                m = 1
                mp -= 1
            elif u < 5.0 / 6.0:
                mp -= 1
            # else stay
        else:
            k = int(u * 6.0)
            dm, dmp = _INTERIOR_MOVES[k]
            m += dm
            mp += dmp
    return mp


def wedge_hitting_counts(N: int, walks: int, master_seed: int) -> np.ndarray:
    """Hitting histogram over the N+1 far-segment points (vectorized).

    Walks advance in lockstep; per-walk randomness comes from one stream
    seeded by the master seed (runs single-threaded, so the result is a
    deterministic function of the seed).
    """
    rng = child_rng(master_seed, 0)
    m = np.zeros(walks, dtype=np.int64)
    mp = np.zeros(walks, dtype=np.int64)
    counts = np.zeros(N + 1, dtype=np.int64)
    active = np.arange(walks)
    while active.size:
        u = rng.random(active.size)
        ma, mpa = m[active], mp[active]
        dm = np.zeros(active.size, dtype=np.int64)
        dmp = np.zeros(active.size, dtype=np.int64)
        origin = (ma == 0) & (mpa == 0)
        bottom = (mpa == 0) & ~origin
        left = (ma == 0) & ~origin
        interior = ~(origin | bottom | left)

        dm[origin] = (u[origin] < 0.5).astype(np.int64)
        dmp[origin] = 1 - dm[origin]

        ub = u[bottom]
        dm[bottom] = np.select(
            [ub < 2 / 6, ub < 3 / 6, ub < 4 / 6, ub < 5 / 6], [1, -1, 0, -1], 0)
        dmp[bottom] = np.select(
            [ub < 2 / 6, ub < 3 / 6, ub < 4 / 6, ub < 5 / 6], [0, 0, 1, 1], 0)

        ul = u[left]
        dmp[left] = np.select(
            [ul < 2 / 6, ul < 3 / 6, ul < 4 / 6, ul < 5 / 6], [1, 0, -1, -1], 0)
        dm[left] = np.select(
            [ul < 2 / 6, ul < 3 / 6, ul < 4 / 6, ul < 5 / 6], [0, 1, 1, 0], 0)

        ui = u[interior]
        k = np.minimum((ui * 6.0).astype(np.int64), 5)
        moves = np.array(_INTERIOR_MOVES, dtype=np.int64)
        dm[interior] = moves[k, 0]
        dmp[interior] = moves[k, 1]

        m[active] += dm
        mp[active] += dmp
        done = m[active] + mp[active] >= N
        if np.any(done):
            hits = mp[active[done]]
            np.add.at(counts, hits, 1)
            active = active[~done]
    return counts


def wedge_exact_hitting_law(N: int) -> np.ndarray:
    """Exact hitting distribution by linear solve of the transition system.

    States are (m, m') with m + m' < N; returns the (N+1)-vector of hitting
    probabilities of the far-segment points from the origin.
    """
    states = [(m, mp) for m in range(N) for mp in range(N - m)]
    pos = {s: i for i, s in enumerate(states)}
    n = len(states)
    A = np.eye(n)
    B = np.zeros((n, N + 1))
    for s, i in pos.items():
        for (dm, dmp), pr in halfplane_reflected_step_rules(s).items():
            t = (s[0] + dm, s[1] + dmp)
            if t[0] + t[1] >= N:
                B[i, t[1]] += pr
            else:
                A[i, pos[t]] -= pr
    probs = np.linalg.solve(A, B)
    return probs[pos[(0, 0)]]


def wedge_to_halfplane(m: int, mp: int) -> complex:
    """Continuum transport of a wedge point into the half-plane (cubing).

    The wedge {r e^(i t): 0 < t < pi/3} maps onto the upper half-plane by
    z -> z^3, so a relabeled wedge walk is the reflected half-plane walk.
    """
    w = complex(m + 0.5 * mp, mp * math.sqrt(3.0) / 2.0)
    return w ** 3


# ---------------------------------------------------------------------------
# Brownian excursion in the upper half-plane
# ---------------------------------------------------------------------------


def sample_brownian_excursion(horizon: float, dt: float,
                              rng: np.random.Generator,
                              max_steps: int = 50_000_000) -> np.ndarray:
    """Excursion path W = X + iY run until Im W reaches `horizon`.

    Y starts at the regularization sqrt(dt) and is stepped exactly as the
    modulus of a 3-d Brownian increment, so it stays positive pathwise.
    Returns the complex path array (fixed step dt).
    """
    if horizon <= 0 or dt <= 0:
        raise ValueError("horizon and dt must be positive")
    x, y = 0.0, math.sqrt(dt)
    out = [complex(x, y)]
    sq = math.sqrt(dt)
    block = 4096
    steps = 0
    while y < horizon:
        g = rng.standard_normal((block, 4))
        for g1, g2, g3, g4 in g:
            y = math.sqrt((y + sq * g1) ** 2 + dt * (g2 * g2 + g3 * g3))
            x += sq * g4
            out.append(complex(x, y))
            if y >= horizon:
                break
        steps += block
        if steps > max_steps:
            raise RuntimeError("excursion exceeded its step budget")
    return np.array(out)


def _segment_to_vertical_slit_dist(x0, y0, x1, y1, sx, h):
    """Distance from segment (x0,y0)-(x1,y1) to the vertical slit {sx} x [0,h].

    Vectorized over the path-segment coordinates.
    """
    # sample-free exact segment/segment distance for the special vertical case
    dx, dy = x1 - x0, y1 - y0
    # parameter of closest approach of the segment to the line x = sx
    denom = np.where(dx == 0.0, 1.0, dx)
    t_line = np.clip((sx - x0) / denom, 0.0, 1.0)
    # candidate points on the path segment
    cands = []
    for t in (np.zeros_like(t_line), np.ones_like(t_line), t_line):
        px = x0 + t * dx
        py = y0 + t * dy
        qy = np.clip(py, 0.0, h)
        cands.append(np.hypot(px - sx, py - qy))
    d = np.minimum.reduce(cands)
    # endpoints of the slit against the path segment
    for qy in (0.0, h):
        wx, wy = sx - x0, qy - y0
        tt = np.clip((wx * dx + wy * dy) / np.where(dx * dx + dy * dy == 0.0, 1.0,
                                                    dx * dx + dy * dy), 0.0, 1.0)
        d = np.minimum(d, np.hypot(x0 + tt * dx - sx, y0 + tt * dy - qy))
    # crossing detection: opposite sides of the slit line within its span
    s0, s1 = x0 - sx, x1 - sx
    crosses = (s0 * s1 < 0.0)
    ycross = np.where(dx == 0.0, y0, y0 + (sx - x0) / denom * dy)
    crossing = crosses & (ycross >= 0.0) & (ycross <= h)
    return np.where(crossing, 0.0, d)


def excursion_avoids_hull(path: np.ndarray, x0: float, h: float,
                          dt: float) -> bool:
    """Does the sampled excursion stay clear of the slit [x0, x0 + ih]?

    A path segment hits the hull when it crosses the slit or approaches it
    within sqrt(dt)/2 (matching the one-step spatial resolution).
    """
    xs, ys = path.real, path.imag
    d = _segment_to_vertical_slit_dist(xs[:-1], ys[:-1], xs[1:], ys[1:], x0, h)
    return bool(np.all(d > 0.5 * math.sqrt(dt)))


def _scalar_slit_dist(x0_, y0_, x1_, y1_, sx, h):
    """Scalar distance from path segment (x0,y0)-(x1,y1) to {sx} x [0,h]."""
    dx, dy = x1_ - x0_, y1_ - y0_
    s0, s1 = x0_ - sx, x1_ - sx
    if s0 * s1 < 0.0:
        ycross = y0_ + (sx - x0_) / dx * dy
        if 0.0 <= ycross <= h:
            return 0.0
    best = float("inf")
    ts = (0.0, 1.0)
    if dx != 0.0:
        ts = (0.0, 1.0, min(1.0, max(0.0, (sx - x0_) / dx)))
    for t in ts:
        px, py = x0_ + t * dx, y0_ + t * dy
        qy = min(h, max(0.0, py))
        d = math.hypot(px - sx, py - qy)
        if d < best:
            best = d
    seg2 = dx * dx + dy * dy
    if seg2 > 0.0:
        for qy in (0.0, h):
            t = min(1.0, max(0.0, ((sx - x0_) * dx + (qy - y0_) * dy) / seg2))
            d = math.hypot(x0_ + t * dx - sx, y0_ + t * dy - qy)
            if d < best:
                best = d
    return best


def excursion_avoid_batch(x0: float, h: float, trials: int, master_seed: int,
                          horizon: Optional[float] = None, dt: float = 1e-3) -> tuple:
    """Avoidance frequency of the slit [x0, x0+ih] over independent excursions.

    Far above the hull the time step is coarsened (quadratically in the
    height margin) and so is the hit resolution; the finite horizon makes
    the estimate biased slightly upward.  Returns (hits_avoided, trials).
    """
    if horizon is None:
        horizon = 50.0 * max(abs(x0), h)
    top = h * 1.5
    avoided = 0
    block = 4096
    for i in range(trials):
        rng = child_rng(master_seed, i)
        x, y = 0.0, math.sqrt(dt)
        ok = True
        alive = True
        while alive:
            g = rng.standard_normal((block, 4)).tolist()
            for g1, g2, g3, g4 in g:
                margin = y - top
                step = dt if margin <= 0.0 else max(dt, (margin / 4.0) ** 2)
                sq = math.sqrt(step)
                ny = math.sqrt((y + sq * g1) ** 2 + step * (g2 * g2 + g3 * g3))
                nx = x + sq * g4
                tol = 0.5 * sq
                near = min(y, ny) <= h + tol and not (
                    (x - x0) * (nx - x0) > 0.0
                    and min(abs(x - x0), abs(nx - x0)) > tol)
                if near:
                    d = _scalar_slit_dist(x, y, nx, ny, x0, h)
                    if d <= tol:
                        ok = False
                        alive = False
                        break
                x, y = nx, ny
                if y >= horizon:
                    alive = False
                    break
        if ok:
            avoided += 1
    return avoided, trials


def excursion_level_crossing_batch(r: float, R: float, trials: int,
                                   master_seed: int, dt: float = 1e-4) -> tuple:
    """P[planar BM from height r stays in the half-plane until height R].

    Only the imaginary part matters (gambler's ruin): the exact value is
    r/R.  Returns (successes, trials), vectorized across trials.
    """
    rng = child_rng(master_seed, 0)
    y = np.full(trials, float(r))
    alive = np.ones(trials, dtype=bool)
    won = np.zeros(trials, dtype=bool)
    sq = math.sqrt(dt)
    while np.any(alive):
        idx = np.flatnonzero(alive)
        y[idx] += sq * rng.standard_normal(idx.size)
        hit_top = y[idx] >= R
        hit_bot = y[idx] <= 0.0
        won[idx[hit_top]] = True
        alive[idx[hit_top | hit_bot]] = False
    return int(won.sum()), trials


# ---------------------------------------------------------------------------
# reflected walk on the boundary cylinder
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _cylinder_walk_kernel(width, height, seed):  # pragma: no cover
    """One reflected walk on the triangular cylinder; visited-set grid."""
    np.random.seed(seed)
    visited = np.zeros((width, height + 1), dtype=numba.boolean)
    # the reflection direction follows the *unwrapped* boundary coordinate
    # (the continuous argument of the disc process); only the visited set
    # lives on the cylinder
    m, mp = 0, 0
    visited[0, 0] = True
    moves = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))
    while mp < height:
        u = np.random.random()
        if mp == 0:
            onright = m > 0
            if m == 0:
                if u < 0.5:
                    dm, dmp = 1, 0
                else:
                    dm, dmp = -1, 0
            elif onright:
                if u < 2.0 / 6.0:
                    dm, dmp = 1, 0
                elif u < 3.0 / 6.0:
                    dm, dmp = -1, 0
                elif u < 4.0 / 6.0:
                    dm, dmp = 0, 1
                elif u < 5.0 / 6.0:
                    dm, dmp = -1, 1
                else:
                    dm, dmp = 0, 0
            else:
                if u < 2.0 / 6.0:
                    dm, dmp = -1, 0
                elif u < 3.0 / 6.0:
                    dm, dmp = 1, 0
                elif u < 4.0 / 6.0:
                    dm, dmp = 0, 1
                elif u < 5.0 / 6.0:
                    dm, dmp = 1, 1
                else:
                    dm, dmp = 0, 0
        else:
            k = int(u * 6.0)
            if k > 5:
                k = 5
            dm, dmp = moves[k]
        m = m + dm
        mp += dmp
        visited[m % width, mp] = True
    return visited


@numba.njit(cache=True)
def _cylinder_connected(visited, width, height):  # pragma: no cover
    """Flood fill through unvisited cells from the antipodal rim cell."""
    far = width // 2
    if visited[far, 0]:
        return False
    stack_m = np.empty(width * (height + 1), dtype=np.int64)
    stack_p = np.empty(width * (height + 1), dtype=np.int64)
    seen = np.zeros((width, height + 1), dtype=numba.boolean)
    top = 0
    stack_m[0] = far
    stack_p[0] = 0
    seen[far, 0] = True
    moves = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))
    while top >= 0:
        m = stack_m[top]
        mp = stack_p[top]
        top -= 1
        if mp == height:
            return True
        for dm, dmp in moves:
            nm = (m + dm) % width
            np_ = mp + dmp
            if 0 <= np_ <= height and not seen[nm, np_] and not visited[nm, np_]:
                seen[nm, np_] = True
                top += 1
                stack_m[top] = nm
                stack_p[top] = np_
    return False


def cylinder_nondisconnection_batch(width: int, height: int, trials: int,
                                    master_seed: int) -> tuple:
    """Reflected walk on a triangular cylinder; non-disconnection frequency.

    The walk starts at angle 0 on the bottom rim; the rim pushes it away
    from its start (bias +1 for angles in (0, width/2], -1 beyond), the
    discrete version of oblique reflection away from the starting point.
    It stops on reaching `height`.  The event tested is that the visited
    set does not disconnect the antipodal rim cell (width/2, 0) from the
    top row.  Returns (non_disconnected, trials).
    """
    hits = 0
    for i in range(trials):
        seed = child_seed(master_seed, i) & 0x7FFFFFFF
        visited = _cylinder_walk_kernel(width, height, seed)
        if _cylinder_connected(visited, width, height):
            hits += 1
    return hits, trials
