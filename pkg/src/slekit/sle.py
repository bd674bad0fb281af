"""Random SLE sampling, Bessel swallowing, the radial angle diffusion, and
the hull-removal map evolution.

The chordal driving is sqrt(kappa) times a Brownian motion.  Boundary points
x flow as (g_t(x) - W_t)/sqrt(kappa), a Bessel process of dimension
1 + 4/kappa, so they are swallowed iff kappa > 4.  On the radial side the
angle gap Y_t between a boundary point and the driving diffuses as
dY = sqrt(kappa) dB + cot(Y/2) dt, and the weighted survival functionals
E[1_{survive} |g'|^b sin(Y_t/2)^q] are exact exponentials, which gives this
module its sharpest Monte Carlo oracles.

The removal-map state h_t (the normalized map re-removing a fixed hull A
from the picture in which the SLE has already been unzipped) evolves by

    dh/dt = 2 h'(W)^2 / (h - h(W)) - 2 h'(z) / (z - W),

and for kappa = 8/3 the process h'(W_t)^(5/8) is a local martingale, the
source of the hull-avoidance law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .conformal import SlitParams, slit_capacity, vertical_slit_map
from .formulas import exponent_table
from .loewner import DrivingPath, chordal_tips
from .montecarlo import EstimateRecord
from .seeds import child_rng, child_seed

__all__ = [
    "SleParams",
    "sample_driving",
    "bessel_swallow_indicator",
    "bessel_swallow_batch",
    "side_hit_experiment",
    "side_hit_batch",
    "radial_diffusion_ensemble",
    "radial_boundary_survival",
    "radial_martingale_check",
    "RemovalMapState",
    "evolve_removal_map",
    "restriction_avoidance_experiment",
    "transience_diagnostic",
    "sle_tip_moduli",
]




@dataclass(frozen=True)
class SleParams:
    """Sampling parameters: kappa, capacity horizon, step, master seed."""

    kappa: float
    horizon: float = 1.0
    dt: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa >= 0.0):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa}")
        if self.dt <= 0 or self.horizon <= 0 or self.dt >= self.horizon:
            raise ValueError("need 0 < dt < horizon")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


def sample_driving(params: SleParams, kind: str = "chordal",
                   rng: Optional[np.random.Generator] = None) -> DrivingPath:
    """Driving path with Gaussian increments of variance kappa * dt.

    Deterministic given params.seed (a fresh generator is derived from it
    unless an explicit one is passed).
    """
    if rng is None:
        rng = child_rng(params.seed, 0)
    n = params.n_steps
    if params.kappa == 0.0:
        values = np.zeros(n + 1)
    else:
        inc = rng.standard_normal(n) * math.sqrt(params.kappa * params.dt)
        values = np.concatenate(([0.0], np.cumsum(inc)))
    times = np.arange(n + 1) * params.dt
    return DrivingPath(kind=kind, times=times, values=values)


# ---------------------------------------------------------------------------
# boundary swallowing (Bessel flow)
# ---------------------------------------------------------------------------


def bessel_swallow_indicator(x: float, params: SleParams,
                             rng: Optional[np.random.Generator] = None) -> bool:
    """Is the boundary point x swallowed by the capacity horizon?

    Euler-Maruyama for dX = dB + (2/kappa) dt / X from X_0 = x/sqrt(kappa),
    absorbed at 0.  The time variable is the driving Brownian motion's, so
    one unit of it is one unit of capacity time.
    """
    if x == 0.0:
        raise ValueError("x must be nonzero")
    if params.kappa <= 0.0:
        return False
    if rng is None:
        rng = child_rng(params.seed, 0)
    dt = params.dt
    sq = math.sqrt(dt)
    X = abs(x) / math.sqrt(params.kappa)
    drift = 2.0 / params.kappa
    for _ in range(params.n_steps):
        X = X + sq * rng.standard_normal() + drift * dt / X
        if X <= 0.0:
            return True
    return False


def bessel_swallow_batch(x: float, params: SleParams, trials: int,
                         time_block: int = 1024) -> tuple:
    """Swallowing frequency over independent runs; returns (swallowed, trials).

    Increments are drawn in per-(trial, time-block) rows from derived
    streams, so memory stays bounded and the counts are independent of the
    blocking.
    """
    if x == 0.0:
        raise ValueError("x must be nonzero")
    dt = params.dt
    sq = math.sqrt(dt)
    drift = 2.0 / params.kappa
    n = params.n_steps
    X = np.full(trials, abs(x) / math.sqrt(params.kappa))
    alive = np.ones(trials, dtype=bool)
    n_blocks = (n + time_block - 1) // time_block
    for b in range(n_blocks):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        steps = min(time_block, n - b * time_block)
        inc = np.empty((idx.size, steps))
        for j, i in enumerate(idx):
            inc[j] = child_rng(child_seed(params.seed, int(i)), b) \
                .standard_normal(steps)
        Xa = X[idx]
        dead = np.zeros(idx.size, dtype=bool)
        for k in range(steps):
            live = ~dead
            Xa[live] += sq * inc[live, k] + drift * dt / Xa[live]
            dead |= Xa <= 0.0
        X[idx] = Xa
        alive[idx[dead]] = False
    return int(np.count_nonzero(~alive)), trials


# ---------------------------------------------------------------------------
# side hitting (two-point boundary race)
# ---------------------------------------------------------------------------


def _real_flow_step(x: np.ndarray, w: np.ndarray, four_dt: float) -> np.ndarray:
    """Exact one-step chordal update for real boundary points."""
    u = x - w
    return w + np.copysign(np.sqrt(u * u + four_dt), u)


def side_hit_experiment(a: float, c: float, params: SleParams,
                        rng: Optional[np.random.Generator] = None) -> Optional[str]:
    """Which boundary ray is absorbed first: 'right' ([c, inf)) or 'left'?

    Flows both points under the sampled driving; swallowing is declared when
    the flowed point comes within 2 sqrt(dt) of the driving value.  Returns
    None when the horizon passes with neither swallowed (inconclusive).
    """
    if not (a < 0.0 < c):
        raise ValueError("need a < 0 < c")
    if params.kappa <= 4.0:
        raise ValueError("side hitting requires kappa > 4")
    if rng is None:
        rng = child_rng(params.seed, 0)
    dt = params.dt
    sq = math.sqrt(params.kappa * dt)
    tol = 2.0 * math.sqrt(dt)
    four_dt = 4.0 * dt
    w = 0.0
    xa, xc = float(a), float(c)
    for _ in range(params.n_steps):
        xa = w + math.copysign(math.sqrt((xa - w) ** 2 + four_dt), xa - w)
        xc = w + math.copysign(math.sqrt((xc - w) ** 2 + four_dt), xc - w)
        w += sq * rng.standard_normal()
        if abs(xc - w) <= tol:
            return "right"
        if abs(xa - w) <= tol:
            return "left"
    return None


def side_hit_batch(a: float, c: float, params: SleParams, trials: int,
                   band: float = 1e-5, s_horizon: float = 400.0) -> tuple:
    """(right_first, left_first, inconclusive) counts over independent runs.

    The race between the two flowed boundary points depends only on the
    cross-ratio Z = (W - A)/(C - A), which (after the natural time change)
    diffuses as dZ = sqrt(kappa) dB + 2 (1/Z - 1/(1 - Z)) dt on (0, 1) and
    is absorbed at the endpoints; Z -> 1 means [c, inf) is swallowed first.
    Unlike the raw flow, whose undecided probability decays only like a
    small power of the horizon, absorption on this clock has exponential
    tails.  Steps shrink quadratically near the endpoints so the absorption
    band can be taken tiny (the declaration bias is O(band^(1 - 4/kappa))).
    """
    if not (a < 0.0 < c):
        raise ValueError("need a < 0 < c")
    if params.kappa <= 4.0:
        raise ValueError("side hitting requires kappa > 4")
    z0 = -a / (c - a)
    dt0 = params.dt
    kappa = params.kappa
    z_ref = 0.1
    right = left = undecided = 0
    block = 4096
    for i in range(trials):
        rng = child_rng(params.seed, i)
        z = z0
        s = 0.0
        outcome = None
        while outcome is None and s < s_horizon:
            g = rng.standard_normal(block).tolist()
            for gk in g:
                edge = min(z, 1.0 - z)
                dt = dt0 * min(1.0, (edge / z_ref) ** 2)
                z = z + math.sqrt(kappa * dt) * gk \
                    + 2.0 * dt * (1.0 / z - 1.0 / (1.0 - z))
                s += dt
                if z <= band:
                    outcome = "left"
                    break
                if z >= 1.0 - band:
                    outcome = "right"
                    break
            if s >= s_horizon:
                break
        if outcome == "right":
            right += 1
        elif outcome == "left":
            left += 1
        else:
            undecided += 1
    return right, left, undecided


# ---------------------------------------------------------------------------
# radial angle diffusion
# ---------------------------------------------------------------------------


_EDGE_REF = 0.4
_BESSEL_BAND = 3e-4
_TWO_PI = 2.0 * math.pi


@numba.njit(cache=True)
def _diffusion_kernel(x, kappa, snap_times, dt0, seeds):  # pragma: no cover
    n_tr = seeds.size
    n_snap = snap_times.size
    alive_out = np.zeros((n_snap, n_tr), dtype=numba.boolean)
    y_out = np.zeros((n_snap, n_tr))
    i_out = np.zeros((n_snap, n_tr))
    q0 = 1.0 - 4.0 / kappa  # scale-function exponent of the boundary Bessel
    for i in range(n_tr):
        np.random.seed(seeds[i])
        y = x
        acc = 0.0
        t = 0.0
        alive = True
        for j in range(n_snap):
            t_snap = snap_times[j]
            while alive and t < t_snap - 1e-13:
                edge = y if y < _TWO_PI - y else _TWO_PI - y
                if edge <= _BESSEL_BAND:
                    # inside the band the drift is the pure Bessel 2/edge to
                    # relative accuracy edge^2/12; resolve the excursion by
                    # its exact scale function (elapsed time O(band^2) is
                    # negligible against dt0)
                    if np.random.random() < (edge / (2.0 * _BESSEL_BAND)) ** q0:
                        edge_new = 2.0 * _BESSEL_BAND
                        y = edge_new if y < math.pi else _TWO_PI - edge_new
                        continue
                    alive = False
                    break
                if edge >= _EDGE_REF:
                    dt = dt0
                else:
                    # quadratic shrinkage keeps the relative noise per step
                    # below ~10%, resolving every boundary scale
                    rel = edge / _EDGE_REF
                    dt = 0.25 * dt0 * rel * rel
                if t + dt > t_snap:
                    dt = t_snap - t
                g = np.random.standard_normal()
                noise = math.sqrt(kappa * dt) * g
                drift = dt / math.tan(0.5 * y)
                yp = y + drift + noise
                t += dt
                if yp <= 0.0 or yp >= _TWO_PI:
                    alive = False
                    break
                yn = y + 0.5 * (drift + dt / math.tan(0.5 * yp)) + noise
                if yn <= 0.0 or yn >= _TWO_PI:
                    alive = False
                    break
                # trapezoid + within-step variance correction for the
                # derivative integrand 1/sin^2(y/2)
                s_old = math.sin(0.5 * y)
                s_new = math.sin(0.5 * yn)
                ymid = 0.5 * (y + yn)
                smid = math.sin(0.5 * ymid)
                cmid = math.cos(0.5 * ymid)
                fpp = 0.5 * (1.0 + 2.0 * cmid * cmid) / smid ** 4
                acc += 0.5 * dt * (1.0 / s_old ** 2 + 1.0 / s_new ** 2) \
                    + (kappa * dt * dt / 12.0) * fpp
                y = yn
            alive_out[j, i] = alive
            y_out[j, i] = y
            i_out[j, i] = acc
    return alive_out, y_out, i_out


def radial_diffusion_ensemble(x: float, kappa: float, times, dt: float,
                              trials: int, master_seed: int) -> tuple:
    """Simulate the angle diffusion dY = sqrt(kappa) dB + cot(Y/2) dt.

    Returns (alive, Y, I) arrays of shape (len(times), trials): survival
    flags, angle values, and accumulations of the derivative integrand
    1/sin^2(Y/2) at each snapshot time.

    The drift uses a Heun predictor-corrector (weak second order for the
    additive noise); steps shrink quadratically within _EDGE_REF of the
    absorbing endpoints; below _BESSEL_BAND the excursion is settled by the
    exact Bessel scale function (die, or resurface at twice the band).
    Absorbed functionals would otherwise converge only like
    dt^(1 - delta/2) in the boundary Bessel dimension delta and never reach
    Monte Carlo accuracy.  Each path runs on its own derived seed.
    """
    if not 0.0 < x < 2.0 * math.pi:
        raise ValueError(f"x must lie in (0, 2 pi), got {x}")
    times = sorted(float(t) for t in times)
    seeds = np.array([child_seed(master_seed, i) & 0x7FFFFFFF
                      for i in range(trials)], dtype=np.uint32)
    alive, y, integ = _diffusion_kernel(float(x), float(kappa),
                                        np.array(times), float(dt), seeds)
    return np.asarray(alive, dtype=bool), y, integ


def radial_boundary_survival(x: float, b: float, t: float, params: SleParams,
                             trials: int) -> EstimateRecord:
    """Weighted survival E[1_{survive}(x, t) * |g_t'(e^(ix))|^b].

    The derivative weight is exp(-(b/2) * integral ds / sin^2(Y_s/2)); the
    decay rate in t is the derivative exponent lambda(kappa, b).
    """
    if params.kappa <= 4.0:
        raise ValueError("boundary survival requires kappa > 4")
    alive, y, integ = radial_diffusion_ensemble(
        x, params.kappa, [t], params.dt, trials, params.seed)
    w = np.where(alive[0], np.exp(-0.5 * b * integ[0]), 0.0)
    value = float(w.mean())
    stderr = float(w.std(ddof=1) / math.sqrt(trials))
    return EstimateRecord(name=f"radial_survival_b{b:g}", scale=t, value=value,
                          stderr=stderr, trials=trials, seed=params.seed)


def radial_martingale_check(x: float, t: float, kappa: float, trials: int,
                            master_seed: int = 0, b: float = 0.0,
                            dt: float = 5e-4) -> tuple:
    """Monte Carlo value of the exact survival martingale.

    Estimates E[1_{survive} |g'|^b sin(Y_t/2)^q] with q = q(kappa, b); the
    exact value is exp(-lambda(kappa, b) t) sin(x/2)^q.  Returns
    (estimate, stderr, exact).  At t = 0 no simulation is run.
    """
    if kappa <= 4.0:
        raise ValueError("the martingale identity requires kappa > 4")
    tab = exponent_table(kappa, b=b)
    q, lam = tab.q, tab.lam
    exact = math.exp(-lam * t) * math.sin(0.5 * x) ** q
    if t == 0.0:
        return math.sin(0.5 * x) ** q, 0.0, exact
    alive, y, integ = radial_diffusion_ensemble(
        x, kappa, [t], dt, trials, master_seed)
    stat = np.where(alive[0],
                    np.sin(0.5 * y[0]) ** q * np.exp(-0.5 * b * integ[0]),
                    0.0)
    return (float(stat.mean()),
            float(stat.std(ddof=1) / math.sqrt(trials)),
            exact)


# ---------------------------------------------------------------------------
# hull-removal map evolution
# ---------------------------------------------------------------------------


@dataclass
class RemovalMapState:
    """Trajectory of the removal map h_t and its derivatives at the driving.

    Arrays are sampled per step until the hull was approached (or the
    horizon ran out): capacity a(t) of hull-plus-trace, image driving
    w_tilde = h_t(W_t), deriv_at_w = the first derivative of h_t at W_t
    together with the second and third derivatives there.  `markers` holds
    the exactly-flowed polyline of the hull image at the final time.
    """

    times: np.ndarray
    a: np.ndarray
    w_tilde: np.ndarray
    deriv_at_w: np.ndarray
    second_at_w: np.ndarray
    third_at_w: np.ndarray
    markers: np.ndarray
    stopped_by_hull: bool
    dropped_points: int = 0

    @property
    def martingale(self) -> np.ndarray:
        return self.deriv_at_w ** 0.625


def _unzip_at(points, w):
    """Removal map of an arc polyline, evaluated with derivatives at w.

    The arc (base on the real axis, then points rising into the half-plane)
    is removed by composing one vertical micro-slit map per polyline point:
    at each stage the next point's image (x, y) defines the map
    z -> x + sqrt((z - x)^2 + y^2), which is applied to the remaining
    points and chained through the evaluation point together with its
    first three derivatives (all closed forms).  Returns
    (value, d1, d2, d3, capacity) of the composed normalized map at the
    real point w.  Exact for a straight vertical slit; error for curved
    arcs vanishes with the polyline resolution.
    """
    pts = np.array(points, dtype=complex)
    z = float(w)
    d1 = 1.0
    d2 = 0.0
    d3 = 0.0
    cap = 0.0
    for j in range(1, len(pts)):
        x, y = pts[j].real, pts[j].imag
        if y <= 1e-14:
            continue
        cap += 0.25 * y * y
        y2 = y * y
        # scalar real update of the evaluation point (branch by side)
        u = z - x
        s = math.sqrt(u * u + y2)
        sgn = 1.0 if u >= 0.0 else -1.0
        fz = x + sgn * s
        fp = u / (sgn * s)
        s3 = (sgn * s) ** 3
        fpp = y2 / s3
        fppp = -3.0 * y2 * u / (sgn * s) ** 5
        # chain rule for the first three derivatives
        d3 = fppp * d1 ** 3 + 3.0 * fpp * d1 * d2 + fp * d3
        d2 = fpp * d1 * d1 + fp * d2
        d1 = fp * d1
        z = fz
        # advance the remaining arc points
        tail = pts[j + 1:]
        if tail.size:
            ut = tail - x
            st = np.sqrt(ut * ut + y2)
            st = np.where(st.imag < 0.0, -st, st)
            pts[j + 1:] = x + st
    return z, d1, d2, d3, cap


def evolve_removal_map(driving: DrivingPath, hull: SlitParams,
                       n_markers: int = 60,
                       stop_distance: float = 0.25) -> RemovalMapState:
    """Evolve the removal map of `hull` along a chordal driving path.

    The hull is discretized into a marker polyline that is flowed exactly by
    the per-step elementary slit maps of the driving; at each step the
    removal map h_t of the flowed polyline, its first three derivatives at
    the driving position, and its capacity are recomputed by the micro-slit
    unzipping of `_unzip_at`.  Capacity is reported as
    a(t) = t + capacity(flowed hull image), which equals the capacity of
    hull-plus-trace; its per-step increments track deriv_at_w^2 dt.
    Evolution stops when the driving comes within `stop_distance` of the
    hull image or the derivative falls below a small floor (the hull is
    about to be hit); stopping early keeps optional-stopping diagnostics
    unbiased.
    """
    if driving.kind != "chordal":
        raise ValueError("driving must be chordal")
    if hull.angle != math.pi / 2:
        raise NotImplementedError("only vertical slit hulls are supported")
    if abs(hull.foot) < 1e-9:
        raise ValueError("hull must sit at positive distance from the origin")
    dt = driving.dt
    w_path = driving.values
    n = driving.n_steps
    four_dt = 4.0 * dt

    markers = hull.foot + 1j * hull.height * np.linspace(0.0, 1.0, n_markers)
    markers = markers.astype(complex)
    # a whisker of imaginary part keeps the branch of the real base point
    # flipping correctly through the vectorized slit steps
    markers[0] = complex(markers[0].real, 1e-12)

    times = []
    out_a = []
    out_wt = []
    out_c = []
    out_c2 = []
    out_c3 = []
    stopped = False
    for k in range(n + 1):
        w = w_path[k]
        if np.min(np.abs(markers - w)) < stop_distance:
            stopped = True
            break
        val, d1, d2, d3, cap = _unzip_at(markers, w)
        if d1 < 0.02:
            stopped = True
            break
        times.append(k * dt)
        out_a.append(k * dt + cap)
        out_wt.append(val)
        out_c.append(d1)
        out_c2.append(d2)
        out_c3.append(d3)
        if k == n:
            break
        u = markers - w
        s = np.sqrt(u * u + four_dt)
        s = np.where(s.imag < 0.0, -s, s)
        markers = w + s
    return RemovalMapState(
        times=np.array(times), a=np.array(out_a), w_tilde=np.array(out_wt),
        deriv_at_w=np.array(out_c), second_at_w=np.array(out_c2),
        third_at_w=np.array(out_c3), markers=markers, stopped_by_hull=stopped)


# ---------------------------------------------------------------------------
# hull avoidance for the restriction-invariant SLE
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _tip_from_history(ws, dts, n_used):  # pragma: no cover
    """Trace tip after n_used steps by reverse elementary composition."""
    zr = ws[n_used]
    zi = 0.0
    for j in range(n_used - 1, -1, -1):
        ur = zr - ws[j]
        ui = zi
        # u^2 - 4 dt, then the square root with Im >= 0 (sign of Re from u)
        cr = ur * ur - ui * ui - 4.0 * dts[j]
        ci = 2.0 * ur * ui
        r = math.sqrt(cr * cr + ci * ci)
        sr = math.sqrt(max(0.0, 0.5 * (r + cr)))
        si = math.sqrt(max(0.0, 0.5 * (r - cr)))
        if ci < 0.0 or (ci == 0.0 and ui == 0.0 and ur < 0.0 and cr >= 0.0):
            sr = -sr
        zr = ws[j] + sr
        zi = si
    return zr, zi


def _dist_to_slit(x, y, foot, height):
    if y <= 0.0:
        y = 0.0
    dy = 0.0 if 0.0 <= y <= height else min(abs(y), abs(y - height))
    if y < 0.0:
        dy = -y
    elif y > height:
        dy = y - height
    else:
        dy = 0.0
    return math.hypot(x - foot, dy)


def restriction_avoidance_experiment(hull: SlitParams, trials: int,
                                     master_seed: int, kappa: float = 8.0 / 3.0,
                                     dt: float = 1e-3,
                                     horizon_factor: float = 25.0) -> tuple:
    """Frequency with which the trace never touches the hull.

    A trace hits the hull when its tip comes within 2 sqrt(dt) of the slit
    segment.  Tips are expensive, so the hull is also tracked through the
    flow by an exactly-updated marker polyline, and the tip is only
    reconstructed (by reverse elementary composition over the stored
    driving history) when some marker image dips near the driving value --
    a necessary condition for a hit.  The flowed base point is a transient
    boundary Bessel process whose spurious dips are rejected by the
    physical distance check.  After the interaction window
    t = 2 (foot^2 + height^2) the step coarsens sixfold, and a trial is
    declared avoided when the unzipped map derivative at the driving
    exceeds 0.995 (upward bias below 0.005) or the capacity horizon
    `horizon_factor * (foot^2 + height^2)` runs out.  Returns
    (avoided, trials).
    """
    if hull.angle != math.pi / 2:
        raise NotImplementedError("only vertical slit hulls are supported")
    scale2 = hull.foot ** 2 + hull.height ** 2
    horizon = horizon_factor * scale2
    t_interact = 2.0 * scale2
    n_mark = 48
    base_markers = hull.foot + 1j * hull.height * np.linspace(0.0, 1.0, n_mark)
    base_markers = base_markers.astype(complex)
    base_markers[0] = complex(base_markers[0].real, 1e-12)
    n_cap = int(round(t_interact / dt)) + int(round(horizon / (6.0 * dt))) + 8

    avoided = 0
    for i in range(trials):
        rng = child_rng(master_seed, i)
        mk = base_markers.copy()
        ws = np.zeros(n_cap + 1)
        dts = np.zeros(n_cap)
        w = 0.0
        t = 0.0
        k = 0
        outcome = None
        check_countdown = 200
        cooldown = 0
        while outcome is None and t < horizon:
            step = dt if t < t_interact else 6.0 * dt
            u = mk - w
            s = np.sqrt(u * u + 4.0 * step)
            s = np.where(s.imag < 0.0, -s, s)
            mk = w + s
            dts[k] = step
            w += math.sqrt(kappa * step) * rng.standard_normal()
            k += 1
            ws[k] = w
            t += step
            tol = 2.0 * math.sqrt(step)
            cooldown -= 1
            if cooldown <= 0 and float(np.min(np.abs(mk - w))) <= 2.0 * tol:
                xr, xi = _tip_from_history(ws, dts, k)
                if _dist_to_slit(xr, xi, hull.foot, hull.height) <= tol:
                    outcome = "hit"
                else:
                    cooldown = 1
            check_countdown -= 1
            if outcome is None and check_countdown <= 0:
                _, c1, _, _, _ = _unzip_at(mk, w)
                if c1 > 0.995:
                    outcome = "avoid"
                check_countdown = 200
        if outcome != "hit":
            avoided += 1
    return avoided, trials


# ---------------------------------------------------------------------------
# transience diagnostics
# ---------------------------------------------------------------------------


def sle_tip_moduli(kappa: float, horizon: float, dt: float, trials: int,
                   master_seed: int) -> np.ndarray:
    """|tip(horizon)| over independent traces (one tip per trace)."""
    n = int(round(horizon / dt))
    dts = np.full(n, dt)
    out = np.empty(trials)
    for i in range(trials):
        params = SleParams(kappa=kappa, horizon=horizon, dt=dt,
                           seed=child_seed(master_seed, i))
        d = sample_driving(params)
        xr, xi = _tip_from_history(d.values, dts, n)
        out[i] = math.hypot(xr, xi)
    return out


def transience_diagnostic(params: SleParams, horizons, trials: int,
                          tips_per_trace: int = 32) -> dict:
    """Median of the running maximum tip modulus over dyadic horizons.

    For kappa < 4 the trace escapes to infinity, so the medians should be
    increasing in the horizon.  Returns {horizon: median_max_modulus}.
    """
    if params.kappa >= 4.0:
        raise ValueError("transience diagnostic is for kappa < 4")
    out = {}
    for T in horizons:
        n = int(round(T / params.dt))
        idx = np.unique(np.linspace(1, n, tips_per_trace).astype(int))
        dts = np.full(n, params.dt)
        maxima = np.empty(trials)
        for i in range(trials):
            p = SleParams(kappa=params.kappa, horizon=T, dt=params.dt,
                          seed=child_seed(params.seed ^ 0x5A5A, i))
            d = sample_driving(p)
            mods = [math.hypot(*_tip_from_history(d.values, dts, int(j)))
                    for j in idx]
            maxima[i] = max(mods)
        out[T] = float(np.median(maxima))
    return out
