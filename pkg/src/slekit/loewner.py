"""Forward solvers for the chordal and radial Loewner equations.

Chordal flow dg/dt = 2/(g - w_t) is integrated by composing exact elementary
vertical-slit maps per step (the driving is held at its left endpoint within
each step), which preserves the half-plane exactly and makes the zero-driving
flow sqrt(z^2 + 4t) exact up to rounding.  The radial flow
dg/dt = -g (g + zeta_t)/(g - zeta_t) has no convenient elementary map and is
integrated with classical RK4.

Traces are reconstructed by applying the per-step inverse maps in reverse
order to the current driving value; the radial reverse flow starts at the
driving singularity and takes an asymptotic first step q = zeta(1 - 2 sqrt(s)
+ 2s) before switching to RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conformal import MapChain, make_vertical_step, sqrt_upper

__all__ = [
    "DrivingPath",
    "FlowState",
    "LoewnerTrace",
    "solve_chordal_flow",
    "chordal_tips",
    "chordal_trace",
    "calibrate_sqrt_driving",
    "solve_radial_flow",
    "radial_trace",
    "radial_to_chordal_transform",
    "trace_to_csv",
    "read_trace_csv",
]


# ---------------------------------------------------------------------------
# driving paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DrivingPath:
    """Uniformly sampled driving function.

    For chordal paths `values` are the real driving samples w(t_k); for
    radial paths they are angles theta_k with zeta_k = exp(i theta_k).
    """

    kind: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("chordal", "radial"):
            raise ValueError(f"kind must be 'chordal' or 'radial', got {self.kind!r}")
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("times and values must be 1-d arrays of equal length >= 2")
        if times[0] != 0.0:
            raise ValueError("time grid must start at 0")
        steps = np.diff(times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15) or steps[0] <= 0:
            raise ValueError("time grid must be uniform and increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("driving values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @staticmethod
    def from_function(kind: str, fn, horizon: float, dt: float) -> "DrivingPath":
        n = int(round(horizon / dt))
        times = np.arange(n + 1) * dt
        return DrivingPath(kind=kind, times=times, values=np.array([fn(t) for t in times]))

    @staticmethod
    def zeros(kind: str, horizon: float, dt: float) -> "DrivingPath":
        n = int(round(horizon / dt))
        times = np.arange(n + 1) * dt
        return DrivingPath(kind=kind, times=times, values=np.zeros(n + 1))

    @staticmethod
    def sqrt_profile(c1: float, horizon: float, dt: float, kind: str = "chordal") -> "DrivingPath":
        n = int(round(horizon / dt))
        times = np.arange(n + 1) * dt
        return DrivingPath(kind=kind, times=times, values=c1 * np.sqrt(times))

    def shifted(self, x0: float) -> "DrivingPath":
        return DrivingPath(kind=self.kind, times=self.times, values=self.values + x0)

    def negated(self) -> "DrivingPath":
        return DrivingPath(kind=self.kind, times=self.times, values=-self.values)


@dataclass
class FlowState:
    """Terminal state of one flowed point."""

    point: complex
    swallowed_at: Optional[float]

    @property
    def alive(self) -> bool:
        return self.swallowed_at is None


@dataclass
class FlowTrajectory:
    """g_t(z) sampled on the driving grid, truncated at swallowing."""

    times: np.ndarray
    points: np.ndarray
    swallowed_at: Optional[float]

    @property
    def final(self) -> FlowState:
        return FlowState(point=complex(self.points[-1]), swallowed_at=self.swallowed_at)


@dataclass
class LoewnerTrace:
    """Trace tips with their capacity-time stamps.

    `chain` is the elementary-map chain used for chordal reconstruction
    (None for radial traces).  `clamped` flags steps whose tip left the open
    half-plane numerically and was clamped back (possible for kappa > 4).
    """

    kind: str
    times: np.ndarray
    tips: np.ndarray
    chain: Optional[MapChain] = None
    clamped: int = 0

    def __post_init__(self):
        if len(self.times) != len(self.tips):
            raise ValueError("times and tips must have equal length")


# ---------------------------------------------------------------------------
# chordal flow
# ---------------------------------------------------------------------------


def _slit_step_complex(z: complex, w: float, four_dt: float) -> complex:
    """One forward elementary step: remove a slit of capacity dt at w."""
    u = z - w
    if u.imag == 0.0:
        r = math.sqrt(u.real * u.real + four_dt)
        return complex(w + math.copysign(r, u.real), 0.0)
    return w + sqrt_upper(u * u + four_dt)


def solve_chordal_flow(driving: DrivingPath, z: complex,
                       swallow_tol: Optional[float] = None) -> FlowTrajectory:
    """Flow one point under the chordal Loewner equation.

    Swallowing is declared when |g - w| drops to the tolerance (default
    2 sqrt(dt), the height of the per-step slit); the trajectory ends there.
    """
    if driving.kind != "chordal":
        raise ValueError("driving must be chordal")
    z = complex(z)
    if z.imag < 0.0:
        raise ValueError(f"point {z} not in the closed upper half-plane")
    dt = driving.dt
    tol = 2.0 * math.sqrt(dt) if swallow_tol is None else swallow_tol
    w = driving.values
    four_dt = 4.0 * dt
    points = [z]
    swallowed_at = None
    if abs(z - w[0]) <= tol:
        return FlowTrajectory(times=driving.times[:1], points=np.array([z]), swallowed_at=0.0)
    for k in range(driving.n_steps):
        z = _slit_step_complex(z, w[k], four_dt)
        points.append(z)
        if abs(z - w[k + 1]) <= tol:
            swallowed_at = float(driving.times[k + 1])
            break
    m = len(points)
    return FlowTrajectory(times=driving.times[:m], points=np.array(points),
                          swallowed_at=swallowed_at)


def _sqrt_upper_np(zeta: np.ndarray) -> np.ndarray:
    s = np.sqrt(zeta.astype(complex))
    return np.where(s.imag < 0.0, -s, s)


def _slit_sqrt_np(u: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Branch of sqrt(zeta) for a slit step with displacement u = z - w.

    Off the real axis the upper-half-plane branch is correct; exactly-real
    inputs with real non-negative zeta sit on the branch cut and take the
    sign of u (continuity of the slit maps along the axis).
    """
    s = _sqrt_upper_np(zeta)
    on_axis = (u.imag == 0.0) & (zeta.imag == 0.0) & (zeta.real >= 0.0)
    if np.any(on_axis):
        signed = np.copysign(np.sqrt(np.abs(zeta.real)), u.real)
        s = np.where(on_axis, signed + 0.0j, s)
    return s


def chordal_tips(driving: DrivingPath, indices: np.ndarray) -> np.ndarray:
    """Trace tips gamma(t_j) for the given sorted grid indices (vectorized).

    Tip j is built by composing inverse elementary maps in reverse order,
    starting from the driving value at t_j; sweep i applies the step with
    foot w_{j-i} to every tip with j >= i.
    """
    w = driving.values
    dt = driving.dt
    four_dt = 4.0 * dt
    idx = np.asarray(indices, dtype=int)
    if len(idx) == 0:
        return np.zeros(0, dtype=complex)
    if idx.min() < 0 or idx.max() > driving.n_steps:
        raise ValueError("tip indices out of range")
    z = w[idx].astype(complex)
    order = np.argsort(idx)[::-1]  # descending j: longest compositions first
    idx_sorted = idx[order]
    z_sorted = z[order]
    max_j = int(idx_sorted[0]) if len(idx_sorted) else 0
    n_active = len(idx_sorted)
    for i in range(1, max_j + 1):
        # tips with j < i are finished; they sit at the tail of the sorted arrays
        while n_active > 0 and idx_sorted[n_active - 1] < i:
            n_active -= 1
        if n_active == 0:
            break
        feet = w[idx_sorted[:n_active] - i]
        u = z_sorted[:n_active] - feet
        z_sorted[:n_active] = feet + _slit_sqrt_np(u, u * u - four_dt)
    out = np.empty_like(z_sorted)
    out[order] = z_sorted
    return out


def chordal_trace(driving: DrivingPath, sample_every: int = 1) -> LoewnerTrace:
    """Reconstruct the chordal trace on a (possibly subsampled) time grid.

    Tips with numerically negative imaginary part (possible near swallowing
    for strongly fluctuating drivings) are clamped to the real axis and
    counted in `clamped`.
    """
    if driving.kind != "chordal":
        raise ValueError("driving must be chordal")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    idx = np.arange(0, driving.n_steps + 1, sample_every)
    if idx[-1] != driving.n_steps:
        idx = np.append(idx, driving.n_steps)
    tips = chordal_tips(driving, idx)
    clamped = int(np.count_nonzero(tips.imag < 0.0))
    if clamped:
        tips = np.where(tips.imag < 0.0, tips.real + 0.0j, tips)
    if not np.all(np.isfinite(tips)):
        bad = int(np.flatnonzero(~np.isfinite(tips))[0])
        raise FloatingPointError(f"trace reconstruction blew up at step index {idx[bad]}")
    chain = MapChain(steps=[make_vertical_step(driving.values[k], driving.dt)
                            for k in range(driving.n_steps)])
    return LoewnerTrace(kind="chordal", times=driving.times[idx], tips=tips,
                        chain=chain, clamped=clamped)


def calibrate_sqrt_driving(theta: float, dt: float = 1e-4, horizon: float = 1.0,
                           tol: float = 1e-9, max_iter: int = 200) -> float:
    """Constant c1 such that driving c1*sqrt(t) traces a ray at angle theta.

    The tip angle is a monotone decreasing function of c1 (positive c1 tilts
    the slit toward the positive axis), so bisection applies; theta = pi/2
    returns 0 by symmetry.
    """
    if not 0.0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    if theta == math.pi / 2:
        return 0.0

    n = int(round(horizon / dt))

    def tip_angle(c1: float) -> float:
        d = DrivingPath.sqrt_profile(c1, horizon, dt)
        tip = chordal_tips(d, np.array([n]))[0]
        return math.atan2(tip.imag, tip.real)

    lo, hi = -1.0, 1.0  # c1 bracket; angle(lo) > angle(hi)
    while tip_angle(lo) < theta:
        lo *= 2.0
        if lo < -1e6:
            raise RuntimeError("sqrt-driving calibration failed to bracket")
    while tip_angle(hi) > theta:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("sqrt-driving calibration failed to bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            return mid
        if tip_angle(mid) > theta:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"sqrt-driving calibration did not converge for theta={theta}")


# ---------------------------------------------------------------------------
# radial flow
# ---------------------------------------------------------------------------


def _radial_field(g, zeta):
    return -g * (g + zeta) / (g - zeta)


def solve_radial_flow(driving: DrivingPath, z: complex,
                      swallow_tol: Optional[float] = None) -> FlowTrajectory:
    """Flow one point of the closed disc under the radial Loewner equation.

    RK4 with the driving held at its left endpoint within each step; the
    origin is an exact fixed point.  Swallowing is declared when |g - zeta|
    drops to the tolerance (default 2 sqrt(dt)).
    """
    if driving.kind != "radial":
        raise ValueError("driving must be radial")
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise ValueError(f"point {z} not in the closed unit disc")
    dt = driving.dt
    tol = 2.0 * math.sqrt(dt) if swallow_tol is None else swallow_tol
    zeta = np.exp(1j * driving.values)
    g = z
    points = [g]
    swallowed_at = None
    if abs(g - zeta[0]) <= tol:
        return FlowTrajectory(times=driving.times[:1], points=np.array([g]), swallowed_at=0.0)
    for k in range(driving.n_steps):
        zk = zeta[k]
        if abs(g - zk) <= tol:
            swallowed_at = float(driving.times[k])
            break
        k1 = _radial_field(g, zk)
        k2 = _radial_field(g + 0.5 * dt * k1, zk)
        k3 = _radial_field(g + 0.5 * dt * k2, zk)
        k4 = _radial_field(g + dt * k3, zk)
        g = g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        points.append(g)
        if abs(g - zeta[k + 1]) <= tol:
            swallowed_at = float(driving.times[k + 1])
            break
    m = len(points)
    return FlowTrajectory(times=driving.times[:m], points=np.array(points),
                          swallowed_at=swallowed_at)


def radial_tips(driving: DrivingPath, indices: np.ndarray) -> np.ndarray:
    """Radial trace tips g_{t_j}^{-1}(zeta_{t_j}) for sorted grid indices.

    The reverse flow dq/ds = +q (q + zeta)/(q - zeta) starts at the driving
    singularity.  In the local angle coordinate q = zeta exp(iv) the equation
    degenerates to v dv = -2 ds, so the first backward step is the exact
    square-root update v -> sqrt(v^2 - 4 dt) (branch Im >= 0, which points
    into the disc); RK4 takes over afterwards.  All tips advance in
    lockstep, reading the driving backward from their own index.
    """
    zeta_all = np.exp(1j * driving.values)
    theta = driving.values
    dt = driving.dt
    idx = np.asarray(indices, dtype=int)
    if len(idx) == 0:
        return np.zeros(0, dtype=complex)
    if idx.min() < 0 or idx.max() > driving.n_steps:
        raise ValueError("tip indices out of range")
    order = np.argsort(idx)[::-1]
    idx_sorted = idx[order]
    q = zeta_all[idx_sorted].astype(complex)
    n_active = len(idx_sorted)
    max_j = int(idx_sorted[0])
    for i in range(1, max_j + 1):
        while n_active > 0 and idx_sorted[n_active - 1] < i:
            n_active -= 1
        if n_active == 0:
            break
        zk = zeta_all[idx_sorted[:n_active] - i]
        qa = q[:n_active]
        if i == 1:
            # exact square-root step in the angle offset from the driving
            v0 = theta[idx_sorted[:n_active]] - theta[idx_sorted[:n_active] - 1]
            v1 = _sqrt_upper_np(v0 * v0 - 4.0 * dt)
            q[:n_active] = zk * np.exp(1j * v1)
        else:
            k1 = -_radial_field(qa, zk)
            k2 = -_radial_field(qa + 0.5 * dt * k1, zk)
            k3 = -_radial_field(qa + 0.5 * dt * k2, zk)
            k4 = -_radial_field(qa + dt * k3, zk)
            q[:n_active] = qa + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = np.empty_like(q)
    out[order] = q
    return out


def radial_trace(driving: DrivingPath, sample_every: int = 1) -> LoewnerTrace:
    """Reconstruct the radial trace; tips are clamped into the closed disc."""
    if driving.kind != "radial":
        raise ValueError("driving must be radial")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    idx = np.arange(0, driving.n_steps + 1, sample_every)
    if idx[-1] != driving.n_steps:
        idx = np.append(idx, driving.n_steps)
    tips = radial_tips(driving, idx)
    if not np.all(np.isfinite(tips)):
        bad = int(np.flatnonzero(~np.isfinite(tips))[0])
        raise FloatingPointError(f"trace reconstruction blew up at step index {idx[bad]}")
    mod = np.abs(tips)
    clamped = int(np.count_nonzero(mod > 1.0))
    if clamped:
        tips = np.where(mod > 1.0, tips / mod, tips)
    return LoewnerTrace(kind="radial", times=driving.times[idx], tips=tips,
                        chain=None, clamped=clamped)


# ---------------------------------------------------------------------------
# radial -> chordal coordinate change
# ---------------------------------------------------------------------------


@dataclass
class RadialChordalTransform:
    """Reparametrized chordal driving extracted from a radial one.

    beta on the u clock is (for kappa = 6) a local martingale with quadratic
    variation kappa * u; `truncated` is set when the stopping rule (target
    angle within 1/n_stop, or t = n_stop) fired before the driving ran out.
    """

    times: np.ndarray
    u: np.ndarray
    beta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    r: np.ndarray
    y: np.ndarray
    truncated: bool
    drift_per_u: float


def radial_to_chordal_transform(driving: DrivingPath, kappa: float,
                                n_stop: float = 10.0) -> RadialChordalTransform:
    """Change radial driving into chordal driving targeted at the point -1.

    Tracks the angle gap Y_t between the flowed target and the driving
    (dY = cot(Y/2) dt between driving jumps), then r = cot(Y/2) and the
    affine frame a' = -(1+r^2) a / 2, b' = -(1+r^2) a r / 2 with the clock
    u' = (1+r^2)^2 a^2 / 4.  beta = a r + b starts at r_0 = 0 and, on the u
    clock, loses its drift exactly at kappa = 6.
    """
    if driving.kind != "radial":
        raise ValueError("driving must be radial")
    dt = driving.dt
    theta = driving.values
    n = driving.n_steps
    y = np.empty(n + 1)
    a = np.empty(n + 1)
    b = np.empty(n + 1)
    u = np.empty(n + 1)
    y[0], a[0], b[0], u[0] = math.pi, 1.0, 0.0, 0.0
    truncated = False
    last = n
    for k in range(n):
        yk = y[k]
        gap = 2.0 * abs(math.sin(yk / 2.0))
        if gap < 1.0 / n_stop or driving.times[k] >= n_stop:
            truncated = True
            last = k
            break
        rk = 1.0 / math.tan(yk / 2.0)
        one_r2 = 1.0 + rk * rk
        # left-endpoint updates keep finite differences of a, b, u exactly
        # consistent with their stated derivatives at the grid points
        a[k + 1] = a[k] * (1.0 - 0.5 * one_r2 * dt)
        b[k + 1] = b[k] - 0.5 * one_r2 * a[k] * rk * dt
        u[k + 1] = u[k] + 0.25 * one_r2 * one_r2 * a[k] * a[k] * dt
        # angle gap: RK4 for the cot drift, then the driving jump
        f = lambda v: 1.0 / math.tan(v / 2.0)
        k1 = f(yk)
        k2 = f(yk + 0.5 * dt * k1)
        k3 = f(yk + 0.5 * dt * k2)
        k4 = f(yk + dt * k3)
        y[k + 1] = yk + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4) \
            - (theta[k + 1] - theta[k])
        if not 0.0 < y[k + 1] < 2.0 * math.pi:
            truncated = True
            last = k + 1
            break
    sl = slice(0, last + 1)
    yv = y[sl]
    rv = 1.0 / np.tan(yv / 2.0)
    beta = a[sl] * rv + b[sl]
    uu = u[sl]
    du = uu[-1] - uu[0]
    drift = float((beta[-1] - beta[0]) / (math.sqrt(kappa) * du)) if du > 0 else 0.0
    return RadialChordalTransform(times=driving.times[sl], u=uu, beta=beta,
                                  a=a[sl], b=b[sl], r=rv, y=yv,
                                  truncated=truncated, drift_per_u=drift)


# ---------------------------------------------------------------------------
# trace serialization
# ---------------------------------------------------------------------------


def trace_to_csv(trace: LoewnerTrace, path) -> None:
    """Write a trace as CSV `t,re,im` with 12-significant-digit floats."""
    with open(path, "w") as fh:
        fh.write("t,re,im\n")
        for t, tip in zip(trace.times, trace.tips):
            fh.write(f"{t:.12g},{tip.real:.12g},{tip.imag:.12g}\n")


def read_trace_csv(path) -> LoewnerTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"trace CSV must have 3 columns, got {data.shape[1]}")
    return LoewnerTrace(kind="chordal", times=data[:, 0],
                        tips=data[:, 1] + 1j * data[:, 2], chain=None)
