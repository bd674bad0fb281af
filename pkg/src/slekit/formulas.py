"""Closed-form probabilities and the critical-exponent tables.

These are the analytic oracles against which every Monte Carlo experiment in
the toolkit is checked: the boundary hitting CDF of chordal SLE, Cardy's
crossing formula in the equilateral triangle, the spanning-tree winding
functional, hull-avoidance probabilities, and the disconnection/derivative/
intersection/arm exponent families.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy import integrate

__all__ = [
    "TriangleFrame",
    "ExponentTable",
    "hitting_cdf",
    "cardy_equilateral",
    "ust_winding_h",
    "avoid_probability",
    "slit_derivative_at_zero",
    "excursion_halfplane_avoid",
    "exponent_table",
    "smirnov_h1",
    "equilateral_triangle",
]

# ---------------------------------------------------------------------------
# boundary hitting CDF of chordal SLE, kappa > 4
# ---------------------------------------------------------------------------

# cache for the normalization constant c(kappa); recomputed when kappa moves
# by more than 1e-14
_c_cache: dict = {"kappa": None, "value": None}


def _hitting_integral(z: float, kappa: float) -> float:
    """integral_0^z u^(-4/kappa) (1-u)^(-4/kappa) du for 0 <= z <= 1/2.

    Adaptive Gauss-Kronrod after the substitution u = s^(kappa/(kappa-4)),
    which absorbs the integrable singularity at 0.
    """
    if z == 0.0:
        return 0.0
    a = 4.0 / kappa
    m = kappa / (kappa - 4.0)  # du = m s^(m-1) ds, u^(-a) = s^(-a m)
    # integrand in s: m * s^(m - 1 - a*m) * (1 - s^m)^(-a); exponent of s is 0
    def g(s):
        return m * (1.0 - s ** m) ** (-a)

    upper = z ** (1.0 / m)
    val, _err = integrate.quad(g, 0.0, upper, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def hitting_cdf(kappa: float, z: float) -> float:
    """Probability that the chordal trace hits the right boundary ray first.

    F(z) = c(kappa) * integral_0^z u^(-4/kappa)(1-u)^(-4/kappa) du with c
    chosen so F(1) = 1; z is the cross-ratio -a/(c-a) of the two boundary
    points.  Only defined for kappa > 4, where boundary points are swallowed.
    """
    if kappa <= 4.0:
        raise ValueError(f"hitting CDF requires kappa > 4, got {kappa}")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"argument must lie in [0, 1], got {z}")
    if _c_cache["kappa"] is None or abs(kappa - _c_cache["kappa"]) > 1e-14:
        _c_cache["kappa"] = kappa
        _c_cache["value"] = 1.0 / (2.0 * _hitting_integral(0.5, kappa))
    c = _c_cache["value"]
    # integrand symmetric under u <-> 1-u: reflect for the upper half
    if z <= 0.5:
        return c * _hitting_integral(z, kappa)
    return 1.0 - c * _hitting_integral(1.0 - z, kappa)


# ---------------------------------------------------------------------------
# triangle geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangleFrame:
    """An equilateral triangle with labelled vertices O, A, C."""

    O: complex
    A: complex
    C: complex

    def __post_init__(self):
        sides = (abs(self.A - self.O), abs(self.C - self.A), abs(self.O - self.C))
        if max(sides) - min(sides) > 1e-12 * max(sides):
            raise ValueError(f"vertices are not equilateral: side lengths {sides}")

    @property
    def orientation(self) -> int:
        """+1 for counterclockwise O->A->C, -1 for clockwise."""
        cross = ((self.A - self.O).conjugate() * (self.C - self.O)).imag
        return 1 if cross > 0 else -1


def equilateral_triangle(side: float = 1.0) -> TriangleFrame:
    """Standard frame: O at the origin, A at `side`, C above."""
    return TriangleFrame(O=0j, A=complex(side, 0.0),
                         C=complex(side / 2.0, side * math.sqrt(3.0) / 2.0))


def cardy_equilateral(frame: TriangleFrame, X: complex) -> float:
    """Crossing probability in the equilateral triangle: |CX| / |CA|.

    X must lie on the segment CA (within 1e-9 of it relative to side length).
    """
    C, A = frame.C, frame.A
    side = abs(A - C)
    t = ((complex(X) - C).conjugate() * (A - C)).real / (side * side)
    off = abs(complex(X) - (C + t * (A - C)))
    if off > 1e-9 * side or not -1e-12 <= t <= 1.0 + 1e-12:
        raise ValueError(f"X={X} does not lie on segment CA")
    return min(1.0, max(0.0, t))


def smirnov_h1(z: complex, frame: TriangleFrame) -> float:
    """Normalized distance from z to the side opposite vertex A.

    H(z) = d(z, OC) / d(A, OC); equals 1 at A, 0 on the opposite side, and
    the three vertex-role relabelings sum to 1 at any interior point.
    """
    z = complex(z)
    O, A, C = frame.O, frame.A, frame.C
    # barycentric check that z is inside (closed) triangle
    def _half(p, q, r):
        return ((q - p).conjugate() * (r - p)).imag

    d1, d2, d3 = _half(O, A, z), _half(A, C, z), _half(C, O, z)
    eps = 1e-12 * abs(A - O) ** 2
    has_neg = (d1 < -eps) or (d2 < -eps) or (d3 < -eps)
    has_pos = (d1 > eps) or (d2 > eps) or (d3 > eps)
    if has_neg and has_pos:
        raise ValueError(f"z={z} lies outside the triangle")
    u = (C - O) / abs(C - O)
    dist_z = abs(((z - O).conjugate() * u).imag)
    dist_a = abs(((A - O).conjugate() * u).imag)
    return dist_z / dist_a


# ---------------------------------------------------------------------------
# spanning-tree winding functional
# ---------------------------------------------------------------------------


def ust_winding_h(A: float, C: float, Z: complex) -> float:
    """Winding functional F((Z-A)/(C-A)) with F(re^(i t)) = atan((1-r)/(2 sqrt(r) sin(t/2)))/pi.

    This is the conformally invariant observable driving the spanning-tree
    contour convergence argument; the reflected-walk hitting probability of
    the far wired arc equals 1/2 - F.
    """
    if A == C:
        raise ValueError("A and C must be distinct real boundary points")
    Z = complex(Z)
    if Z.imag <= 0.0:
        raise ValueError(f"Z={Z} must lie in the open upper half-plane")
    w = (Z - A) / (C - A)
    r = abs(w)
    theta = abs(cmath.phase(w))
    s = 2.0 * math.sqrt(r) * math.sin(theta / 2.0)
    if s == 0.0:
        return 0.5 if r < 1.0 else (-0.5 if r > 1.0 else 0.0)
    return math.atan2(1.0 - r, s) / math.pi


# ---------------------------------------------------------------------------
# hull avoidance
# ---------------------------------------------------------------------------


def avoid_probability(phi_prime_at_0: float, exponent: float) -> float:
    """Hull-avoidance probability: phi'(0)^exponent.

    exponent = 5/8 for the restriction-invariant SLE path, 1 for the
    half-plane Brownian excursion.
    """
    if not 0.0 < phi_prime_at_0 <= 1.0:
        raise ValueError(f"derivative must lie in (0, 1], got {phi_prime_at_0}")
    if exponent not in (0.625, 1, 1.0):
        raise ValueError(f"exponent must be 5/8 or 1, got {exponent}")
    return phi_prime_at_0 ** exponent


def slit_derivative_at_zero(x0: float, h: float) -> float:
    """phi'(0) for the normalized removal map of the slit [x0, x0+ih].

    Differentiating x0 + sign(z-x0) sqrt((z-x0)^2 + h^2) at z = 0 gives
    |x0| / sqrt(x0^2 + h^2); scale-invariant and -> 1 as h -> 0.
    """
    if x0 == 0.0:
        raise ValueError("slit must sit at positive distance from the origin")
    if h <= 0.0:
        raise ValueError(f"slit height must be positive, got {h}")
    return abs(x0) / math.hypot(x0, h)


def excursion_halfplane_avoid(z: complex, map_im: float) -> float:
    """Excursion avoidance probability Im(phi(z)) / Im(z).

    phi is the normalized removal map of the avoided hull; removal maps
    contract the imaginary part, so a ratio above 1 is a domain error.
    """
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"z={z} must lie in the open upper half-plane")
    ratio = map_im / z.imag
    if ratio > 1.0 + 1e-12:
        raise ValueError(f"Im(phi(z))={map_im} exceeds Im(z)={z.imag}")
    return min(1.0, max(0.0, ratio))


# ---------------------------------------------------------------------------
# exponent tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentTable:
    """All closed-form exponents evaluated at one (kappa, b, k, n)."""

    kappa: float
    b: float
    k: int
    n: int
    q0: float            # boundary-survival power, 1 - 4/kappa
    lambda0: float       # survival decay rate, kappa/8 - 1/2
    q: float             # derivative-weighted power
    lam: float           # derivative-weighted decay rate
    eta_k: float         # k-path disconnection exponent
    xi_k: float          # k-path intersection exponent
    alpha_n: float       # percolation n-arm exponent
    bessel_dim: float    # boundary-point flow dimension, 1 + 4/kappa
    xi_halfplane_pair: float  # half-plane pair non-intersection exponent


def _q(kappa: float, b: float) -> float:
    return (kappa - 4.0 + math.sqrt((kappa - 4.0) ** 2 + 16.0 * b * kappa)) / (2.0 * kappa)


def _lam(kappa: float, b: float) -> float:
    return (8.0 * b + kappa - 4.0 + math.sqrt((kappa - 4.0) ** 2 + 16.0 * b * kappa)) / 16.0


def exponent_table(kappa: float, b: float = 0.0, k: int = 1, n: int = 1) -> ExponentTable:
    """Evaluate the full exponent table.

    Requires kappa > 4 (the q/lambda family is only meaningful when boundary
    points are swallowed), b >= 0, k >= 1, n >= 1.
    """
    if kappa <= 4.0:
        raise ValueError(f"exponent table requires kappa > 4, got {kappa}")
    if b < 0.0:
        raise ValueError(f"b must be non-negative, got {b}")
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive integers")
    eta_k = ((math.sqrt(24.0 * k + 1.0) - 1.0) ** 2 - 4.0) / 48.0
    xi_k = (4.0 * k * k - 1.0) / 12.0
    alpha_n = 5.0 / 48.0 if n == 1 else (4.0 * n * n - 1.0) / 12.0
    return ExponentTable(
        kappa=kappa,
        b=b,
        k=k,
        n=n,
        q0=1.0 - 4.0 / kappa,
        lambda0=kappa / 8.0 - 0.5,
        q=_q(kappa, b),
        lam=_lam(kappa, b),
        eta_k=eta_k,
        xi_k=xi_k,
        alpha_n=alpha_n,
        bessel_dim=1.0 + 4.0 / kappa,
        xi_halfplane_pair=10.0 / 3.0,
    )
