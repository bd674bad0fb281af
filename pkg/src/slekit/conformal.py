"""Half-plane slit maps, capacity bookkeeping, and map chains.

Hulls are measured by half-plane capacity: the normalized removal map of a
hull K expands as Phi_K(z) = z + 2a(K)/z + o(1/z) at infinity, and a(K) is
additive under composition of normalized maps.  The vertical slit [x0, x0+ih]
has the closed-form removal map x0 + sqrt((z-x0)^2 + h^2) and capacity h^2/4.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

__all__ = [
    "SwallowedError",
    "SlitParams",
    "MapChain",
    "sqrt_upper",
    "vertical_slit_map",
    "inverse_slit_map",
    "slit_capacity",
    "scale_slit",
    "chain_eval",
    "concat_chains",
    "cayley",
]

#: evaluation closer than this to a slit segment is rejected
SLIT_GUARD = 1e-10


class SwallowedError(ValueError):
    """A point fell onto (or inside) a slit during chain evaluation."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


def sqrt_upper(z: complex) -> complex:
    """Square root with branch chosen in the closed upper half-plane.

    For negative reals returns +i*sqrt(|z|); for non-negative reals the
    usual non-negative root.  Keeps slit-map images inside the half-plane
    and makes forward/inverse round trips deterministic.
    """
    s = cmath.sqrt(z)
    if s.imag < 0.0:
        s = -s
    return s


def _dist_to_segment(z: complex, a: complex, b: complex) -> float:
    """Euclidean distance from z to segment [a, b]."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return abs(z - a)
    t = ((z - a).real * ab.real + (z - a).imag * ab.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * ab))


def vertical_slit_map(z: complex, y: float, foot: float = 0.0) -> complex:
    """Remove the vertical slit [foot, foot + iy] from the half-plane.

    Returns the hydrodynamically normalized image foot + sqrt((z-foot)^2+y^2),
    which fixes infinity with expansion z + (y^2/2)/z + o(1/z).

    Raises ValueError if z lies on (or within SLIT_GUARD of) the slit.
    """
    if y <= 0.0:
        raise ValueError(f"slit height must be positive, got {y}")
    z = complex(z)
    if z.imag < -SLIT_GUARD:
        raise ValueError(f"point {z} not in the closed upper half-plane")
    if _dist_to_segment(z, complex(foot, 0.0), complex(foot, y)) <= SLIT_GUARD:
        raise ValueError(f"point {z} lies on the slit [{foot}, {foot}+{y}i]")
    u = z - foot
    if u.imag == 0.0:
        # real axis: continuous branch requires the sign of Re(z - foot)
        r = math.sqrt(u.real * u.real + y * y)
        return complex(foot + math.copysign(r, u.real), 0.0)
    return foot + sqrt_upper(u * u + y * y)


def inverse_slit_map(w: complex, y: float, foot: float = 0.0) -> complex:
    """Inverse of vertical_slit_map: opens the slit [foot, foot+iy] back up.

    Maps the half-plane onto the slit complement; w = foot goes to the tip.
    """
    if y <= 0.0:
        raise ValueError(f"slit height must be positive, got {y}")
    w = complex(w)
    u = w - foot
    if u.imag == 0.0:
        d = u.real * u.real - y * y
        if d >= 0.0:
            return complex(foot + math.copysign(math.sqrt(d), u.real), 0.0)
        return foot + complex(0.0, math.sqrt(-d))
    return foot + sqrt_upper(u * u - y * y)


def slit_capacity(p: "SlitParams") -> float:
    """Half-plane capacity of a straight slit of length `height` at `angle`.

    Vertical slits (angle pi/2) give exactly height^2/4.  For a tilted slit
    the closed form is (height^2/4) * (a/(1-a))^(1-2a) with a = angle/pi;
    it is symmetric under angle -> pi - angle and scales quadratically.
    """
    if p.height <= 0.0:
        raise ValueError(f"slit height must be positive, got {p.height}")
    alpha = p.angle / math.pi
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"slit angle must lie in (0, pi), got {p.angle}")
    if p.angle == math.pi / 2:
        return p.height * p.height / 4.0
    return (p.height * p.height / 4.0) * (alpha / (1.0 - alpha)) ** (1.0 - 2.0 * alpha)


@dataclass(frozen=True)
class SlitParams:
    """A straight slit rooted on the real axis.

    foot: root on the real axis; height: slit length (> 0);
    angle: tilt in (0, pi), with pi/2 a vertical slit.
    """

    foot: float
    height: float
    angle: float = math.pi / 2

    def __post_init__(self):
        if not (math.isfinite(self.foot) and math.isfinite(self.height)):
            raise ValueError("slit parameters must be finite")
        if self.height <= 0.0:
            raise ValueError(f"slit height must be positive, got {self.height}")
        if not 0.0 < self.angle < math.pi:
            raise ValueError(f"slit angle must lie in (0, pi), got {self.angle}")

    @property
    def tip(self) -> complex:
        return self.foot + self.height * cmath.exp(1j * self.angle)


def scale_slit(p: SlitParams, lam: float) -> SlitParams:
    """Scale a slit by lambda > 0 about the origin."""
    if lam <= 0.0:
        raise ValueError("scale factor must be positive")
    return SlitParams(foot=lam * p.foot, height=lam * p.height, angle=p.angle)


@dataclass
class MapChain:
    """Ordered composition of elementary slit removals.

    Each step is (SlitParams, capacity increment).  Only vertical steps are
    evaluable; the chain keeps capacity additivity exact up to summation
    order.  Immutable by convention after construction.
    """

    steps: list = field(default_factory=list)

    @property
    def total_capacity(self) -> float:
        return math.fsum(da for _, da in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def make_vertical_step(foot: float, capacity: float) -> tuple:
    """Vertical-slit step of a given capacity increment (height 2*sqrt(da))."""
    if capacity < 0.0:
        raise ValueError("capacity increment must be non-negative")
    return (SlitParams(foot=foot, height=2.0 * math.sqrt(capacity)), capacity)


def concat_chains(c1: MapChain, c2: MapChain) -> MapChain:
    return MapChain(steps=list(c1.steps) + list(c2.steps))


def chain_eval(chain: MapChain, z: complex, direction: str = "forward") -> complex:
    """Evaluate the chain at z.

    forward applies the slit removals in order (z must stay out of every
    slit); inverse applies the step inverses in reverse order.  A point that
    lands on a slit mid-chain raises SwallowedError with the step index.
    """
    z = complex(z)
    if direction == "forward":
        for k, (p, _) in enumerate(chain.steps):
            if p.angle != math.pi / 2:
                raise NotImplementedError("only vertical steps are evaluable")
            try:
                z = vertical_slit_map(z, p.height, p.foot)
            except ValueError as exc:
                raise SwallowedError(
                    f"point swallowed at step {k}: {exc}", step_index=k
                ) from exc
        return z
    if direction == "inverse":
        for k in range(len(chain.steps) - 1, -1, -1):
            p, _ = chain.steps[k]
            if p.angle != math.pi / 2:
                raise NotImplementedError("only vertical steps are evaluable")
            z = inverse_slit_map(z, p.height, p.foot)
        return z
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def cayley(z: complex, direction: str) -> complex:
    """Moebius transform between the unit disc and the upper half-plane.

    disc_to_half: z -> i(1-z)/(1+z); sends -1 -> infinity, 1 -> 0, 0 -> i.
    half_to_disc is its inverse w -> (i-w)/(i+w).
    """
    z = complex(z)
    if direction == "disc_to_half":
        if abs(z + 1.0) <= SLIT_GUARD:
            raise ValueError("z = -1 is the pole of the disc-to-half map")
        return 1j * (1.0 - z) / (1.0 + z)
    if direction == "half_to_disc":
        if abs(z + 1j) <= SLIT_GUARD:
            raise ValueError("z = -i is the pole of the half-to-disc map")
        return (1j - z) / (1j + z)
    raise ValueError(f"unknown direction {direction!r}")
