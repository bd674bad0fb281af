"""Independent numerical oracles used by the tests.

These deliberately avoid the code paths they are used to check: the arc
capacity oracle goes through the discrete Dirichlet problem of the lattice
module, and the brute-force hitting integral uses plain midpoint quadrature
at fixed resolution.
"""

from __future__ import annotations

import math

import numpy as np

from slekit import lattice


def arc_capacity_dirichlet(arc_points, box: float = 6.0, mesh: float = 0.05,
                           probe_height: float = 3.0) -> float:
    """Half-plane capacity of an arc by a discrete Dirichlet problem.

    Solves u = harmonic extension of {Im w on the arc, 0 on the real axis
    and the far walls} on a square-lattice box, and reads the capacity off
    the imaginary-axis expansion u(iy) ~ 2a/y (the y^-2 correction vanishes
    on the axis).  Accuracy is limited by the mesh and the finite box; the
    caller should calibrate the tolerance on a slit of known capacity.
    """
    dom = lattice.build_domain("square", mesh, "square", side=2 * box)
    # shift so the box is [-box, box] x [0, 2 box]
    offset = complex(-box, 0.0)

    arc = np.asarray(arc_points, dtype=complex)
    # resample the arc densely and snap to nearest lattice vertices
    dense = []
    for a, b in zip(arc[:-1], arc[1:]):
        seg = max(2, int(abs(b - a) / (mesh / 2)) + 1)
        for s in np.linspace(0.0, 1.0, seg):
            dense.append(a + s * (b - a))
    marked = {}
    for z in dense:
        zz = z - offset
        p = int(round(zz.real / mesh))
        q = int(round(zz.imag / mesh))
        v = dom.index.get((p, q))
        if v is not None:
            marked[v] = z.imag
    if not marked:
        raise ValueError("arc does not intersect the lattice box")

    absorbing = set(dom.boundary) | set(marked)
    values = {v: 0.0 for v in dom.boundary}
    values.update(marked)
    sol = lattice.harmonic_solve(dom, values, absorbing=absorbing)

    # two-probe extrapolation kills the y^-3 multipole correction:
    # y^3 u(iy) = 2a y^2 + b  =>  2a = (y1^3 u1 - y2^3 u2)/(y1^2 - y2^2)
    p0 = int(round(box / mesh))
    ys, us = [], []
    for y_probe in (probe_height, probe_height + 2.0):
        q0 = int(round(y_probe / mesh))
        v0 = dom.index[(p0, q0)]
        ys.append(q0 * mesh)
        us.append(sol[v0])
    y1, y2 = ys
    u1, u2 = us
    return 0.5 * (y1 ** 3 * u1 - y2 ** 3 * u2) / (y1 ** 2 - y2 ** 2)


def hitting_integral_midpoint(kappa: float, z: float, n: int = 400000) -> float:
    """Brute-force normalized hitting integral by midpoint quadrature.

    Independent of the package's adaptive quadrature; the integrable
    endpoint singularities make midpoint slow but adequate as an oracle at
    moderate tolerance.
    """
    u = (np.arange(n) + 0.5) / n
    f = u ** (-4.0 / kappa) * (1.0 - u) ** (-4.0 / kappa)
    total = f.mean()
    mask = u <= z
    return float(f[mask].sum() / n / total)


def brownian_tip_angle_ray(c1: float, theta: float, dt: float = 1e-4) -> float:
    """Angle of the sqrt-driving trace tip (self-contained reimplementation)."""
    n = int(round(1.0 / dt))
    w = c1 * np.sqrt(np.arange(n + 1) * dt)
    z = complex(w[n], 0.0)
    for j in range(n - 1, -1, -1):
        u = z - w[j]
        s = complex(u * u - 4.0 * dt) ** 0.5
        if s.imag < 0:
            s = -s
        z = w[j] + s
    return math.atan2(z.imag, z.real)
