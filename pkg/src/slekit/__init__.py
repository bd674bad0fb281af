"""Simulation and verification toolkit for Schramm-Loewner evolutions.

Numerical Loewner-equation solvers (chordal and radial), random SLE sampling,
the discrete models whose scaling limits they describe (loop-erased walks,
uniform spanning trees, critical percolation, reflected walks, Brownian
excursions), closed-form probability oracles, and a Monte Carlo harness for
critical-exponent estimation.
"""

__version__ = "0.1.0"
