"""Non-Abelian geometric phases of a rotating NV center.

Analytic and finite-difference Berry connections, path-ordered holonomies,
time-ordered three-level dynamics, noise ensembles and gyroscope estimates.
"""

__version__ = "0.1.0"
