"""Conversions between the dimensionless core and laboratory units.

Only the command line uses these; everything else works with energies in
units of ``D`` and times in units of ``1/D``.
"""

D_ZERO_FIELD_HZ = 2.87e9
# NV electron gyromagnetic ratio
GAMMA_HZ_PER_GAUSS = 2.8025e6


def reduced_time_to_seconds(total_time: float, d_hz: float = D_ZERO_FIELD_HZ) -> float:
    return total_time / d_hz


def seconds_to_reduced_time(seconds: float, d_hz: float = D_ZERO_FIELD_HZ) -> float:
    return seconds * d_hz


def epsilon_to_gauss(epsilon: float, d_hz: float = D_ZERO_FIELD_HZ) -> float:
    """Axial field whose Zeeman shift is ``epsilon * D``."""
    return epsilon * d_hz / GAMMA_HZ_PER_GAUSS


def gauss_to_epsilon(gauss: float, d_hz: float = D_ZERO_FIELD_HZ) -> float:
    return gauss * GAMMA_HZ_PER_GAUSS / d_hz
