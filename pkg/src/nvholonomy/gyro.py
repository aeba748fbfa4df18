"""Rotation-sensor figures of merit for the holonomic readout.

An NV ensemble rotated at rate ``omega`` about an axis perpendicular to the
NV axis (``theta = pi/2``) keeps a fraction ``cos^2(omega t / sqrt 2)`` of its
initial population, so the fluorescence signal is
``F = N eta (1 - R sin^2(omega t / sqrt 2))``. With photon shot noise
``dF = sqrt(N eta)`` the minimum detectable rate is
``1 / (alpha R sqrt(N eta T2* tau))`` where ``alpha = sqrt(2 T1 / T2*)``;
``alpha = 1`` recovers the conventional Ramsey (Abelian) scheme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .holonomy import closed_form_longitude

# Abelian-scheme sensitivity from prior work, rad s^-1 Hz^-1/2; kept for comparison only
ABELIAN_REFERENCE_SENSITIVITY = 5.4e-3


@dataclass(frozen=True)
class GyroParams:
    n_centers: float
    collection_eff: float
    contrast: float
    t1: float
    t2_star: float
    tau: float = 1.0
    omega: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        for name in ("n_centers", "t1", "t2_star", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.collection_eff <= 1:
            raise ValueError("collection_eff must lie in (0, 1]")
        if not 0 < self.contrast <= 1:
            raise ValueError("contrast must lie in (0, 1]")
        if self.omega < 0 or self.t < 0:
            raise ValueError("omega and t must be non-negative")
        if self.t2_star > self.t1:
            raise ValueError("t2_star cannot exceed t1")

    @property
    def alpha(self) -> float:
        return float(np.sqrt(2 * self.t1 / self.t2_star))


def signal(params: GyroParams) -> float:
    """Expected photon count ``F``."""
    x = params.omega * params.t / np.sqrt(2)
    return params.n_centers * params.collection_eff * (1 - params.contrast * np.sin(x) ** 2)


def signal_curve(params: GyroParams, omega_t) -> np.ndarray:
    """``F`` sampled over an array of rotation angles ``omega * t``."""
    x = np.asarray(omega_t, dtype=float) / np.sqrt(2)
    return params.n_centers * params.collection_eff * (1 - params.contrast * np.sin(x) ** 2)


def signal_slope(params: GyroParams) -> float:
    """Exact ``dF/domega`` at ``params``."""
    nr = params.n_centers * params.collection_eff * params.contrast
    return -nr * params.t * np.sin(np.sqrt(2) * params.omega * params.t) / np.sqrt(2)


def nominal_slope(params: GyroParams) -> float:
    """Slope magnitude ``sqrt(2) N eta R t`` assumed by the sensitivity estimate."""
    return np.sqrt(2) * params.n_centers * params.collection_eff * params.contrast * params.t


def shot_noise(params: GyroParams) -> float:
    return float(np.sqrt(params.n_centers * params.collection_eff))


def min_detectable_rotation(params: GyroParams, alpha: float | None = None) -> tuple[float, float]:
    """``(delta_omega, alpha)``; pass ``alpha=1`` for the Abelian-scheme figure."""
    a = params.alpha if alpha is None else float(alpha)
    root = np.sqrt(params.n_centers * params.collection_eff * params.t2_star * params.tau)
    return float(1.0 / (a * params.contrast * root)), a


def holonomy_consistency_check(omega: float, t: float) -> float:
    """Population left in the initial state after an equatorial-axis rotation by ``omega t``."""
    u = closed_form_longitude(omega * t).matrix
    return float(abs(u[0, 0]) ** 2)
