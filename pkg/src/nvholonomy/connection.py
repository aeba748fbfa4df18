"""Non-Abelian Berry connection on a degenerate pair of NV levels.

The connection is ``A = A_theta dtheta + A_phi dphi`` with coefficients
``A_ab = <a| d |b>`` taken in the rotated body-frame basis (see
:func:`nvholonomy.hamiltonian.instantaneous_frame`). All coefficient arrays
are anti-Hermitian ``2x2`` matrices; connection sources return stacks of
them for vectorized path integration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .hamiltonian import NvParams, degenerate_pair
from .spin_algebra import SQRT2, dagger, frame_rotation, is_anti_hermitian

POLE_MARGIN = 1e-6


class PoleError(ValueError):
    """The azimuthal derivative is undefined at the poles of the sphere."""


class Basis(enum.Enum):
    PLUS_ZERO = "plus_zero"     # {|+1>, |0>}, eps = -1
    MINUS_ZERO = "minus_zero"   # {|-1>, |0>}, eps = +1
    PLUS_MINUS = "plus_minus"   # {|+1>, |-1>}, zero field

    @classmethod
    def for_params(cls, params: NvParams) -> Basis:
        return _PAIR_TO_BASIS[degenerate_pair(params)]


_PAIR_TO_BASIS = {(0, 1): Basis.PLUS_ZERO, (2, 1): Basis.MINUS_ZERO, (0, 2): Basis.PLUS_MINUS}
_BASIS_TO_PAIR = {v: k for k, v in _PAIR_TO_BASIS.items()}


@dataclass(frozen=True)
class Connection:
    a_theta: np.ndarray
    a_phi: np.ndarray
    basis: Basis

    def __post_init__(self):
        for name in ("a_theta", "a_phi"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2")
            if not is_anti_hermitian(m, 1e-6):
                raise ValueError(f"{name} is not anti-Hermitian")
            object.__setattr__(self, name, m)

    def along(self, dtheta: float, dphi: float) -> np.ndarray:
        """Contract with a tangent vector: ``A_theta dtheta + A_phi dphi``."""
        return self.a_theta * dtheta + self.a_phi * dphi


# --- closed-form coefficients ------------------------------------------------

def zero_field_coefficients(theta):
    """``(A_theta, A_phi)`` stacks in the ``{|+1>, |-1>}`` basis."""
    theta = np.asarray(theta, dtype=float)
    a_t = np.zeros(theta.shape + (2, 2), dtype=complex)
    a_p = np.zeros_like(a_t)
    a_p[..., 0, 0] = -1j * np.cos(theta)
    a_p[..., 1, 1] = 1j * np.cos(theta)
    return a_t, a_p


def degenerate_coefficients(theta, sign: int = 1):
    """``(A_theta, A_phi)`` stacks in the ``{|+-1>, |0>}`` basis.

    ``sign=+1`` is the ``{|+1>, |0>}`` pair (``eps = -1``); ``sign=-1`` the
    ``{|-1>, |0>}`` pair (``eps = +1``).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    theta = np.asarray(theta, dtype=float)
    a_t = np.zeros(theta.shape + (2, 2), dtype=complex)
    a_t[..., 0, 1] = -sign / SQRT2
    a_t[..., 1, 0] = sign / SQRT2
    a_p = np.zeros_like(a_t)
    off = 1j * np.sin(theta) / SQRT2
    a_p[..., 0, 0] = -sign * 1j * np.cos(theta)
    a_p[..., 0, 1] = off
    a_p[..., 1, 0] = off
    return a_t, a_p


def analytic_connection_zero_field(theta: float) -> Connection:
    a_t, a_p = zero_field_coefficients(theta)
    return Connection(a_t, a_p, Basis.PLUS_MINUS)


def analytic_connection_degenerate(theta: float, sign: int = 1) -> Connection:
    a_t, a_p = degenerate_coefficients(theta, sign)
    return Connection(a_t, a_p, Basis.PLUS_ZERO if sign == 1 else Basis.MINUS_ZERO)


# --- finite differences --------------------------------------------------------

def _pair_frame(theta, phi, pair):
    return frame_rotation(theta, phi)[..., :, list(pair)]


def _check_poles(theta) -> None:
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) < POLE_MARGIN) or np.any(np.abs(theta - np.pi) < POLE_MARGIN):
        raise PoleError("numeric connection is undefined within 1e-6 of a pole")


def numeric_coefficients(theta, phi, pair, h: float = 1e-4):
    """Central-difference ``<a|d_alpha|b>`` on the rotated frame; vectorized."""
    if not 0 < h <= 1e-2:
        raise ValueError("finite-difference step must lie in (0, 1e-2]")
    _check_poles(theta)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    bra = dagger(_pair_frame(theta, phi, pair))
    d_theta = (_pair_frame(theta + h, phi, pair) - _pair_frame(theta - h, phi, pair)) / (2 * h)
    d_phi = (_pair_frame(theta, phi + h, pair) - _pair_frame(theta, phi - h, pair)) / (2 * h)
    return bra @ d_theta, bra @ d_phi


def numeric_connection(theta: float, phi: float, params: NvParams, h: float = 1e-4) -> Connection:
    """Berry connection of the near-degenerate pair of ``params`` by finite differences."""
    basis = Basis.for_params(params)
    a_t, a_p = numeric_coefficients(theta, phi, _BASIS_TO_PAIR[basis], h)
    return Connection(a_t, a_p, basis)


# --- sources for path integration --------------------------------------------

class AnalyticSource:
    """Closed-form connection, callable as ``source(theta, phi) -> (A_theta, A_phi)``."""

    def __init__(self, basis: Basis = Basis.PLUS_ZERO):
        self.basis = basis

    def __call__(self, theta, phi):
        if self.basis is Basis.PLUS_MINUS:
            a_t, a_p = zero_field_coefficients(theta)
        else:
            a_t, a_p = degenerate_coefficients(theta, 1 if self.basis is Basis.PLUS_ZERO else -1)
        shape = np.broadcast_shapes(np.shape(theta), np.shape(phi))
        return np.broadcast_to(a_t, shape + (2, 2)), np.broadcast_to(a_p, shape + (2, 2))

    def __repr__(self):
        return f"AnalyticSource({self.basis.value})"


class NumericSource:
    """Finite-difference connection of the pair selected by ``params``."""

    def __init__(self, params: NvParams | None = None, h: float = 1e-4):
        self.params = params or NvParams()
        self.basis = Basis.for_params(self.params)
        self.h = h

    def __call__(self, theta, phi):
        return numeric_coefficients(theta, phi, _BASIS_TO_PAIR[self.basis], self.h)

    def __repr__(self):
        return f"NumericSource({self.basis.value}, h={self.h:g})"


class GaugeTransformed:
    """Connection seen in the frame ``|a'> = sum_b |b> V_ba`` for a fixed unitary ``V``."""

    def __init__(self, source, v: np.ndarray):
        self.source = source
        self.v = np.asarray(v, dtype=complex)
        self.basis = getattr(source, "basis", None)

    def __call__(self, theta, phi):
        a_t, a_p = self.source(theta, phi)
        vd = dagger(self.v)
        return vd @ a_t @ self.v, vd @ a_p @ self.v


def source_for(kind: str, params: NvParams | None = None, h: float = 1e-4):
    """Build a connection source by name (``analytic`` or ``numeric``)."""
    params = params or NvParams()
    if kind == "analytic":
        return AnalyticSource(Basis.for_params(params))
    if kind == "numeric":
        return NumericSource(params, h)
    raise ValueError(f"unknown connection kind {kind!r}")
