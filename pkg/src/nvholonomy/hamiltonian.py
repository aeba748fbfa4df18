"""Normalized NV ground-state Hamiltonian and its instantaneous eigenframe.

Energies are in units of the zero-field splitting ``D``. With the field
along the NV axis the body-frame Hamiltonian is ``Sz^2 + eps Sz``, i.e.
``diag(1 + eps, 0, 1 - eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin_algebra import MINUS, PLUS, ZERO, dagger, frame_rotation

from .units import D_ZERO_FIELD_HZ

# how far |delta| may stray before the |0>/|+-1> pairing stops meaning anything
DEGENERATE_REGIME = 0.5


class GaugeFixingError(ValueError):
    pass


@dataclass(frozen=True)
class NvParams:
    """Field parameters; ``epsilon = gamma B_z' / D``.

    ``delta = 1 + epsilon`` is the residual |+1>/|0> splitting near
    ``epsilon = -1``. Use :meth:`from_delta` to build from the splitting.
    """

    epsilon: float = -1.0
    d_physical_hz: float = D_ZERO_FIELD_HZ

    @classmethod
    def from_delta(cls, delta: float, sign: int = -1) -> NvParams:
        """Parameters with ``|+1>`` (sign=-1) or ``|-1>`` (sign=+1) near ``|0>``."""
        if sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        return cls(epsilon=sign * (1.0 - delta))

    @property
    def delta(self) -> float:
        return 1.0 + self.epsilon

    @property
    def splitting(self) -> float:
        """Signed gap between |0> and whichever of |+-1> sits next to it."""
        return 1.0 - abs(self.epsilon)

    def check_degenerate_regime(self) -> None:
        if abs(self.splitting) > DEGENERATE_REGIME:
            raise ValueError(
                f"splitting {self.splitting:g} exceeds {DEGENERATE_REGIME}; "
                "no |+-1> level is near-degenerate with |0>"
            )


def body_energies(epsilon):
    """Diagonal of the body-frame Hamiltonian; broadcasts over ``epsilon``."""
    eps = np.asarray(epsilon, dtype=float)
    return np.stack([1.0 + eps, np.zeros_like(eps), 1.0 - eps], axis=-1)


def body_frame_hamiltonian(params: NvParams) -> np.ndarray:
    return np.diag(body_energies(params.epsilon)).astype(complex)


def lab_frame_hamiltonian(theta: float, phi: float, params: NvParams) -> np.ndarray:
    """``H = R H' R^-1`` for the crystal axis at ``(theta, phi)``."""
    w = frame_rotation(theta, phi)
    return (w * body_energies(params.epsilon)) @ dagger(w)


def degenerate_pair(params: NvParams) -> tuple[int, int]:
    """Body-frame basis indices of the two closest levels.

    ``(+1, 0)`` near ``eps = -1``, ``(-1, 0)`` near ``eps = +1`` and
    ``(+1, -1)`` near zero field.
    """
    eps = params.epsilon
    if abs(eps) <= DEGENERATE_REGIME:
        return PLUS, MINUS
    return (PLUS, ZERO) if eps < 0 else (MINUS, ZERO)


@dataclass(frozen=True)
class Frame:
    """Instantaneous eigenbasis; ``vectors[:, k]`` has energy ``energies[k]``."""

    vectors: np.ndarray
    energies: np.ndarray

    def state(self, k: int) -> np.ndarray:
        return self.vectors[:, k]


def instantaneous_frame(theta: float, phi: float, params: NvParams, rotated: bool = True) -> Frame:
    """Eigenframe of the lab-frame Hamiltonian at ``(theta, phi)``.

    With ``rotated=True`` the frame is the body-frame basis carried to
    ``(theta, phi)`` by :func:`~nvholonomy.spin_algebra.frame_rotation`; the
    near-degenerate pair comes first (see :func:`degenerate_pair`), then the
    remaining level. This frame is smooth in both angles away from the poles
    and is well defined even at exact degeneracy.

    With ``rotated=False`` the eigensolver output is returned in ascending
    energy, each vector's phase fixed so that its largest component (lowest
    index on ties) is real positive. Inside an exactly degenerate subspace
    that choice is arbitrary; use the rotated frame there.
    """
    if rotated:
        a, b = degenerate_pair(params)
        order = [a, b, 3 - a - b]
        w = frame_rotation(theta, phi)
        return Frame(w[:, order], body_energies(params.epsilon)[order])

    h = lab_frame_hamiltonian(theta, phi, params)
    w, v = np.linalg.eigh(h)
    vecs = np.empty_like(v)
    for k in range(3):
        col = v[:, k]
        mags = np.abs(col)
        pivot = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        if mags[pivot] < 1e-10:
            raise GaugeFixingError(f"pivot component of eigenvector {k} vanishes")
        vecs[:, k] = col * (abs(col[pivot]) / col[pivot])
    return Frame(vecs, w)
