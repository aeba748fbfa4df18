"""Small-matrix complex linear algebra for spin-1 systems.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` or ``(3, 3)``. The
spin-1 basis is ordered ``(|+1>, |0>, |-1>)`` throughout the package, so
``Sz = diag(1, 0, -1)``. We work with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

SQRT2 = np.sqrt(2.0)

# basis indices
PLUS, ZERO, MINUS = 0, 1, 2

I2 = np.eye(2, dtype=complex)
I3 = np.eye(3, dtype=complex)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def spin1_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Sx, Sy, Sz)`` for spin 1 in the ``(|+1>, |0>, |-1>)`` basis."""
    sx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
    sy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / SQRT2
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return sx, sy, sz


SX, SY, SZ = spin1_operators()
for _op in (SX, SY, SZ):
    _op.setflags(write=False)


def check_matrix(m: np.ndarray) -> np.ndarray:
    """Validate a 2x2 or 3x3 finite matrix and return it as complex."""
    m = np.asarray(m, dtype=complex)
    if m.shape not in ((2, 2), (3, 3)):
        raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def unitarity_residual(m: np.ndarray) -> float:
    """Max-norm of ``M^dagger M - I``."""
    m = np.asarray(m)
    return float(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[-1]))))


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    return unitarity_residual(m) <= tol


def is_anti_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return float(np.max(np.abs(m + dagger(m)))) <= tol


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)))) <= tol


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def expm_2x2(m: np.ndarray) -> np.ndarray:
    """Closed-form exponential of (a stack of) 2x2 complex matrices.

    Writes ``M = a I + b.sigma`` with complex ``a`` and ``b`` and uses
    ``exp(M) = e^a (cosh(q) I + sinh(q)/q b.sigma)`` where ``q^2 = b.b``.
    Works on arrays of shape ``(..., 2, 2)``.
    """
    m = np.asarray(m, dtype=complex)
    a = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    bx = 0.5 * (m[..., 0, 1] + m[..., 1, 0])
    by = 0.5j * (m[..., 0, 1] - m[..., 1, 0])
    bz = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    q = np.sqrt(bx * bx + by * by + bz * bz)
    small = np.abs(q) < 1e-4
    q_safe = np.where(small, 1.0, q)
    q2 = q * q
    # Taylor branch for q -> 0; error O(q^8)
    cosh_q = np.where(small, 1 + q2 / 2 + q2 * q2 / 24 + q2**3 / 720, np.cosh(q_safe))
    sinhc = np.where(small, 1 + q2 / 6 + q2 * q2 / 120 + q2**3 / 5040, np.sinh(q_safe) / q_safe)
    ea = np.exp(a)
    out = np.empty(m.shape, dtype=complex)
    out[..., 0, 0] = ea * (cosh_q + sinhc * bz)
    out[..., 1, 1] = ea * (cosh_q - sinhc * bz)
    out[..., 0, 1] = ea * sinhc * (bx - 1j * by)
    out[..., 1, 0] = ea * sinhc * (bx + 1j * by)
    return out


def mat_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential of a 2x2 or 3x3 complex matrix.

    2x2 inputs use the closed-form Pauli decomposition. 3x3 inputs that are
    Hermitian or anti-Hermitian go through a unitary eigendecomposition so
    that ``exp(iH)`` is unitary to machine precision; anything else falls back
    to scaling-and-squaring Pade (``scipy.linalg.expm``).
    """
    m = check_matrix(m)
    if m.shape == (2, 2):
        return expm_2x2(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    if is_anti_hermitian(m, 1e-14 * scale):
        # M = iH with H Hermitian
        w, v = np.linalg.eigh(-1j * m)
        return (v * np.exp(1j * w)) @ dagger(v)
    if is_hermitian(m, 1e-14 * scale):
        w, v = np.linalg.eigh(m)
        return (v * np.exp(w)) @ dagger(v)
    return expm(m)


def wigner_d1(theta):
    """Real spin-1 matrix ``exp(-i theta Sy)``; broadcasts over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    sr = s / SQRT2
    out = np.empty(theta.shape + (3, 3))
    out[..., 0, 0] = out[..., 2, 2] = 0.5 * (1 + c)
    out[..., 0, 2] = out[..., 2, 0] = 0.5 * (1 - c)
    out[..., 0, 1] = out[..., 1, 2] = -sr
    out[..., 1, 0] = out[..., 2, 1] = sr
    out[..., 1, 1] = c
    return out


def frame_rotation(theta, phi):
    """``exp(-i phi Sz) exp(-i theta Sy)``, vectorized over angle arrays.

    Its columns are the body-frame basis states carried to the orientation
    ``(theta, phi)``. Unlike :func:`rotation_operator` there is no trailing
    ``exp(+i phi Sz)``, so the columns carry no ``e^{i m phi}`` phases; both
    conjugate a diagonal body-frame Hamiltonian to the same lab-frame matrix.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    d = wigner_d1(theta)
    phases = np.exp(-1j * np.multiply.outer(phi, np.array([1.0, 0.0, -1.0])))
    return phases[..., :, None] * d


def rotation_operator(theta: float, phi: float) -> np.ndarray:
    """``R = exp(-i phi Sz) exp(-i theta Sy) exp(+i phi Sz)``.

    Maps the lab ``z`` axis onto the NV axis at polar angle ``theta`` and
    azimuth ``phi``.
    """
    phi = float(np.mod(phi, 2 * np.pi))
    back = np.exp(1j * phi * np.array([1.0, 0.0, -1.0]))
    return frame_rotation(theta, phi) * back[None, :]


def ordered_product(mats: np.ndarray, chunk: int = 1 << 15) -> np.ndarray:
    """Ordered product ``M[n-1] ... M[1] M[0]`` of a stack of square matrices.

    Later entries multiply on the left. Reduction is a pairwise tree inside
    fixed-size chunks, so the result depends only on the input.
    """
    mats = np.asarray(mats)
    dim = mats.shape[-1]
    total = np.eye(dim, dtype=complex)
    for start in range(0, len(mats), chunk):
        block = mats[start:start + chunk]
        while len(block) > 1:
            if len(block) % 2:
                block = np.concatenate([block, np.eye(dim, dtype=complex)[None]])
            block = block[1::2] @ block[0::2]
        total = block[0] @ total
    return total


@dataclass(frozen=True)
class SpinState:
    """Normalized state vector; spin-1 amplitudes are ordered ``(+1, 0, -1)``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape not in ((2,), (3,)):
            raise ValueError(f"state must have 2 or 3 amplitudes, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state has non-finite amplitudes")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(amps)!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    @classmethod
    def basis(cls, index: int, dim: int = 3) -> SpinState:
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2
