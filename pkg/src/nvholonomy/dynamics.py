"""Time-ordered Schrodinger evolution of the three-level NV ground state.

In reduced time ``s = t/T`` the state obeys ``i d/ds psi = T H(s) psi``. The
propagator over each step is the exact exponential of the Hamiltonian frozen
at the step midpoint, ``exp(-i T H(s_mid) ds)``. Because ``H`` is the rotated
diagonal body-frame Hamiltonian, each factor is ``W diag(e^{-i T E ds}) W^+``
with ``W`` the frame rotation, so every step is unitary to machine precision.

A path with several segments spends an equal share of the reduced time on
each segment.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .connection import AnalyticSource, Basis
from .hamiltonian import NvParams, body_energies, degenerate_pair
from .holonomy import DEFAULT_STEPS, Holonomy, wilson_line
from .paths import SpherePath
from .spin_algebra import SpinState, dagger, frame_rotation, ordered_product

MAX_PHASE_STEP = 0.1    # largest T*ds allowed per step; |E| <= ~2
MIN_STEPS = 100
CHUNK = 1 << 15


class StepStabilityError(ValueError):
    pass


def steps_for(total_time: float, min_steps: int = 1000) -> int:
    """Smallest step count satisfying the ``T/n <= 0.1`` rule, at least ``min_steps``."""
    return max(min_steps, math.ceil(total_time / MAX_PHASE_STEP))


@dataclass(frozen=True)
class EvolutionConfig:
    """One evolution along ``path``.

    ``total_time`` is in units of ``1/D``. ``delta`` is the residual splitting
    of the near-degenerate pair; ``epsilon_sign=-1`` pairs ``|+1>`` with
    ``|0>`` and ``+1`` pairs ``|-1>`` with ``|0>``. ``initial`` defaults to the
    first state of the pair rotated to the start of the path.
    """

    total_time: float
    path: SpherePath
    delta: float = 0.0
    n_steps: int | None = None
    initial: SpinState | None = None
    epsilon_sign: int = -1
    params: NvParams = field(init=False, repr=False)

    def __post_init__(self):
        if not self.total_time > 0:
            raise StepStabilityError("total_time must be positive")
        n = self.n_steps if self.n_steps is not None else steps_for(self.total_time)
        if n < MIN_STEPS:
            raise StepStabilityError(f"n_steps must be at least {MIN_STEPS}")
        if self.total_time / n > MAX_PHASE_STEP:
            raise StepStabilityError(
                f"T/n_steps = {self.total_time / n:g} exceeds {MAX_PHASE_STEP}; "
                f"use at least {steps_for(self.total_time, MIN_STEPS)} steps"
            )
        object.__setattr__(self, "n_steps", int(n))
        params = NvParams.from_delta(self.delta, self.epsilon_sign)
        params.check_degenerate_regime()
        object.__setattr__(self, "params", params)
        if self.initial is None:
            theta0, phi0 = self.path.start()
            first = degenerate_pair(params)[0]
            object.__setattr__(self, "initial", SpinState(frame_rotation(theta0, phi0)[:, first]))
        elif self.initial.dim != 3:
            raise ValueError("initial state must be a spin-1 state")

    @property
    def epsilon(self) -> float:
        return self.params.epsilon


@dataclass(frozen=True)
class StepGrid:
    """Midpoint angles, reduced-time midpoints and step widths of a path."""

    theta: np.ndarray
    phi: np.ndarray
    s_mid: np.ndarray
    ds: np.ndarray


def step_grid(path: SpherePath, n_steps: int) -> StepGrid:
    m = len(path.segments)
    counts = [n_steps // m + (1 if k < n_steps % m else 0) for k in range(m)]
    th, ph, s_mid, ds = [], [], [], []
    for k, (seg, n) in enumerate(zip(path.segments, counts)):
        local = (np.arange(n) + 0.5) / n
        t, p = seg.at(local)
        th.append(t)
        ph.append(p)
        s_mid.append((k + local) / m)
        ds.append(np.full(n, 1.0 / (m * n)))
    return StepGrid(*(np.concatenate(a) for a in (th, ph, s_mid, ds)))


def propagate(grid: StepGrid, total_time: float, epsilon, psi0: np.ndarray) -> np.ndarray:
    """Apply the ordered step propagators to ``psi0``.

    ``epsilon`` is a scalar or one value per step.
    """
    eps = np.broadcast_to(np.asarray(epsilon, dtype=float), grid.ds.shape)
    psi = np.asarray(psi0, dtype=complex).copy()
    for start in range(0, len(grid.ds), CHUNK):
        sl = slice(start, start + CHUNK)
        w = frame_rotation(grid.theta[sl], grid.phi[sl])
        phases = np.exp(-1j * total_time * grid.ds[sl, None] * body_energies(eps[sl]))
        steps = (w * phases[:, None, :]) @ dagger(w)
        psi = nearest_unitary(ordered_product(steps)) @ psi
    return psi


def nearest_unitary(m: np.ndarray) -> np.ndarray:
    """Polar factor of ``m``; strips accumulated rounding from a long product."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def evolve(config: EvolutionConfig) -> SpinState:
    """Final state of the evolution described by ``config``."""
    grid = step_grid(config.path, config.n_steps)
    psi = propagate(grid, config.total_time, config.epsilon, config.initial.amplitudes)
    return SpinState(psi)


def frame_populations(state: SpinState | np.ndarray, theta: float, phi: float) -> np.ndarray:
    """Populations of the rotated ``(|+1>, |0>, |-1>)`` states at ``(theta, phi)``."""
    amps = state.amplitudes if isinstance(state, SpinState) else np.asarray(state)
    return np.abs(dagger(frame_rotation(theta, phi)) @ amps) ** 2


def final_populations(config: EvolutionConfig, state: SpinState | None = None) -> np.ndarray:
    """Rotated-frame populations at the end of the path (evolving if needed)."""
    state = state if state is not None else evolve(config)
    return frame_populations(state, *config.path.end())


@dataclass(frozen=True)
class SweepRow:
    delta: float
    total_time: float
    pop_p1: float
    pop_0: float
    pop_m1: float


def degeneracy_sweep(deltas, times, path: SpherePath, *, epsilon_sign: int = -1,
                     min_steps: int = 1000, workers: int | None = None) -> list[SweepRow]:
    """Final rotated-frame populations over a ``delta x T`` grid.

    Rows come out delta-major in input order, whatever ``workers`` is.
    """
    deltas, times = list(deltas), list(times)
    if not deltas or not times:
        raise ValueError("deltas and times must be non-empty")
    grid_points = [(d, t) for d in deltas for t in times]

    def run(point):
        d, t = point
        cfg = EvolutionConfig(t, path, delta=d, n_steps=steps_for(t, min_steps),
                              epsilon_sign=epsilon_sign)
        p = final_populations(cfg)
        return SweepRow(float(d), float(t), float(p[0]), float(p[1]), float(p[2]))

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, grid_points))
    return [run(p) for p in grid_points]


def adiabatic_reference(path: SpherePath, epsilon_sign: int = -1,
                        n_steps: int = DEFAULT_STEPS) -> Holonomy:
    """Holonomy predicted for perfectly degenerate, perfectly adiabatic motion.

    ``|U[0, 0]|^2`` is the population left in the first state of the pair.
    """
    basis = Basis.PLUS_ZERO if epsilon_sign == -1 else Basis.MINUS_ZERO
    return wilson_line(path, AnalyticSource(basis), n_steps)

