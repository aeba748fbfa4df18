"""Monte Carlo robustness studies: axial field noise and path errors.

Every member of an ensemble draws from its own counter-based (Philox)
stream keyed by ``(seed, member)``, so results do not depend on how members
are scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import EvolutionConfig, frame_populations, propagate, step_grid
from .hamiltonian import body_energies, degenerate_pair
from .holonomy import abelian_loop_phase
from .paths import Segment, SpherePath
from .spin_algebra import SpinState

PERTURB_HARMONICS = 5
PERTURB_GRID = 10001

# stream tags keep noise and path draws independent for the same seed
_NOISE_STREAM = 0
_PATH_STREAM = 1


def member_rng(seed: int, member: int, stream: int = _NOISE_STREAM) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(member)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian white noise on ``epsilon``, piecewise constant over ``n_events`` intervals."""

    sigma: float
    n_events: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.n_events < 1:
            raise ValueError("n_events must be at least 1")


@dataclass(frozen=True)
class MemberResult:
    state: SpinState
    populations: np.ndarray
    relative_phase: float


@dataclass(frozen=True)
class EnsembleResult:
    """Per-level statistics of final rotated-frame populations.

    ``std_population`` uses the sample (n - 1) normalization.
    ``phase_mean``/``phase_std`` describe the dynamical phase accumulated
    between the two levels of the degenerate pair.
    """

    n_members: int
    mean_population: np.ndarray
    std_population: np.ndarray
    member_populations: np.ndarray
    phase_mean: float
    phase_std: float

    @classmethod
    def from_members(cls, members: list[MemberResult]) -> EnsembleResult:
        pops = np.array([m.populations for m in members])
        phases = np.array([m.relative_phase for m in members])
        return cls(
            n_members=len(members),
            mean_population=pops.mean(axis=0),
            std_population=pops.std(axis=0, ddof=1),
            member_populations=pops,
            phase_mean=float(phases.mean()),
            phase_std=float(phases.std(ddof=1)),
        )


def _run(config: EvolutionConfig, path: SpherePath, eps_steps) -> MemberResult:
    grid = step_grid(path, config.n_steps)
    eps = np.broadcast_to(np.asarray(eps_steps, dtype=float), grid.ds.shape)
    psi = propagate(grid, config.total_time, eps, config.initial.amplitudes)
    a, b = degenerate_pair(config.params)
    energies = body_energies(eps)
    phase = config.total_time * float(np.sum(grid.ds * (energies[:, a] - energies[:, b])))
    return MemberResult(SpinState(psi), frame_populations(psi, *path.end()), phase)


def noise_trace(config: EvolutionConfig, noise: NoiseSpec, member: int = 0) -> np.ndarray:
    """Per-step ``epsilon`` values for one ensemble member."""
    grid = step_grid(config.path, config.n_steps)
    kicks = member_rng(noise.seed, member).normal(0.0, noise.sigma, noise.n_events)
    event = np.minimum((grid.s_mid * noise.n_events).astype(int), noise.n_events - 1)
    return config.epsilon + kicks[event]


def noisy_member(config: EvolutionConfig, noise: NoiseSpec, member: int = 0) -> MemberResult:
    return _run(config, config.path, noise_trace(config, noise, member))


def noisy_evolve(config: EvolutionConfig, noise: NoiseSpec, member: int = 0) -> SpinState:
    """Evolve with ``epsilon(s) = epsilon_0 + kick_k`` on the k-th noise interval.

    The field stays locked to the NV axis, as for a magnet co-rotating with
    the crystal.
    """
    return noisy_member(config, noise, member).state


def _gather(fn, n_members: int, workers: int | None) -> list[MemberResult]:
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(n_members)))
    return [fn(k) for k in range(n_members)]


def ensemble_run(config: EvolutionConfig, noise: NoiseSpec, n_members: int = 50,
                 workers: int | None = None) -> EnsembleResult:
    if n_members < 2:
        raise ValueError("an ensemble needs at least two members")
    members = _gather(lambda k: noisy_member(config, noise, k), n_members, workers)
    return EnsembleResult.from_members(members)


# --- path perturbations ---------------------------------------------------------

def polar_perturbation(max_divergence: float, rng: np.random.Generator,
                       harmonics: int = PERTURB_HARMONICS):
    """Random smooth ``delta(s) = sum_k c_k sin(k pi s)`` with ``max|delta| = max_divergence``.

    The endpoints are pinned at zero so a perturbed loop still closes at the
    nominal start. The maximum is taken over a 10001-point grid in ``s``.
    Returns ``(delta, d_delta)`` as vectorized callables.
    """
    k = np.arange(1, harmonics + 1)
    coeffs = rng.normal(size=harmonics) / k
    grid = np.linspace(0.0, 1.0, PERTURB_GRID)
    peak = np.max(np.abs(np.sin(np.pi * np.outer(grid, k)) @ coeffs))
    coeffs = coeffs * (max_divergence / peak) if peak > 0 else coeffs * 0.0

    def delta(s):
        s = np.asarray(s, dtype=float)
        return np.sin(np.pi * np.multiply.outer(s, k)) @ coeffs

    def d_delta(s):
        s = np.asarray(s, dtype=float)
        return np.cos(np.pi * np.multiply.outer(s, k)) @ (np.pi * k * coeffs)

    return delta, d_delta


def perturbed_path(base: SpherePath, max_divergence: float, seed: int, member: int) -> SpherePath:
    """``base`` with a random polar-angle error of peak size ``max_divergence``."""
    if len(base.segments) != 1:
        raise ValueError("path perturbation needs a single-segment base path")
    if max_divergence < 0:
        raise ValueError("max_divergence must be non-negative")
    if max_divergence == 0:
        return base
    seg = base.segments[0]
    delta, d_delta = polar_perturbation(max_divergence, member_rng(seed, member, _PATH_STREAM))
    perturbed = Segment(
        theta=lambda s: seg.theta(s) + delta(s),
        phi=seg.phi,
        dtheta=lambda s: seg.dtheta(s) + d_delta(s),
        dphi=seg.dphi,
        label=f"perturbed({seg.label})",
    )
    return SpherePath((perturbed,), label=f"{base.label}~{member}")


def perturbed_path_study(config: EvolutionConfig, max_divergence: float, n_members: int = 50,
                         seed: int = 0, workers: int | None = None) -> EnsembleResult:
    """Ensemble over random polar-angle errors of the path in ``config``."""
    if n_members < 2:
        raise ValueError("an ensemble needs at least two members")
    base = config.path

    def member(k):
        path = perturbed_path(base, max_divergence, seed, k)
        return _run(config, path, config.epsilon)

    return EnsembleResult.from_members(_gather(member, n_members, workers))


def abelian_relative_shifts(base: SpherePath, max_divergence: float, n_members: int,
                            seed: int, n_steps: int = 4096) -> np.ndarray:
    """Relative change of the enclosed solid angle for each perturbed member.

    The zero-field holonomy is ``diag(e^{+i w}, e^{-i w})`` with
    ``w = int cos(theta) dphi``; for a loop the solid angle is ``2 pi - w``.
    """
    w0 = abelian_loop_phase(base, n_steps)
    solid0 = 2 * np.pi - w0
    out = []
    for k in range(n_members):
        w = abelian_loop_phase(perturbed_path(base, max_divergence, seed, k), n_steps)
        out.append(abs(w - w0) / abs(solid0))
    return np.array(out)
