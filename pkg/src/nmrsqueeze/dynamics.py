"""Density-matrix time evolution with phenomenological T1/T2 relaxation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from nmrsqueeze.spin_algebra import (
    ComplexMatrix,
    SpinQuantum,
    eig_hermitian,
    propagator_from_eig,
    spin_operators,
)

# steps per shortest resolved timescale
STEPS_PER_TIMESCALE = 50


@dataclass(frozen=True)
class RelaxationSpec:
    """Relaxation times in seconds; ``None`` means no decay on that channel."""

    T1: Optional[float] = None
    T2: Optional[float] = None

    def __post_init__(self):
        for name in ("T1", "T2"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be > 0 s, got {value!r}")
        if self.T1 is not None and self.T2 is not None and self.T2 > 2 * self.T1:
            raise ValueError(f"unphysical relaxation: T2={self.T2} > 2*T1={2 * self.T1}")

    @property
    def active(self) -> bool:
        return self.T1 is not None or self.T2 is not None


NO_RELAXATION = RelaxationSpec()


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt`` for ``k = 0 .. n_steps``."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")

    @classmethod
    def spanning(cls, t_max: float, n_samples: int) -> "TimeGrid":
        """``n_samples`` points covering ``[0, t_max]`` inclusive."""
        return cls(t_max / (n_samples - 1), n_samples - 1)

    @property
    def times(self) -> NDArray[np.float64]:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def t_max(self) -> float:
        return self.dt * self.n_steps


def max_step(relax: RelaxationSpec, omegaQ: float) -> float:
    """Largest ``dt`` allowed by the resolution rule ``min(T2, 2 pi / omegaQ) / 50``."""
    scales = []
    if relax.T2 is not None:
        scales.append(relax.T2)
    if relax.T1 is not None and relax.T2 is None:
        scales.append(relax.T1)
    if omegaQ > 0:
        scales.append(2 * np.pi / omegaQ)
    return min(scales) / STEPS_PER_TIMESCALE if scales else np.inf


def check_resolution(grid: TimeGrid, relax: RelaxationSpec, omegaQ: float) -> None:
    if relax.active and grid.dt > max_step(relax, omegaQ) * (1 + 1e-12):
        raise ValueError(
            f"dt={grid.dt:.3e} s too coarse for relaxation; need dt <= {max_step(relax, omegaQ):.3e} s"
        )


@dataclass(frozen=True)
class Trajectory:
    """``states[k]`` is the density matrix at ``times[k]``."""

    times: NDArray[np.float64]
    states: NDArray[np.complex128]

    def __len__(self) -> int:
        return len(self.times)


def evolve_states(rho0: np.ndarray, H: np.ndarray, times: np.ndarray) -> NDArray[np.complex128]:
    """``U(t) rho0 U(t)^dagger`` for every ``t`` from a single eigendecomposition."""
    w, V = eig_hermitian(H)
    r = V.conj().T @ rho0 @ V
    gaps = w[:, None] - w[None, :]
    phases = np.exp(-1j * np.asarray(times)[:, None, None] * gaps)
    return np.einsum("ia,kab,jb->kij", V, r * phases, V.conj(), optimize=True)


def propagate_unitary(rho0: np.ndarray, H: np.ndarray, grid: TimeGrid) -> Trajectory:
    times = grid.times
    return Trajectory(times, evolve_states(rho0, H, times))


def relaxation_step(
    rho: np.ndarray, dt: float, relax: RelaxationSpec, rho_eq: np.ndarray
) -> ComplexMatrix:
    """Damp coherences by ``exp(-dt/T2)`` and pull populations toward ``rho_eq`` by ``exp(-dt/T1)``.

    Acts in the Iz eigenbasis, which is the working basis.
    """
    out = np.array(rho, dtype=complex, copy=True)
    if relax.T2 is not None:
        off = ~np.eye(rho.shape[0], dtype=bool)
        out[off] *= np.exp(-dt / relax.T2)
    if relax.T1 is not None:
        pops = np.diag(rho).real
        target = np.diag(rho_eq).real
        new = target + (pops - target) * np.exp(-dt / relax.T1)
        # keep the trace bit-exact
        new += (pops.sum() - new.sum()) / len(new)
        out[np.diag_indices_from(out)] = new
    return out


def propagate_relaxed(
    rho0: np.ndarray,
    H: np.ndarray,
    grid: TimeGrid,
    relax: RelaxationSpec,
    rho_eq: Optional[np.ndarray] = None,
) -> Trajectory:
    """First-order splitting: unitary step ``exp(-i H dt)`` then :func:`relaxation_step`."""
    if not relax.active:
        return propagate_unitary(rho0, H, grid)
    if rho_eq is None:
        rho_eq = np.eye(rho0.shape[0]) / rho0.shape[0]
    U = propagator_from_eig(eig_hermitian(H), grid.dt)
    Ud = U.conj().T
    states = np.empty((grid.n_steps + 1,) + rho0.shape, dtype=complex)
    rho = np.array(rho0, dtype=complex)
    states[0] = rho
    for k in range(1, grid.n_steps + 1):
        rho = relaxation_step(U @ rho @ Ud, grid.dt, relax, rho_eq)
        states[k] = rho
    return Trajectory(grid.times, states)


def fid(rho0: np.ndarray, H: np.ndarray, grid: TimeGrid, T2: Optional[float]) -> NDArray[np.complex128]:
    """Free induction decay ``Tr(rho(t) I+) exp(-t/T2)`` under unitary evolution."""
    spin = SpinQuantum(rho0.shape[0] - 1)
    Iplus = spin_operators(spin).Iplus
    times = grid.times
    states = evolve_states(rho0, H, times)
    signal = np.einsum("kij,ji->k", states, Iplus)
    if T2 is not None:
        signal = signal * np.exp(-times / T2)
    return signal
