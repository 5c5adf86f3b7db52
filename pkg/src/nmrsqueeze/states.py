"""Initial states and state-comparison observables.

Covers coherent spin states, Boltzmann thermal equilibrium, the rotated
thermal-equilibrium state produced by a pi/2 pulse, the normalized
Hilbert-Schmidt fidelity and the Husimi Q function.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.typing import NDArray
from scipy.constants import hbar as HBAR, k as K_B
from scipy.linalg import expm

from nmrsqueeze.spin_algebra import (
    ComplexMatrix,
    SpinQuantum,
    eig_hermitian,
    rotation,
    spin_operators,
)



@dataclass(frozen=True)
class EnvironmentSpec:
    """Static field, lattice temperature and gyromagnetic ratio.

    ``gamma_n`` is in Hz/T (cycles, not radians), e.g. 11.26e6 for 23Na.
    """

    B0: float
    temperature: float
    gamma_n: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0 K, got {self.temperature!r}")
        if self.B0 < 0:
            raise ValueError(f"B0 must be >= 0 T, got {self.B0!r}")
        if not self.gamma_n > 0:
            raise ValueError(f"gamma_n must be > 0, got {self.gamma_n!r}")

    @property
    def omega0(self) -> float:
        """Larmor angular frequency in rad/s."""
        return 2 * np.pi * self.gamma_n * self.B0


@dataclass(frozen=True)
class HusimiGrid:
    """``q_values[i, j]`` is Q at ``alpha = x_values[i] + 1j * y_values[j]``."""

    x_values: NDArray[np.float64]
    y_values: NDArray[np.float64]
    q_values: NDArray[np.float64]


def pure_density(psi: np.ndarray) -> ComplexMatrix:
    return np.outer(psi, psi.conj())


def css_state(spin: SpinQuantum, theta0: float, phi0: float) -> NDArray[np.complex128]:
    """Coherent spin state pointing along ``(theta0, phi0)``.

    Amplitude on ``|I,m>`` is ``C(2I, I+m)^(1/2) cos(theta0/2)^(I+m)
    sin(theta0/2)^(I-m) exp(i (I-m) phi0)``.
    """
    if not 0 <= theta0 <= np.pi:
        raise ValueError(f"theta0 must lie in [0, pi], got {theta0!r}")
    c, s = np.cos(theta0 / 2), np.sin(theta0 / 2)
    amps = np.empty(spin.dim, dtype=complex)
    for k in range(spin.dim):
        # k = I - m, the number of lowering steps from |I,I>
        amps[k] = np.sqrt(comb(spin.two_I, k)) * c ** (spin.two_I - k) * s**k * np.exp(1j * k * phi0)
    return amps / np.linalg.norm(amps)


def css_unnormalized_exponential(spin: SpinQuantum, alpha: complex) -> NDArray[np.complex128]:
    """Normalized ``exp(alpha I-) |I,I>``, computed by matrix exponential."""
    top = np.zeros(spin.dim, dtype=complex)
    top[0] = 1.0
    psi = expm(alpha * spin_operators(spin).Iminus) @ top
    return psi / np.linalg.norm(psi)


def thermal_state(H_total: np.ndarray, env: EnvironmentSpec) -> ComplexMatrix:
    """Exact Boltzmann state ``exp(-hbar H / kB T) / Z`` for ``H`` in rad/s."""
    if not env.temperature > 0:
        raise ValueError("temperature must be > 0 K")
    w, V = eig_hermitian(H_total)
    beta = HBAR / (K_B * env.temperature)
    # shift by the ground energy; Z cancels the constant
    weights = np.exp(-beta * (w - w[0]))
    weights /= weights.sum()
    rho = (V * weights) @ V.conj().T
    return (rho + rho.conj().T) / 2


def polarization_factor(env: EnvironmentSpec) -> float:
    """``hbar omega0 / (kB T)``; diagnostic only, never used to build states."""
    return HBAR * env.omega0 / (K_B * env.temperature)


def pi2_pulse(spin: SpinQuantum) -> ComplexMatrix:
    """pi/2 pulse along y taking a +Iz deviation to -Ix.

    Rotation by -pi/2 about +y, i.e. ``exp(+i pi/2 Iy)``.
    """
    return rotation(spin, -np.pi / 2, (np.pi / 2, np.pi / 2))


def rtes(rho_thermal: np.ndarray) -> ComplexMatrix:
    """Rotated thermal-equilibrium state ``R rho R^dagger``."""
    spin = SpinQuantum(rho_thermal.shape[0] - 1)
    R = pi2_pulse(spin)
    return R @ rho_thermal @ R.conj().T


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized overlap ``Tr(ab) / sqrt(Tr(a^2) Tr(b^2))`` of Hermitian matrices."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na == 0 or nb == 0:
        raise ValueError("fidelity undefined for a zero matrix")
    return float(np.vdot(a, b).real / np.sqrt(na * nb))


def deviation(rho: np.ndarray) -> ComplexMatrix:
    """Traceless part ``rho - Tr(rho) 1/dim``."""
    dim = rho.shape[0]
    return rho - np.trace(rho) / dim * np.eye(dim)


def fidelity_deviation(target: np.ndarray, rho: np.ndarray) -> float:
    """Fidelity of ``target`` with the deviation part of ``rho`` only."""
    return fidelity(target, deviation(rho))


def coherent_amplitudes(spin: SpinQuantum, alpha: np.ndarray) -> NDArray[np.complex128]:
    """Normalized coherent-state amplitudes for an array of ``alpha``; shape ``alpha.shape + (dim,)``."""
    alpha = np.asarray(alpha, dtype=complex)
    k = np.arange(spin.dim)
    binom = np.sqrt([comb(spin.two_I, int(j)) for j in k])
    amps = binom * alpha[..., None] ** k
    return amps / np.sqrt(1 + np.abs(alpha[..., None]) ** 2) ** spin.two_I


def husimi_q(
    rho: np.ndarray,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    n_points: int,
) -> HusimiGrid:
    """Bare overlap ``<alpha|rho|alpha>`` on an ``n_points x n_points`` grid, ``alpha = x + iy``."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    spin = SpinQuantum(rho.shape[0] - 1)
    xs = np.linspace(*x_range, n_points)
    ys = np.linspace(*y_range, n_points)
    alpha = xs[:, None] + 1j * ys[None, :]
    amps = coherent_amplitudes(spin, alpha)
    q = np.einsum("...i,ij,...j->...", amps.conj(), rho, amps).real
    # round-off can dip a hair below zero where Q vanishes
    return HusimiGrid(xs, ys, np.clip(q, 0.0, None))


@dataclass(frozen=True)
class InitialState:
    """``kind`` is ``"css"``, ``"thermal"`` or ``"rtes"``; angles in radians apply to CSS only."""

    kind: str = "css"
    theta0: float = np.pi / 2
    phi0: float = np.pi

    def __post_init__(self):
        if self.kind not in ("css", "thermal", "rtes"):
            raise ValueError(f"unknown initial state kind {self.kind!r}")


def prepare_state(initial: InitialState, spin: SpinQuantum, H_static: np.ndarray, env: EnvironmentSpec) -> ComplexMatrix:
    """Density matrix for an initial-state choice; thermal states use ``H_static`` (rad/s)."""
    if initial.kind == "css":
        return pure_density(css_state(spin, initial.theta0, initial.phi0))
    rho = thermal_state(H_static, env)
    return rtes(rho) if initial.kind == "rtes" else rho
