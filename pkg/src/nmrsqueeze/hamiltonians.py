"""Zeeman and quadrupole Hamiltonians, Euler rotations and rotating-frame averages.

All Hamiltonians are returned in rad/s.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from nmrsqueeze.spin_algebra import ComplexMatrix, SpinQuantum, euler_rotation, spin_operators


@dataclass(frozen=True)
class HamiltonianSpec:
    """Zeeman frequency, quadrupole coupling, asymmetry and PAS orientation.

    ``euler`` is ``(alphaQ, betaQ, gammaQ)`` in radians, active ZYZ.
    """

    omega0: float = 0.0
    omegaQ: float = 0.0
    eta: float = 0.0
    euler: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if self.omegaQ < 0:
            raise ValueError(f"omegaQ must be >= 0, got {self.omegaQ!r}")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be >= 0, got {self.omega0!r}")
        object.__setattr__(self, "euler", tuple(float(a) for a in self.euler))

    @classmethod
    def from_nuQ(cls, nuQ: float, **kwargs) -> "HamiltonianSpec":
        """Build from the quadrupole splitting ``nuQ = 3 omegaQ / 2 pi`` in Hz."""
        return cls(omegaQ=2 * np.pi * nuQ / 3, **kwargs)

    @property
    def nuQ(self) -> float:
        # I = 3/2, eta = 0 convention, kept regardless of eta
        return 3 * self.omegaQ / (2 * np.pi)


def zeeman_hamiltonian(spec: HamiltonianSpec, spin: SpinQuantum) -> ComplexMatrix:
    """``-omega0 Iz``: m = +I is the low-energy level."""
    return -spec.omega0 * spin_operators(spin).Iz


def quadrupole_pas(spec: HamiltonianSpec, spin: SpinQuantum) -> ComplexMatrix:
    """Traceless quadrupole coupling in the EFG principal axes."""
    Ix, Iy, Iz, _, _ = spin_operators(spin)
    I = spin.I
    H = 3 * Iz @ Iz - I * (I + 1) * np.eye(spin.dim) + spec.eta * (Ix @ Ix - Iy @ Iy)
    return spec.omegaQ / 2 * H


def euler_rotate(H_pas: np.ndarray, euler: tuple[float, float, float], spin: SpinQuantum) -> ComplexMatrix:
    R = euler_rotation(spin, *euler)
    H = R @ H_pas @ R.conj().T
    return (H + H.conj().T) / 2


def quadrupole_lab(spec: HamiltonianSpec, spin: SpinQuantum) -> ComplexMatrix:
    return euler_rotate(quadrupole_pas(spec, spin), spec.euler, spin)


def static_hamiltonian(spec: HamiltonianSpec, spin: SpinQuantum) -> ComplexMatrix:
    """Full lab-frame ``H_Z + H_Q``."""
    return zeeman_hamiltonian(spec, spin) + quadrupole_lab(spec, spin)


def thermal_hamiltonian(spec: HamiltonianSpec, spin: SpinQuantum, which: str = "full") -> ComplexMatrix:
    """Generator of the Boltzmann factor: ``"full"`` (H_Z + H_Q) or ``"quadrupole"`` (H_Q alone)."""
    if which == "full":
        return static_hamiltonian(spec, spin)
    if which == "quadrupole":
        return quadrupole_lab(spec, spin)
    raise ValueError(f"thermal Hamiltonian must be 'full' or 'quadrupole', got {which!r}")


def coherence_components(H: np.ndarray, spin: SpinQuantum, rtol: float = 1e-13) -> dict[int, ComplexMatrix]:
    """Split ``H`` into parts ``V_q`` with ``[Iz, V_q] = q V_q``.

    The matrix units ``|m><m'|`` diagonalize the superoperator ``ad_Iz`` with
    eigenvalue ``m - m'``, so projecting onto an eigenspace is a mask on the
    m-difference. Components at round-off level (relative ``rtol``) are dropped.
    """
    m = spin.m_values
    order = np.rint(m[:, None] - m[None, :]).astype(int)
    floor = rtol * max(float(np.abs(H).max()), np.finfo(float).tiny)
    parts = {}
    for q in range(-spin.two_I, spin.two_I + 1):
        Vq = np.where(order == q, H, 0)
        if q == 0:
            parts[q] = Vq
        elif np.abs(Vq).max() > floor:
            parts[q] = Vq
    return parts


def effective_hamiltonian(spec: HamiltonianSpec, spin: SpinQuantum, order: int = 1) -> ComplexMatrix:
    """Rotating-frame quadrupole Hamiltonian to first or second order in ``omegaQ / omega0``.

    Order 1 keeps the secular part ``V_0``. Order 2 adds the van Vleck term
    for the level ladder ``E_m = -omega0 m``::

        H2 = -(1 / omega0) * sum_{q > 0} [V_q, V_-q] / q
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    parts = coherence_components(quadrupole_lab(spec, spin), spin)
    nonsecular = len(parts) > 1
    if spec.omega0 == 0 and nonsecular:
        raise ValueError("no rotating frame: omega0 = 0 with non-secular quadrupole terms")
    if order == 2 and spec.omega0 < 10 * spec.omegaQ:
        warnings.warn(
            f"second-order average unreliable for omega0/omegaQ = {spec.omega0 / spec.omegaQ:.3g} < 10",
            stacklevel=2,
        )
    H = parts[0].copy()
    if order == 2 and nonsecular:
        for q, Vq in parts.items():
            if q > 0 and -q in parts:
                Vmq = parts[-q]
                H -= (Vq @ Vmq - Vmq @ Vq) / (q * spec.omega0)
    return (H + H.conj().T) / 2


def rotating_frame_hamiltonian(spec: HamiltonianSpec, spin: SpinQuantum, order: int = 0) -> ComplexMatrix:
    """Generator for rotating-frame dynamics.

    ``order=0`` is the untruncated Euler-rotated quadrupole Hamiltonian, the
    squeezing generator as written; 1 and 2 defer to :func:`effective_hamiltonian`.
    """
    if order == 0:
        return quadrupole_lab(spec, spin)
    return effective_hamiltonian(spec, spin, order)
