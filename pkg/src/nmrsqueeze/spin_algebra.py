"""Dense spin-I operator algebra.

Operators are plain ``numpy`` complex arrays in the basis
``|I, I>, |I, I-1>, ..., |I, -I>`` (descending m), dimensionless (units of hbar).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

ComplexMatrix = NDArray[np.complex128]

HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class SpinQuantum:
    """Nuclear spin number stored as ``two_I`` so half-integers stay exact."""

    two_I: int

    def __post_init__(self):
        if int(self.two_I) != self.two_I or self.two_I < 1:
            raise ValueError(f"two_I must be a positive integer, got {self.two_I!r}")

    @classmethod
    def from_I(cls, I: float) -> "SpinQuantum":
        two_I = round(2 * I)
        if abs(two_I - 2 * I) > 1e-12:
            raise ValueError(f"I must be a multiple of 1/2, got {I!r}")
        return cls(two_I)

    @property
    def I(self) -> float:
        return self.two_I / 2

    @property
    def dim(self) -> int:
        return self.two_I + 1

    @property
    def m_values(self) -> NDArray[np.float64]:
        """Magnetic quantum numbers in basis order, I down to -I."""
        return self.I - np.arange(self.dim, dtype=float)


class SpinOperators(NamedTuple):
    Ix: ComplexMatrix
    Iy: ComplexMatrix
    Iz: ComplexMatrix
    Iplus: ComplexMatrix
    Iminus: ComplexMatrix


class Eigensystem(NamedTuple):
    eigenvalues: NDArray[np.float64]
    eigenvectors: ComplexMatrix


def spin_operators(spin: SpinQuantum) -> SpinOperators:
    I = spin.I
    m = spin.m_values
    Iz = np.diag(m).astype(complex)
    Iplus = np.zeros((spin.dim, spin.dim), dtype=complex)
    # I+ |I,m> = sqrt(I(I+1) - m(m+1)) |I,m+1>; |I,m+1> sits one row above |I,m>
    for k in range(1, spin.dim):
        Iplus[k - 1, k] = np.sqrt(I * (I + 1) - m[k] * (m[k] + 1))
    Iminus = Iplus.conj().T.copy()
    Ix = (Iplus + Iminus) / 2
    Iy = (Iplus - Iminus) / 2j
    return SpinOperators(Ix, Iy, Iz, Iplus, Iminus)


def _check_same_dim(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape[-2:] != B.shape[-2:]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")


def is_hermitian(A: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.allclose(A, A.conj().T, rtol=0, atol=atol)


def _require_hermitian(H: np.ndarray) -> None:
    # scale tolerance with the matrix norm so rad/s Hamiltonians (~1e8) are accepted
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if not is_hermitian(H, atol=HERMITIAN_ATOL * scale):
        raise ValueError("operator is not Hermitian")


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    _check_same_dim(A, B)
    return A @ B - B @ A


def eig_hermitian(H: np.ndarray) -> Eigensystem:
    """Ascending eigenvalues and unitary eigenvector columns of a Hermitian matrix."""
    _require_hermitian(H)
    w, V = np.linalg.eigh(H)
    return Eigensystem(w, V)


def propagator_from_eig(eig: Eigensystem, t: float) -> ComplexMatrix:
    w, V = eig
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def propagator(H: np.ndarray, t: float) -> ComplexMatrix:
    """``exp(-i H t)`` for ``H`` in rad/s and ``t`` in seconds."""
    return propagator_from_eig(eig_hermitian(H), t)


def unit_vector(theta: float, phi: float) -> NDArray[np.float64]:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def rotation(spin: SpinQuantum, angle: float, axis_polar: tuple[float, float]) -> ComplexMatrix:
    """Active rotation ``exp(-i angle n.I)`` about the axis at polar angles ``(theta, phi)``."""
    ops = spin_operators(spin)
    n = unit_vector(*axis_polar)
    generator = n[0] * ops.Ix + n[1] * ops.Iy + n[2] * ops.Iz
    return propagator(generator, angle)


def euler_rotation(spin: SpinQuantum, alpha: float, beta: float, gamma: float) -> ComplexMatrix:
    """ZYZ rotation ``exp(-i alpha Iz) exp(-i beta Iy) exp(-i gamma Iz)``."""
    ops = spin_operators(spin)
    m = spin.m_values
    Rz_a = np.diag(np.exp(-1j * alpha * m))
    Rz_g = np.diag(np.exp(-1j * gamma * m))
    return Rz_a @ propagator(ops.Iy, beta) @ Rz_g


def expectation(rho: np.ndarray, O: np.ndarray) -> complex:
    """``Tr(rho O)``; also accepts a stack of density matrices."""
    _check_same_dim(rho, O)
    return np.einsum("...ij,ji->...", rho, O)
