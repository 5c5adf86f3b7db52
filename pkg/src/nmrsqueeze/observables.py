"""Kitagawa-Ueda squeezing parameter, mean-spin diagnostics and FID spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from nmrsqueeze.dynamics import Trajectory
from nmrsqueeze.spin_algebra import ComplexMatrix, SpinQuantum, expectation, propagator, spin_operators

# |<Iy>|, |<Iz>| must stay below this fraction of I for the closed form to apply
MSV_TOLERANCE = 1e-6

BRUTEFORCE_SCAN_POINTS = 721


class MSVAlignmentError(ValueError):
    """Mean spin vector is not along x; the closed-form squeezing parameter does not apply."""

    def __init__(self, message: str, component: str, index: Optional[int] = None):
        super().__init__(message)
        self.component = component
        self.index = index


@dataclass(frozen=True)
class SqueezingTrace:
    times: NDArray[np.float64]
    xi: NDArray[np.float64]
    msv: NDArray[np.float64]  # rows (<Ix>, <Iy>, <Iz>)
    abc: NDArray[np.float64]  # rows (A, B, C)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class Spectrum:
    freq_offsets: NDArray[np.float64]  # Hz from the carrier
    amplitude: NDArray[np.float64]
    phase: NDArray[np.float64]

    @property
    def complex(self) -> NDArray[np.complex128]:
        return self.amplitude * np.exp(1j * self.phase)


def _spin_of(rho: np.ndarray) -> SpinQuantum:
    return SpinQuantum(rho.shape[-1] - 1)


def _moments(rho: np.ndarray, spin: SpinQuantum):
    """MSV and (A, B, C) for one density matrix or a stack of them."""
    Ix, Iy, Iz, _, _ = spin_operators(spin)
    msv = np.stack([expectation(rho, O).real for O in (Ix, Iy, Iz)], axis=-1)
    A = expectation(rho, Iy @ Iy - Iz @ Iz).real
    B = expectation(rho, Iy @ Iz + Iz @ Iy).real
    C = expectation(rho, Iy @ Iy + Iz @ Iz).real
    return msv, np.stack([A, B, C], axis=-1)


def _xi_from_abc(abc: np.ndarray, I: float) -> NDArray[np.float64]:
    A, B, C = abc[..., 0], abc[..., 1], abc[..., 2]
    xi2 = (C - np.hypot(A, B)) / I
    return np.sqrt(np.clip(xi2, 0.0, None))


def _check_msv(msv: np.ndarray, I: float, index: Optional[int] = None) -> None:
    where = "" if index is None else f" at time index {index}"
    for k, name in ((1, "Iy"), (2, "Iz")):
        if abs(msv[k]) >= MSV_TOLERANCE * I:
            raise MSVAlignmentError(
                f"mean spin vector not along x{where}: <{name}> = {msv[k]:.3e}", name, index
            )
    if msv[0] == 0:
        raise MSVAlignmentError(f"mean spin vector vanishes{where}: <Ix> = 0", "Ix", index)


def squeezing_parameter(rho: np.ndarray, spin: Optional[SpinQuantum] = None) -> float:
    """``xi = sqrt((C - sqrt(A^2 + B^2)) / I)`` for a state whose mean spin lies along x.

    ``A = <Iy^2 - Iz^2>``, ``B = <Iy Iz + Iz Iy>``, ``C = <Iy^2 + Iz^2>``.
    Raises :class:`MSVAlignmentError` if ``<Iy>`` or ``<Iz>`` is not negligible.
    """
    spin = spin or _spin_of(rho)
    msv, abc = _moments(rho, spin)
    _check_msv(msv, spin.I)
    return float(_xi_from_abc(abc, spin.I))


def squeezing_bruteforce(rho: np.ndarray, spin: Optional[SpinQuantum] = None) -> float:
    """Minimum of ``Var(cos(phi) Iy + sin(phi) Iz)`` over ``phi``, reported as ``xi``.

    A 721-point scan over ``[0, pi)`` followed by bounded refinement. Uses the
    operators directly and never forms A, B, C.
    """
    spin = spin or _spin_of(rho)
    Ix, Iy, Iz, _, _ = spin_operators(spin)
    _check_msv(np.array([expectation(rho, O).real for O in (Ix, Iy, Iz)]), spin.I)

    def variance(phi: float) -> float:
        O = np.cos(phi) * Iy + np.sin(phi) * Iz
        return expectation(rho, O @ O).real - expectation(rho, O).real ** 2

    phis = np.linspace(0, np.pi, BRUTEFORCE_SCAN_POINTS, endpoint=False)
    values = np.array([variance(p) for p in phis])
    k = int(np.argmin(values))
    h = phis[1] - phis[0]
    res = minimize_scalar(
        variance, bounds=(phis[k] - h, phis[k] + h), method="bounded", options={"xatol": 1e-12}
    )
    vmin = min(res.fun, values[k])
    # a CSS has minimal perpendicular variance I/2
    return float(np.sqrt(max(vmin, 0.0) / (spin.I / 2)))


def squeezing_parameter_general(rho: np.ndarray, spin: Optional[SpinQuantum] = None) -> NDArray[np.float64]:
    """Squeezing parameter about the actual mean-spin direction.

    Equal to :func:`squeezing_parameter` applied after rotating the MSV onto x.
    Accepts stacks of density matrices.
    """
    spin = spin or _spin_of(rho)
    ops = spin_operators(spin)[:3]
    mean = np.stack([expectation(rho, O).real for O in ops], axis=-1)
    second = np.empty(mean.shape + (3,))
    for a in range(3):
        for b in range(a, 3):
            sym = (ops[a] @ ops[b] + ops[b] @ ops[a]) / 2
            second[..., a, b] = second[..., b, a] = expectation(rho, sym).real
    cov = second - mean[..., :, None] * mean[..., None, :]
    n = mean / np.linalg.norm(mean, axis=-1, keepdims=True)
    # perpendicular basis: e1 = n x ref, e2 = n x e1 with ref not parallel to n
    ref = np.where(np.abs(n[..., 2:3]) < 0.9, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    e1 = np.cross(n, ref)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(n, e1)
    c11 = np.einsum("...i,...ij,...j->...", e1, cov, e1)
    c22 = np.einsum("...i,...ij,...j->...", e2, cov, e2)
    c12 = np.einsum("...i,...ij,...j->...", e1, cov, e2)
    lam = (c11 + c22) / 2 - np.hypot((c11 - c22) / 2, c12)
    return np.sqrt(np.clip(lam, 0.0, None) / (spin.I / 2))


def align_msv_to_x(rho: np.ndarray, spin: Optional[SpinQuantum] = None) -> ComplexMatrix:
    """Rotate ``rho`` so its mean spin vector points along +x."""
    spin = spin or _spin_of(rho)
    Ix, Iy, Iz, _, _ = spin_operators(spin)
    v = np.array([expectation(rho, O).real for O in (Ix, Iy, Iz)])
    theta = np.arccos(np.clip(v[2] / np.linalg.norm(v), -1, 1))
    phi = np.arctan2(v[1], v[0])
    R = propagator(Iy, np.pi / 2 - theta) @ propagator(Iz, -phi)
    return R @ rho @ R.conj().T


def squeezing_trace(traj: Trajectory, spin: Optional[SpinQuantum] = None, align: bool = False) -> SqueezingTrace:
    """Per-time squeezing parameter, mean spin vector and (A, B, C).

    With ``align=True`` the parameter is taken about the instantaneous MSV
    direction (:func:`squeezing_parameter_general`) and no alignment check is made.
    """
    spin = spin or _spin_of(traj.states[0])
    msv, abc = _moments(traj.states, spin)
    if align:
        xi = squeezing_parameter_general(traj.states, spin)
    else:
        bad = np.nonzero(
            (np.abs(msv[:, 1]) >= MSV_TOLERANCE * spin.I)
            | (np.abs(msv[:, 2]) >= MSV_TOLERANCE * spin.I)
            | (msv[:, 0] == 0)
        )[0]
        if bad.size:
            _check_msv(msv[bad[0]], spin.I, index=int(bad[0]))
        xi = _xi_from_abc(abc, spin.I)
    return SqueezingTrace(np.asarray(traj.times), xi, msv, abc)


def spectrum(fid_series: np.ndarray, dt: float, zero_fill: int = 2) -> Spectrum:
    """Unitary DFT of a zero-filled FID, frequencies in Hz centred on the carrier."""
    fid_series = np.asarray(fid_series, dtype=complex)
    if len(fid_series) < 16:
        raise ValueError(f"need at least 16 FID samples, got {len(fid_series)}")
    n = len(fid_series) * zero_fill
    padded = np.zeros(n, dtype=complex)
    padded[: len(fid_series)] = fid_series
    X = np.fft.fftshift(np.fft.fft(padded, norm="ortho"))
    freqs = np.fft.fftshift(np.fft.fftfreq(n, dt))
    return Spectrum(freqs, np.abs(X), np.angle(X))
