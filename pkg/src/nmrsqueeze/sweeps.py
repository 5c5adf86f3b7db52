"""Deterministic parameter scans: fidelity map, eta families and the Euler grid.

Every grid point is an independent task. Results are collected by index, so
output is identical for any number of worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from nmrsqueeze.dynamics import (
    NO_RELAXATION,
    RelaxationSpec,
    TimeGrid,
    check_resolution,
    evolve_states,
    propagate_relaxed,
)
from nmrsqueeze.hamiltonians import HamiltonianSpec, rotating_frame_hamiltonian, thermal_hamiltonian
from nmrsqueeze.observables import SqueezingTrace, squeezing_parameter_general, squeezing_trace
from nmrsqueeze.spin_algebra import SpinQuantum
from nmrsqueeze.states import (
    EnvironmentSpec,
    InitialState,
    css_state,
    deviation,
    fidelity,
    fidelity_deviation,
    prepare_state,
    pure_density,
    rtes,
    thermal_state,
)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    """Order-preserving map; ``threads=1`` runs inline."""
    items = list(items)
    threads = threads or os.cpu_count() or 1
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def target_css(spin: SpinQuantum) -> np.ndarray:
    """Projector on the optimally squeezable CSS along -x."""
    return pure_density(css_state(spin, np.pi / 2, np.pi))


@dataclass(frozen=True)
class FidelityMap:
    """``F[i, j]`` at ``B_values[i]``, ``T_values[j]``."""

    B_values: NDArray[np.float64]
    T_values: NDArray[np.float64]
    F: NDArray[np.float64]
    F_deviation: NDArray[np.float64]


def rtes_fidelities(
    B0: float,
    temperature: float,
    gamma_n: float,
    spin: SpinQuantum,
    spec: HamiltonianSpec,
    thermal_h: str = "full",
) -> tuple[float, float]:
    """(full-rho, deviation-only) fidelity of the RTES with the -x CSS."""
    env = EnvironmentSpec(B0, temperature, gamma_n)
    H = thermal_hamiltonian(replace(spec, omega0=env.omega0), spin, thermal_h)
    rho = rtes(thermal_state(H, env))
    zeta = target_css(spin)
    if np.linalg.norm(deviation(rho)) <= 1e-12 * np.linalg.norm(rho):
        # no deviation beyond round-off (no field, no coupling)
        f_dev = float("nan")
    else:
        f_dev = fidelity_deviation(zeta, rho)
    return fidelity(zeta, rho), f_dev


def fidelity_map(
    B_values: Sequence[float],
    T_values: Sequence[float],
    gamma_n: float,
    spin: SpinQuantum,
    spec: HamiltonianSpec,
    threads: Optional[int] = None,
    thermal_h: str = "full",
) -> FidelityMap:
    B = np.asarray(B_values, dtype=float)
    Ts = np.asarray(T_values, dtype=float)
    if B.size == 0 or Ts.size == 0:
        raise ValueError("field and temperature ranges must be non-empty")
    if np.any(Ts <= 0):
        raise ValueError("temperatures must be > 0 K")
    points = [(b, t) for b in B for t in Ts]
    values = parallel_map(lambda p: rtes_fidelities(p[0], p[1], gamma_n, spin, spec, thermal_h), points, threads)
    arr = np.array(values).reshape(B.size, Ts.size, 2)
    return FidelityMap(B, Ts, arr[..., 0], arr[..., 1])


def eta_family(
    eta_values: Sequence[float],
    base_spec: HamiltonianSpec,
    initial: InitialState,
    relax: RelaxationSpec,
    grid: TimeGrid,
    env: EnvironmentSpec,
    spin: SpinQuantum,
    order: int = 0,
    relax_target: str = "identity",
    align: bool = False,
    threads: Optional[int] = None,
    thermal_h: str = "full",
) -> list[SqueezingTrace]:
    """One squeezing trace per eta on a shared time grid.

    ``relax_target`` picks the population equilibrium: ``"identity"`` (maximally
    mixed, keeps the mean spin on x) or ``"thermal"`` (Boltzmann state of the
    static Hamiltonian). ``thermal_h`` selects the Boltzmann generator, see
    :func:`~nmrsqueeze.hamiltonians.thermal_hamiltonian`.
    """
    if relax_target not in ("identity", "thermal"):
        raise ValueError(f"relax_target must be 'identity' or 'thermal', got {relax_target!r}")
    for eta in eta_values:
        if not 0 <= eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    check_resolution(grid, relax, base_spec.omegaQ)

    def one(eta: float) -> SqueezingTrace:
        spec = replace(base_spec, eta=float(eta), omega0=env.omega0)
        H_thermal = thermal_hamiltonian(spec, spin, thermal_h)
        rho0 = prepare_state(initial, spin, H_thermal, env)
        rho_eq = thermal_state(H_thermal, env) if relax_target == "thermal" else None
        H = rotating_frame_hamiltonian(spec, spin, order)
        traj = propagate_relaxed(rho0, H, grid, relax, rho_eq)
        return squeezing_trace(traj, spin, align=align)

    return parallel_map(one, eta_values, threads)


@dataclass(frozen=True)
class EulerGridResult:
    """``xi_min[i, j]`` and ``t_argmin[i, j]`` at ``betaQ_values[i]``, ``eta_values[j]``."""

    betaQ_values: NDArray[np.float64]
    eta_values: NDArray[np.float64]
    xi_min: NDArray[np.float64]
    t_argmin: NDArray[np.float64]


def min_squeezing(
    rho0: np.ndarray, H: np.ndarray, spin: SpinQuantum, t_max: float, n_samples: int
) -> tuple[float, float]:
    """``(min_t xi, argmin t)`` over ``[0, t_max]``: sampled scan, then bounded refinement."""
    times = np.linspace(0.0, t_max, n_samples)
    xi = squeezing_parameter_general(evolve_states(rho0, H, times), spin)
    k = int(np.argmin(xi))
    lo, hi = times[max(k - 1, 0)], times[min(k + 1, n_samples - 1)]

    def at(t: float) -> float:
        return float(squeezing_parameter_general(evolve_states(rho0, H, [t])[0], spin))

    res = minimize_scalar(at, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * t_max})
    if res.fun < xi[k]:
        return float(res.fun), float(res.x)
    return float(xi[k]), float(times[k])


def euler_grid(
    betaQ_values: Sequence[float],
    eta_values: Sequence[float],
    base_spec: HamiltonianSpec,
    spin: SpinQuantum,
    order: int = 2,
    n_samples: int = 2000,
    window_nuQ: float = 2.0,
    threads: Optional[int] = None,
) -> EulerGridResult:
    """Minimum squeezing of the -x CSS over ``t in [0, window_nuQ / nuQ]`` on a betaQ x eta grid.

    Higher-order terms precess the mean spin slightly off x, so the squeezing
    parameter is taken about the instantaneous mean-spin direction.
    """
    alpha, _, gamma = base_spec.euler
    if alpha != 0 or gamma != 0:
        raise ValueError("euler_grid requires alphaQ = gammaQ = 0")
    betas = np.asarray(betaQ_values, dtype=float)
    etas = np.asarray(eta_values, dtype=float)
    rho0 = target_css(spin)
    t_max = window_nuQ / base_spec.nuQ

    def one(point: tuple[float, float]) -> tuple[float, float]:
        beta, eta = point
        spec = replace(base_spec, eta=float(eta), euler=(0.0, float(beta), 0.0))
        H = rotating_frame_hamiltonian(spec, spin, order)
        return min_squeezing(rho0, H, spin, t_max, n_samples)

    points = [(b, e) for b in betas for e in etas]
    values = np.array(parallel_map(one, points, threads)).reshape(betas.size, etas.size, 2)
    return EulerGridResult(betas, etas, values[..., 0], values[..., 1])
