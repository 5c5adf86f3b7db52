"""Spin-squeezing probe for quadrupolar NMR.

State preparation, quadrupole/Zeeman dynamics with phenomenological
relaxation, and the squeezing, spectrum, fidelity and Husimi-Q observables.
"""

from nmrsqueeze.spin_algebra import SpinQuantum, spin_operators
from nmrsqueeze.states import EnvironmentSpec, css_state, rtes, thermal_state, fidelity
from nmrsqueeze.hamiltonians import HamiltonianSpec, effective_hamiltonian, quadrupole_lab
from nmrsqueeze.dynamics import RelaxationSpec, TimeGrid, Trajectory, propagate_relaxed, propagate_unitary
from nmrsqueeze.observables import MSVAlignmentError, squeezing_parameter, squeezing_trace, spectrum

__version__ = "0.1.0"

__all__ = [
    "SpinQuantum",
    "spin_operators",
    "EnvironmentSpec",
    "css_state",
    "rtes",
    "thermal_state",
    "fidelity",
    "HamiltonianSpec",
    "effective_hamiltonian",
    "quadrupole_lab",
    "RelaxationSpec",
    "TimeGrid",
    "Trajectory",
    "propagate_relaxed",
    "propagate_unitary",
    "MSVAlignmentError",
    "squeezing_parameter",
    "squeezing_trace",
    "spectrum",
]
