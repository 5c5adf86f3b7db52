"""Run configuration: JSON file plus ``key=value`` overrides.

Defaults are the 23Na working point (gamma_n = 11.26 MHz/T, B0 = 7 T,
T = 100 mK, nuQ = 200 kHz, I = 3/2). Boundary units are degrees, kHz, MHz/T;
everything internal is radians, rad/s and seconds.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from nmrsqueeze.dynamics import RelaxationSpec
from nmrsqueeze.hamiltonians import HamiltonianSpec
from nmrsqueeze.spin_algebra import SpinQuantum
from nmrsqueeze.states import EnvironmentSpec, InitialState


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


DEFAULTS: dict[str, Any] = {
    "isotope": "23Na",
    "gamma_n_MHz_per_T": 11.26,
    "two_I": 3,
    "B0_T": 7.0,
    "temperature_K": 0.1,
    "nuQ_kHz": 200.0,
    "eta": 0.0,
    "euler_deg": [0.0, 0.0, 0.0],
    # null, {"omegaQ_inv": x} or {"seconds": x}
    "T1": None,
    "T2": None,
    "initial_state": {"kind": "css", "theta0_deg": 90.0, "phi0_deg": 180.0},
    "t_max_nuQ": 2.0,
    "n_samples": 2000,
    # null picks the subcommand default
    "order": None,
    "relax_target": "identity",
    # "quadrupole" keeps only H_Q in the Boltzmann factor
    "thermal_hamiltonian": "full",
    "align_msv": False,
    "eta_values": [0.0, 1.0],
    "betaQ_deg_grid": [0.0, 90.0, 91],
    "eta_grid": [0.0, 1.0, 21],
    "B_grid_T": [0.0, 9.0, 60],
    "T_grid_K": [1e-5, 10.0, 60],
    "husimi_range": [-3.0, 3.0],
    "husimi_points": 101,
    "husimi_time_omegaQ_inv": 0.0,
    "spectrum_T2_us": 50.0,
    "zero_fill": 2,
    "out_dir": "out",
}

_INITIAL_KEYS = {"kind", "theta0_deg", "phi0_deg"}
_TIME_UNITS = {"omegaQ_inv", "seconds"}


@dataclass(frozen=True)
class RunConfig:
    raw: dict  # resolved JSON-compatible values, echoed into the manifest
    spin: SpinQuantum
    env: EnvironmentSpec
    spec: HamiltonianSpec
    relax: RelaxationSpec
    initial: InitialState
    order: Optional[int]
    relax_target: str
    thermal_hamiltonian: str
    align_msv: bool
    eta_values: tuple[float, ...]
    betaQ_values: np.ndarray
    eta_grid: np.ndarray
    B_values: np.ndarray
    T_values: np.ndarray
    husimi_range: tuple[float, float]
    husimi_points: int
    husimi_time: float
    spectrum_T2: float
    zero_fill: int
    t_max: float
    n_samples: int
    out_dir: Path


def _number(raw: dict, key: str, *, lo=None, hi=None, lo_open=False, integer=False) -> float:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if lo is not None and (value < lo or (lo_open and value == lo)):
        raise ConfigError(key, f"must be {'>' if lo_open else '>='} {lo}, got {value!r}")
    if hi is not None and value > hi:
        raise ConfigError(key, f"must be <= {hi}, got {value!r}")
    return int(value) if integer else float(value)


def _triple(raw: dict, key: str, *, integer_last: bool = True) -> tuple:
    value = raw[key]
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(key, f"expected [start, stop, num], got {value!r}")
    sub = {f"{key}[{i}]": v for i, v in enumerate(value)}
    start = _number(sub, f"{key}[0]")
    stop = _number(sub, f"{key}[1]")
    num = _number(sub, f"{key}[2]", lo=1, integer=integer_last)
    return start, stop, num


def _relax_time(raw: dict, key: str, omegaQ: float) -> Optional[float]:
    value = raw[key]
    if value is None:
        return None
    if not isinstance(value, dict) or len(value) != 1 or not set(value) <= _TIME_UNITS:
        raise ConfigError(key, f'expected null, {{"omegaQ_inv": x}} or {{"seconds": x}}, got {value!r}')
    unit, amount = next(iter(value.items()))
    amount = _number({f"{key}.{unit}": amount}, f"{key}.{unit}", lo=0, lo_open=True)
    if unit == "seconds":
        return amount
    if omegaQ == 0:
        raise ConfigError(key, "omegaQ_inv units need nuQ_kHz > 0")
    return amount / omegaQ


def merge_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply ``key=value`` strings; values parse as JSON, else stay strings. Dotted keys nest."""
    raw = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        parts = key.split(".")
        node = raw
        for p in parts[:-1]:
            if not isinstance(node.get(p), dict):
                node[p] = {}
            node = node[p]
        node[parts[-1]] = value
    return raw


def parse_config(path: Union[str, Path, None] = None, overrides: Optional[list[str]] = None) -> RunConfig:
    user: dict = {}
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError("<file>", f"no such config file: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"malformed JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("<file>", "top level must be a JSON object")
    user = merge_overrides(user, overrides or [])
    unknown = sorted(set(user) - set(DEFAULTS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    raw = copy.deepcopy(DEFAULTS)
    raw.update(user)
    return _validate(raw)


def _validate(raw: dict) -> RunConfig:
    if not isinstance(raw["isotope"], str):
        raise ConfigError("isotope", "expected text")
    gamma_n = _number(raw, "gamma_n_MHz_per_T", lo=0, lo_open=True) * 1e6
    two_I = _number(raw, "two_I", lo=1, integer=True)
    B0 = _number(raw, "B0_T", lo=0)
    temperature = _number(raw, "temperature_K", lo=0, lo_open=True)
    nuQ = _number(raw, "nuQ_kHz", lo=0) * 1e3
    eta = _number(raw, "eta", lo=0, hi=1)

    euler = raw["euler_deg"]
    if not isinstance(euler, list) or len(euler) != 3:
        raise ConfigError("euler_deg", f"expected [alpha, beta, gamma] in degrees, got {euler!r}")
    euler_rad = tuple(np.radians(_number({f"euler_deg[{i}]": v}, f"euler_deg[{i}]")) for i, v in enumerate(euler))

    spin = SpinQuantum(two_I)
    env = EnvironmentSpec(B0, temperature, gamma_n)
    spec = HamiltonianSpec.from_nuQ(nuQ, omega0=env.omega0, eta=eta, euler=euler_rad)

    T1 = _relax_time(raw, "T1", spec.omegaQ)
    T2 = _relax_time(raw, "T2", spec.omegaQ)
    try:
        relax = RelaxationSpec(T1, T2)
    except ValueError as exc:
        raise ConfigError("T2", str(exc)) from None

    init = raw["initial_state"]
    if not isinstance(init, dict):
        raise ConfigError("initial_state", f"expected an object, got {init!r}")
    extra = sorted(set(init) - _INITIAL_KEYS)
    if extra:
        raise ConfigError(f"initial_state.{extra[0]}", "unknown key")
    kind = init.get("kind", "css")
    if kind not in ("css", "thermal", "rtes"):
        raise ConfigError("initial_state.kind", f"expected css, thermal or rtes, got {kind!r}")
    init_full = {"theta0_deg": 90.0, "phi0_deg": 180.0, **init}
    theta0 = _number({"initial_state.theta0_deg": init_full["theta0_deg"]}, "initial_state.theta0_deg", lo=0, hi=180)
    phi0 = _number({"initial_state.phi0_deg": init_full["phi0_deg"]}, "initial_state.phi0_deg", lo=0)
    if phi0 >= 360:
        raise ConfigError("initial_state.phi0_deg", f"must be < 360, got {phi0!r}")
    initial = InitialState(kind, np.radians(theta0), np.radians(phi0))

    order = raw["order"]
    if order is not None and order not in (0, 1, 2):
        raise ConfigError("order", f"expected 0, 1, 2 or null, got {order!r}")
    if raw["relax_target"] not in ("identity", "thermal"):
        raise ConfigError("relax_target", f"expected identity or thermal, got {raw['relax_target']!r}")
    if raw["thermal_hamiltonian"] not in ("full", "quadrupole"):
        raise ConfigError(
            "thermal_hamiltonian", f"expected full or quadrupole, got {raw['thermal_hamiltonian']!r}"
        )
    if not isinstance(raw["align_msv"], bool):
        raise ConfigError("align_msv", "expected true or false")

    etas = raw["eta_values"]
    if not isinstance(etas, list):
        raise ConfigError("eta_values", "expected a list")
    eta_values = tuple(
        _number({f"eta_values[{i}]": v}, f"eta_values[{i}]", lo=0, hi=1) for i, v in enumerate(etas)
    )

    b0, b1, bn = _triple(raw, "betaQ_deg_grid")
    e0, e1, en = _triple(raw, "eta_grid")
    if not (0 <= min(e0, e1) and max(e0, e1) <= 1):
        raise ConfigError("eta_grid", "eta values must lie in [0, 1]")
    B_lo, B_hi, B_n = _triple(raw, "B_grid_T")
    if min(B_lo, B_hi) < 0:
        raise ConfigError("B_grid_T", "fields must be >= 0")
    T_lo, T_hi, T_n = _triple(raw, "T_grid_K")
    if min(T_lo, T_hi) <= 0:
        raise ConfigError("T_grid_K", "temperatures must be > 0")

    hr = raw["husimi_range"]
    if not isinstance(hr, list) or len(hr) != 2:
        raise ConfigError("husimi_range", "expected [lo, hi]")
    husimi_range = tuple(_number({f"husimi_range[{i}]": v}, f"husimi_range[{i}]") for i, v in enumerate(hr))
    husimi_points = _number(raw, "husimi_points", lo=2, integer=True)
    husimi_t = _number(raw, "husimi_time_omegaQ_inv", lo=0)

    t_max_nuQ = _number(raw, "t_max_nuQ", lo=0, lo_open=True)
    n_samples = _number(raw, "n_samples", lo=2, integer=True)
    spectrum_T2 = _number(raw, "spectrum_T2_us", lo=0, lo_open=True) * 1e-6
    zero_fill = _number(raw, "zero_fill", lo=1, integer=True)
    if not isinstance(raw["out_dir"], str):
        raise ConfigError("out_dir", "expected a path string")
    if nuQ == 0:
        raise ConfigError("nuQ_kHz", "must be > 0 (time windows are in units of 1/nuQ)")

    return RunConfig(
        raw=raw,
        spin=spin,
        env=env,
        spec=spec,
        relax=relax,
        initial=initial,
        order=order,
        relax_target=raw["relax_target"],
        thermal_hamiltonian=raw["thermal_hamiltonian"],
        align_msv=raw["align_msv"],
        eta_values=eta_values,
        betaQ_values=np.radians(np.linspace(b0, b1, bn)),
        eta_grid=np.linspace(e0, e1, en),
        B_values=np.linspace(B_lo, B_hi, B_n),
        T_values=np.geomspace(T_lo, T_hi, T_n),
        husimi_range=husimi_range,
        husimi_points=husimi_points,
        husimi_time=husimi_t / spec.omegaQ,
        spectrum_T2=spectrum_T2,
        zero_fill=zero_fill,
        t_max=t_max_nuQ / spec.nuQ,
        n_samples=n_samples,
        out_dir=Path(raw["out_dir"]),
    )
