"""Command-line entry point: one subcommand per observable family.

Each run writes CSV tables plus ``manifest.json`` (resolved config, physical
constants, SHA-256 of every output) into the output directory.

Exit codes: 0 success, 1 configuration error, 2 numerical precondition failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from nmrsqueeze import __version__
from nmrsqueeze.config import ConfigError, RunConfig, parse_config
from nmrsqueeze.dynamics import TimeGrid, fid, max_step, propagate_relaxed
from nmrsqueeze.hamiltonians import rotating_frame_hamiltonian, thermal_hamiltonian
from nmrsqueeze.observables import MSVAlignmentError, SqueezingTrace, spectrum, squeezing_trace
from nmrsqueeze.spin_algebra import propagator
from nmrsqueeze.states import HBAR, K_B, husimi_q, prepare_state, thermal_state
from nmrsqueeze.sweeps import eta_family, euler_grid, fidelity_map

log = logging.getLogger("nmrsqueeze")

SUBCOMMANDS = ("husimi", "fidelity-map", "squeeze", "spectrum", "eta-family", "euler-grid")

# order used when the config leaves it unset
DEFAULT_ORDER = {"husimi": 0, "squeeze": 0, "eta-family": 0, "spectrum": 2, "euler-grid": 2, "fidelity-map": 0}

SQUEEZE_COLUMNS = ["t_seconds", "nuQ_t", "xi", "Ix", "Iy", "Iz", "A", "B", "C"]


def fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue().encode()


def squeeze_rows(trace: SqueezingTrace, nuQ: float, prefix: Sequence = ()):
    for k in range(len(trace)):
        t = trace.times[k]
        yield (*prefix, t, t * nuQ, trace.xi[k], *trace.msv[k], *trace.abc[k])


def time_grid(cfg: RunConfig) -> TimeGrid:
    """Requested grid, refined when relaxation needs finer steps."""
    n_steps = cfg.n_samples - 1
    if cfg.relax.active:
        needed = int(np.ceil(cfg.t_max / max_step(cfg.relax, cfg.spec.omegaQ) - 1e-9))
        if needed > n_steps:
            log.info("refining time grid from %d to %d steps for relaxation", n_steps, needed)
            n_steps = needed
    return TimeGrid(cfg.t_max / n_steps, n_steps)


def run_squeeze(cfg: RunConfig, order: int, threads: int) -> dict[str, bytes]:
    H_static = thermal_hamiltonian(cfg.spec, cfg.spin, cfg.thermal_hamiltonian)
    rho0 = prepare_state(cfg.initial, cfg.spin, H_static, cfg.env)
    rho_eq = thermal_state(H_static, cfg.env) if cfg.relax_target == "thermal" else None
    H = rotating_frame_hamiltonian(cfg.spec, cfg.spin, order)
    traj = propagate_relaxed(rho0, H, time_grid(cfg), cfg.relax, rho_eq)
    trace = squeezing_trace(traj, cfg.spin, align=cfg.align_msv)
    return {"squeeze.csv": render_csv(SQUEEZE_COLUMNS, squeeze_rows(trace, cfg.spec.nuQ))}


def run_eta_family(cfg: RunConfig, order: int, threads: int) -> dict[str, bytes]:
    traces = eta_family(
        cfg.eta_values,
        cfg.spec,
        cfg.initial,
        cfg.relax,
        time_grid(cfg),
        cfg.env,
        cfg.spin,
        order=order,
        relax_target=cfg.relax_target,
        align=cfg.align_msv,
        threads=threads,
        thermal_h=cfg.thermal_hamiltonian,
    )
    rows = (row for eta, tr in zip(cfg.eta_values, traces) for row in squeeze_rows(tr, cfg.spec.nuQ, (eta,)))
    return {"eta_family.csv": render_csv(["eta", *SQUEEZE_COLUMNS], rows)}


def run_spectrum(cfg: RunConfig, order: int, threads: int) -> dict[str, bytes]:
    T2 = cfg.relax.T2 if cfg.relax.T2 is not None else cfg.spectrum_T2
    dt = min(T2, 2 * np.pi / cfg.spec.omegaQ) / 50
    grid = TimeGrid(dt, int(np.ceil(8 * T2 / dt)))
    H_static = thermal_hamiltonian(cfg.spec, cfg.spin, cfg.thermal_hamiltonian)
    rho0 = prepare_state(cfg.initial, cfg.spin, H_static, cfg.env)
    H = rotating_frame_hamiltonian(cfg.spec, cfg.spin, order)
    spec = spectrum(fid(rho0, H, grid, T2), grid.dt, cfg.zero_fill)
    rows = zip(spec.freq_offsets, spec.amplitude, spec.phase)
    return {"spectrum.csv": render_csv(["offset_Hz", "amplitude", "phase_rad"], rows)}


def run_fidelity_map(cfg: RunConfig, order: int, threads: int) -> dict[str, bytes]:
    fm = fidelity_map(
        cfg.B_values, cfg.T_values, cfg.env.gamma_n, cfg.spin, cfg.spec,
        threads=threads, thermal_h=cfg.thermal_hamiltonian,
    )
    rows = (
        (B, T, fm.F[i, j], fm.F_deviation[i, j])
        for i, B in enumerate(fm.B_values)
        for j, T in enumerate(fm.T_values)
    )
    return {"fidelity_map.csv": render_csv(["B_tesla", "T_kelvin", "F_full_rho", "F_deviation"], rows)}


def run_husimi(cfg: RunConfig, order: int, threads: int) -> dict[str, bytes]:
    H_static = thermal_hamiltonian(cfg.spec, cfg.spin, cfg.thermal_hamiltonian)
    rho = prepare_state(cfg.initial, cfg.spin, H_static, cfg.env)
    if cfg.husimi_time > 0:
        U = propagator(rotating_frame_hamiltonian(cfg.spec, cfg.spin, order), cfg.husimi_time)
        rho = U @ rho @ U.conj().T
    grid = husimi_q(rho, cfg.husimi_range, cfg.husimi_range, cfg.husimi_points)
    rows = (
        (x, y, grid.q_values[i, j]) for i, x in enumerate(grid.x_values) for j, y in enumerate(grid.y_values)
    )
    return {"husimi.csv": render_csv(["x", "y", "Q"], rows)}


def run_euler_grid(cfg: RunConfig, order: int, threads: int) -> dict[str, bytes]:
    # betaQ comes from the grid; alphaQ and gammaQ must be zero
    alpha, _, gamma = cfg.spec.euler
    spec = replace(cfg.spec, euler=(alpha, 0.0, gamma))
    res = euler_grid(
        cfg.betaQ_values,
        cfg.eta_grid,
        spec,
        cfg.spin,
        order=order,
        n_samples=cfg.n_samples,
        window_nuQ=cfg.t_max * cfg.spec.nuQ,
        threads=threads,
    )
    rows = (
        (np.degrees(b), e, res.xi_min[i, j], res.t_argmin[i, j])
        for i, b in enumerate(res.betaQ_values)
        for j, e in enumerate(res.eta_values)
    )
    return {"euler_grid.csv": render_csv(["betaQ_deg", "eta", "xi_min", "t_argmin_s"], rows)}


RUNNERS = {
    "husimi": run_husimi,
    "fidelity-map": run_fidelity_map,
    "squeeze": run_squeeze,
    "spectrum": run_spectrum,
    "eta-family": run_eta_family,
    "euler-grid": run_euler_grid,
}


def run_subcommand(name: str, cfg: RunConfig, threads: Optional[int] = None, out_dir: Optional[Path] = None) -> Path:
    """Run one subcommand and write its CSV files and manifest; returns the output directory."""
    order = cfg.order if cfg.order is not None else DEFAULT_ORDER[name]
    threads = threads or os.cpu_count() or 1
    files = RUNNERS[name](cfg, order, threads)
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    for fname, content in files.items():
        (out / fname).write_bytes(content)
    manifest = {
        "subcommand": name,
        "version": __version__,
        "config": cfg.raw,
        "order": order,
        "constants": {"hbar_J_s": HBAR, "k_B_J_per_K": K_B},
        "outputs": {fname: hashlib.sha256(content).hexdigest() for fname, content in files.items()},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmrsqueeze", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", type=Path, help="output directory (overrides out_dir)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
        p.add_argument("--order", type=int, choices=(0, 1, 2), default=None,
                       help="0 = untruncated quadrupole, 1/2 = rotating-frame average order")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = list(args.set)
    if args.order is not None:
        overrides.append(f"order={args.order}")
    try:
        cfg = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.threads is not None and args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        out = run_subcommand(args.command, cfg, args.threads, args.out)
    except MSVAlignmentError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    log.info("wrote %s", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
