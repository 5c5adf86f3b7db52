import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nmrsqueeze.dynamics import TimeGrid, Trajectory, fid, propagate_unitary
from nmrsqueeze.hamiltonians import HamiltonianSpec, quadrupole_pas
from nmrsqueeze.observables import (
    MSVAlignmentError,
    align_msv_to_x,
    spectrum,
    squeezing_bruteforce,
    squeezing_parameter,
    squeezing_parameter_general,
    squeezing_trace,
)
from nmrsqueeze.spin_algebra import SpinQuantum, propagator, spin_operators
from nmrsqueeze.states import css_state, pure_density

from conftest import random_density, random_unitary

NA_SPEC = HamiltonianSpec.from_nuQ(200e3)


def css_mx(spin):
    return pure_density(css_state(spin, np.pi / 2, np.pi))


def fwhm(freqs, line):
    """Full width at half maximum of the peak, linear interpolation between samples."""
    k = int(np.argmax(line))
    half = line[k] / 2
    lo = k
    while line[lo] > half:
        lo -= 1
    hi = k
    while line[hi] > half:
        hi += 1
    left = np.interp(half, [line[lo], line[lo + 1]], [freqs[lo], freqs[lo + 1]])
    right = np.interp(half, [line[hi], line[hi - 1]], [freqs[hi], freqs[hi - 1]])
    return right - left


@pytest.mark.parametrize("two_I", [1, 2, 3, 5])
def test_css_has_unit_xi(two_I):
    spin = SpinQuantum(two_I)
    rho = css_mx(spin)
    assert squeezing_parameter(rho) == pytest.approx(1, abs=1e-10)
    assert squeezing_bruteforce(rho) == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (0.4, 1.0), (2.0, 4.0), (np.pi, 0.3)])
def test_any_css_aligned_to_x_has_unit_xi(theta, phi):
    spin = SpinQuantum(3)
    rho = align_msv_to_x(pure_density(css_state(spin, theta, phi)))
    assert squeezing_bruteforce(rho) == pytest.approx(1, abs=1e-10)


def test_maximally_mixed_with_small_x_deviation(spin32):
    Ix = spin_operators(spin32).Ix
    rho = np.eye(4) / 4 - 1e-9 * Ix
    # A = B = 0, C = Tr(Iy^2 + Iz^2)/4 = 5/2, xi^2 = (5/2)/(3/2)
    assert squeezing_parameter(rho) ** 2 == pytest.approx(5 / 3, abs=1e-12)
    assert squeezing_bruteforce(rho) ** 2 == pytest.approx(5 / 3, abs=1e-9)


def test_alignment_precondition(spin32):
    tilted = pure_density(css_state(spin32, np.pi / 3, np.pi))
    with pytest.raises(MSVAlignmentError) as info:
        squeezing_parameter(tilted)
    assert info.value.component == "Iz"
    along_y = pure_density(css_state(spin32, np.pi / 2, np.pi / 2))
    with pytest.raises(MSVAlignmentError, match="Iy"):
        squeezing_bruteforce(along_y)
    with pytest.raises(MSVAlignmentError, match="Ix"):
        squeezing_parameter(np.eye(4) / 4)


def random_aligned_state(rng, spin):
    U = random_unitary(rng, spin.dim)
    if rng.uniform() < 0.5:
        rho = U @ css_mx(spin) @ U.conj().T
    else:
        rho = random_density(rng, spin.dim, rank=int(rng.integers(1, spin.dim + 1)))
    return align_msv_to_x(rho)


def test_closed_form_matches_bruteforce_random(rng):
    for two_I in (2, 3, 5):
        spin = SpinQuantum(two_I)
        for _ in range(30):
            rho = random_aligned_state(rng, spin)
            assert squeezing_parameter(rho) == pytest.approx(squeezing_bruteforce(rho), abs=1e-9)


def test_general_form_matches_aligned_closed_form(rng):
    spin = SpinQuantum(3)
    for _ in range(30):
        U = random_unitary(rng, 4)
        rho = U @ css_mx(spin) @ U.conj().T
        general = squeezing_parameter_general(rho)
        assert general == pytest.approx(squeezing_parameter(align_msv_to_x(rho)), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), angle=st.floats(0, 2 * np.pi))
def test_xi_invariant_under_rotation_about_msv(seed, angle):
    rng = np.random.default_rng(seed)
    spin = SpinQuantum(3)
    rho = random_aligned_state(rng, spin)
    R = propagator(spin_operators(spin).Ix, angle)
    assert squeezing_parameter(R @ rho @ R.conj().T) == pytest.approx(squeezing_parameter(rho), abs=1e-10)


def one_axis_twisting(spin, n_samples=2000, periods=1.0, eta=0.0):
    spec = HamiltonianSpec.from_nuQ(200e3, eta=eta)
    grid = TimeGrid.spanning(periods / spec.nuQ, n_samples)
    return squeezing_trace(propagate_unitary(css_mx(spin), quadrupole_pas(spec, spin), grid), spin)


def test_oat_minimum_matches_bruteforce_scan(spin32):
    trace = one_axis_twisting(spin32)
    # independent oracle: angle scan at every 10th sample plus the closed-form argmin
    spec = NA_SPEC
    H = quadrupole_pas(spec, spin32)
    idx = sorted(set(range(0, 2000, 10)) | {int(np.argmin(trace.xi))})
    oracle = []
    for k in idx:
        U = propagator(H, trace.times[k])
        oracle.append(squeezing_bruteforce(U @ css_mx(spin32) @ U.conj().T))
    np.testing.assert_allclose(trace.xi[idx], oracle, atol=1e-9)
    assert min(oracle) == pytest.approx(trace.xi.min(), abs=1e-9)
    assert trace.xi.min() < 1


def test_trace_periodic_and_time_reversal_symmetric(spin32):
    trace = one_axis_twisting(spin32, n_samples=4001, periods=2.0)
    np.testing.assert_allclose(trace.xi[2000:], trace.xi[:2001], atol=1e-8)
    first = trace.xi[:2001]
    np.testing.assert_allclose(first, first[::-1], atol=1e-8)


def test_eta_changes_trace_near_half_period(spin32):
    a = one_axis_twisting(spin32, eta=0.0)
    b = one_axis_twisting(spin32, eta=1.0)
    window = np.abs(a.times * NA_SPEC.nuQ - 0.5) < 0.1
    assert np.abs(a.xi - b.xi)[window].max() > 0.1


def test_constant_trajectory_constant_xi(spin32):
    Ix = spin_operators(spin32).Ix
    rho = np.eye(4) / 4 - 1e-3 * Ix
    traj = Trajectory(np.arange(5.0), np.broadcast_to(rho, (5, 4, 4)))
    trace = squeezing_trace(traj, spin32)
    np.testing.assert_allclose(trace.xi, trace.xi[0], atol=1e-15)
    assert np.all(trace.abc[:, 2] >= np.hypot(trace.abc[:, 0], trace.abc[:, 1]) - 1e-10)


def test_trace_reports_failing_index(spin32):
    rho = css_mx(spin32)
    tilted = pure_density(css_state(spin32, 1.0, np.pi))
    traj = Trajectory(np.arange(4.0), np.stack([rho, rho, tilted, rho]))
    with pytest.raises(MSVAlignmentError) as info:
        squeezing_trace(traj, spin32)
    assert info.value.index == 2
    assert squeezing_trace(traj, spin32, align=True).xi[2] == pytest.approx(1, abs=1e-10)


def test_spectrum_validation_and_zeros():
    with pytest.raises(ValueError):
        spectrum(np.ones(8), 1.0)
    s = spectrum(np.zeros(64), 1e-6)
    assert np.all(s.amplitude == 0)


def test_spectrum_single_lorentzian():
    T2, dt = 50e-6, 0.2e-6
    n = int(np.ceil(8 * T2 / dt))
    t = dt * np.arange(n + 1)
    s = spectrum(np.exp(-t / T2), dt)
    bin_width = s.freq_offsets[1] - s.freq_offsets[0]
    np.testing.assert_allclose(np.diff(s.freq_offsets), bin_width)
    assert bin_width == pytest.approx(1 / (2 * (n + 1) * dt))
    assert abs(s.freq_offsets[np.argmax(s.amplitude)]) <= bin_width
    absorption = s.complex.real
    assert fwhm(s.freq_offsets, absorption) == pytest.approx(1 / (np.pi * T2), abs=bin_width)


def test_spectrum_parseval(rng):
    x = rng.normal(size=300) + 1j * rng.normal(size=300)
    s = spectrum(x, 1e-6, zero_fill=2)
    assert np.sum(s.amplitude**2) == pytest.approx(np.sum(np.abs(x) ** 2), rel=1e-9)


def test_spectrum_three_peaks(spin32):
    T2 = 50e-6
    dt = min(T2, 2 * np.pi / NA_SPEC.omegaQ) / 50
    grid = TimeGrid(dt, int(np.ceil(8 * T2 / dt)))
    s = spectrum(fid(css_mx(spin32), quadrupole_pas(NA_SPEC, spin32), grid, T2), dt)
    bin_width = s.freq_offsets[1] - s.freq_offsets[0]
    for centre in (-200e3, 0.0, 200e3):
        window = np.abs(s.freq_offsets - centre) < 50e3
        peak = s.freq_offsets[window][np.argmax(s.amplitude[window])]
        assert abs(peak - centre) <= bin_width
