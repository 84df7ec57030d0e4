import math

import numpy as np
import pytest

from rydsim.pulse import (
    PulseProfile,
    SWAP_TARGET,
    calibrate_area,
    calibrate_duration,
    dark_state,
    ensemble_phase_error,
    evolve_pulse,
    gate_fidelity,
    heff,
    raman_area,
    rk4_propagate,
)


def sin2_profile(x_max=0.2, duration=60.0, **kwargs):
    return PulseProfile.sin2(x_max=x_max, duration=duration, **kwargs)


# -- effective Hamiltonian -----------------------------------------------------

def test_heff_probe_off():
    h = heff(0.0, 0.0, 2.0, 1.0)
    want = np.zeros((3, 3))
    want[2, 2] = 1.0  # only the |R><R| entry survives
    assert np.allclose(h, want)


def test_heff_minus_row_and_column_vanish():
    h = heff(0.7, 2.3, 2.0, 1.0)
    assert np.allclose(h[1, :], 0.0)
    assert np.allclose(h[:, 1], 0.0)
    assert np.allclose(h, h.conj().T)


def test_heff_bright_state_energy():
    omega_c, delta, x = 2.0, 1.0, 0.45
    h = heff(x, 0.0, omega_c, delta)
    w = np.sort(np.linalg.eigvalsh(h))
    pref = omega_c**2 / (4 * delta)
    assert np.allclose(w[:2], 0.0, atol=1e-14)
    assert w[2] == pytest.approx(pref * (1 + x * x))


def test_dark_state_annihilated():
    for x in (0.0, 0.2, 0.9):
        h = heff(x, 0.0, 2.0, 1.0)
        assert np.linalg.norm(h @ dark_state(x)) < 1e-14


def test_heff_rejects_zero_detuning_and_infinite_v():
    with pytest.raises(ValueError):
        heff(0.1, 0.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        heff(0.1, math.inf, 2.0, 1.0)


# -- Raman area and calibration --------------------------------------------------

def test_area_zero_pulse():
    prof = PulseProfile(10.0, lambda t: 0.0, 0.0, 2.0, 1.0)
    assert raman_area(prof) == 0.0


def test_area_sin2_closed_form():
    # integral of sin^4 over one period is 3T/8
    x_max, duration = 0.3, 40.0
    prof = sin2_profile(x_max, duration)
    want = prof.prefactor * x_max**2 * 3.0 * duration / 8.0
    assert raman_area(prof) == pytest.approx(want, rel=1e-10)


def test_calibrate_area_scales_amplitude():
    prof = calibrate_area(sin2_profile(0.2, 60.0), math.pi)
    assert raman_area(prof) == pytest.approx(math.pi, rel=1e-8)
    prof2 = calibrate_area(sin2_profile(0.2, 240.0), math.pi)
    assert prof2.x_max == pytest.approx(prof.x_max / 2.0)


def test_calibrate_duration_keeps_amplitude():
    prof = calibrate_duration(sin2_profile(0.2, 60.0), math.pi)
    assert prof.x_max == 0.2
    assert raman_area(prof) == pytest.approx(math.pi, rel=1e-8)


def test_profile_edge_validation():
    with pytest.raises(ValueError):
        PulseProfile(10.0, lambda t: 0.5, 0.5, 2.0, 1.0)  # does not vanish at edges
    with pytest.raises(ValueError):
        PulseProfile(10.0, lambda t: 0.0, 0.0, 2.0, 0.0)  # zero detuning


# -- pulse evolution ---------------------------------------------------------------

def test_zero_duration_pulse_is_identity():
    prof = PulseProfile.sin2(x_max=0.4, duration=0.0)
    out = evolve_pulse(prof, "zero")
    assert np.allclose(out.unitary, np.eye(2))
    assert out.leak_r == 0.0


def test_rydberg_branch_swap_at_pi_area():
    prof = calibrate_area(sin2_profile(0.3, 30.0), math.pi)
    out = evolve_pulse(prof, "rydberg")
    assert np.allclose(out.unitary, SWAP_TARGET, atol=1e-12)


def test_rydberg_branch_insensitive_to_amplitude_at_fixed_area():
    u_ref = None
    for duration in (20.0, 80.0, 320.0):
        prof = calibrate_area(sin2_profile(0.2, duration), math.pi)
        u = evolve_pulse(prof, "rydberg").unitary
        if u_ref is None:
            u_ref = u
        assert np.allclose(u, u_ref, atol=1e-12)


def test_zero_branch_transparency_adiabatic():
    prof = calibrate_area(sin2_profile(0.1, 2000.0), math.pi)
    out = evolve_pulse(prof, "zero")
    fid = abs(np.trace(out.unitary)) / 2.0
    assert fid > 0.999
    assert out.leak_r < 1e-4


def test_minus_state_exactly_stationary():
    # |B> - |A> ~ |->: evolve and check the |-> component is untouched
    prof = calibrate_area(sin2_profile(0.5, 8.0), math.pi)
    out = evolve_pulse(prof, "zero")
    minus_in_ab = np.array([1.0, -1.0]) / math.sqrt(2)
    image = out.unitary @ minus_in_ab
    assert np.allclose(image, minus_in_ab, atol=1e-9)


def test_finite_blockade_approaches_perfect_blockade():
    prof_inf = calibrate_area(sin2_profile(0.2, 60.0), math.pi)
    u_inf = evolve_pulse(prof_inf, "rydberg").unitary
    errs = []
    for v in (30.0, 300.0):
        prof = calibrate_area(sin2_profile(0.2, 60.0, blockade=v), math.pi)
        u = evolve_pulse(prof, "rydberg").unitary
        phase = np.exp(-1j * np.angle(np.trace(u_inf.conj().T @ u)))
        errs.append(np.linalg.norm(phase * u - u_inf))
    assert errs[1] < errs[0]


def test_branch_validation():
    prof = sin2_profile()
    with pytest.raises(ValueError):
        evolve_pulse(prof, "both")


# -- fidelities ----------------------------------------------------------------------

def test_gate_fidelity_requires_calibration():
    with pytest.raises(ValueError):
        gate_fidelity(sin2_profile(0.05, 10.0))


def test_fidelity_degrades_monotonically_with_shorter_pulses():
    base = calibrate_duration(sin2_profile(0.2, 10.0), math.pi)
    f_zeros = []
    for k in range(5):
        prof = calibrate_area(sin2_profile(0.2, base.duration / 2**k), math.pi)
        f_zero, f_ryd = gate_fidelity(prof)
        f_zeros.append(f_zero)
        assert f_ryd == pytest.approx(1.0, abs=1e-9)
    assert all(f_zeros[k] > f_zeros[k + 1] for k in range(4))


# -- integrator ------------------------------------------------------------------------

def test_rk4_order_by_step_halving():
    # rectangular pulse, perfect blockade: the |+> phase evolution is known
    pref, x0, duration = 1.0, 0.5, 3.0
    h = lambda t: pref * np.array([[x0 * x0, 0.0], [0.0, 0.0]], dtype=complex)
    psi0 = np.array([1.0, 1.0]) / math.sqrt(2)
    exact = np.array([np.exp(-1j * pref * x0 * x0 * duration), 1.0]) / math.sqrt(2)
    errors = []
    steps = [8, 16, 32, 64, 128]
    for n in steps:
        errors.append(np.linalg.norm(rk4_propagate(h, psi0, duration, n) - exact))
    orders = [math.log2(errors[k] / errors[k + 1]) for k in range(len(errors) - 1)]
    for order in orders:
        assert abs(order - 4.0) < 0.3


def test_rk4_cross_checks_adaptive_path():
    prof = calibrate_area(sin2_profile(0.4, 12.0), math.pi)
    from rydsim.pulse import _h_of_t, _integrate

    h = _h_of_t(prof, 0.0)
    psi0 = np.array([1.0, 0.0, 0.0])
    adaptive = _integrate(h, psi0, prof.duration)
    fixed = rk4_propagate(h, psi0, prof.duration, 20000)
    assert np.linalg.norm(adaptive - fixed) < 1e-8
    assert np.linalg.norm(adaptive) == pytest.approx(1.0, abs=1e-8)


# -- ensemble phase estimate --------------------------------------------------------------

def test_ensemble_phase_error_linearity():
    prof = sin2_profile(0.1, 50.0)
    e2 = ensemble_phase_error(2, prof)
    e4 = ensemble_phase_error(4, prof)
    assert e4 == pytest.approx(2.0 * e2)
    assert e2 == pytest.approx(prof.prefactor * prof.duration * 2 * 0.1**2)


def test_ensemble_phase_error_zero_amplitude():
    prof = PulseProfile(5.0, lambda t: 0.0, 0.0, 2.0, 1.0)
    assert ensemble_phase_error(3, prof) == 0.0


def test_ensemble_phase_error_needs_two_atoms():
    with pytest.raises(ValueError):
        ensemble_phase_error(1, sin2_profile())
