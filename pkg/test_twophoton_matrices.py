#!/usr/bin/env python3
"""
Tests for the 2x2 relative-coordinate equations, the counter-propagating phase/loss and
the co-propagating dark-state decay
"""

import math
import os
import sys
import logging

import numpy as np
import pytest
from scipy.linalg import expm

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.config_file import load_config, prepare
from core.errors import GridError
from core.twophoton_matrices import (
    analytic_counter, counter_phase_loss, counter_transfer, dark_decay_length, dark_vector,
    effective_potential, expm2, m_expansion, m_full, pair_spectral_width, picked_up_exponent,
    predicted_decay_length, pulse_averaged_counter, relative_group_speed,
)
from core.units_params import PhysicalParams, c6_for_blockade_radius, derive

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")


def counter_point(d_B: float = 2.0, delta: float = 20.0):
    """Omega = 2 delta, g sqrt(n) = 20 delta, L = 1"""
    omega, g_sqrt_n = 2.0 * delta, 20.0 * delta
    z_B = d_B / (2.0 * 2.0 * g_sqrt_n ** 2)
    return derive(PhysicalParams(gamma=1.0, delta=delta, omega=omega, g_sqrt_n=g_sqrt_n, medium_length=1.0,
                                 c6=c6_for_blockade_radius(z_B, omega, delta)))


def co_point():
    """Resonant, Omega = gamma, g sqrt(n) = 100 gamma, z_b = 8e-5"""
    return derive(PhysicalParams(gamma=1.0, delta=0.0, omega=1.0, g_sqrt_n=100.0, medium_length=1.0,
                                 c6=c6_for_blockade_radius(8e-5, 1.0, 1.0)))


def test_effective_potential_limits():
    derived = counter_point()
    value = effective_potential(np.array([0.0, 100 * derived.z_B]), derived)
    assert abs(value.v_eff[0] - 1.0) < 1e-5
    assert abs(value.v_eff[1]) < 1e-10


def test_expansion_matches_full_matrix():
    derived = counter_point()
    r = np.array([0.0, 0.5, 1.0, 1.5, 3.0]) * derived.z_B
    m0, m1 = m_expansion(r, derived)
    assert np.allclose(m_full(r, 0.0, derived), m0, rtol=1e-10, atol=1e-8)

    h = 1e-3
    slope = (m_full(r, h, derived) - m_full(r, -h, derived)) / (2 * h)
    assert np.allclose(slope, m1, rtol=1e-6, atol=1e-6)


def test_full_matrix_at_zero_frequency_is_m0():
    derived = counter_point()
    r = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 3.0, 20.0]) * derived.z_B
    m0, _ = m_expansion(r, derived)
    full = m_full(r, 0.0, derived)
    assert np.max(np.abs(full - m0)) <= 1e-12 * np.max(np.abs(m0))


def test_m0_eigenvalues_are_imaginary_without_decay():
    delta, omega, g_sqrt_n = 20.0, 40.0, 400.0
    derived = derive(PhysicalParams(gamma=0.0, delta=delta, omega=omega, g_sqrt_n=g_sqrt_n, medium_length=1.0,
                                    c6=c6_for_blockade_radius(1e-4, omega, delta), hamiltonian_test_mode=True))
    r = np.array([0.0, 0.5, 1.0, 2.0, 50.0]) * derived.z_B
    m0, _ = m_expansion(r, derived)
    eigenvalues = np.linalg.eigvals(m0)
    assert np.max(np.abs(eigenvalues.real)) < 1e-10 * max(1.0, np.max(np.abs(eigenvalues)))


@pytest.mark.parametrize("omega", [0.0, 0.3])
def test_counter_transfer_is_multiplicative(omega):
    derived = counter_point()
    radius = derived.z_B
    whole = counter_transfer(omega, (-8 * radius, 8 * radius), derived)
    first = counter_transfer(omega, (-8 * radius, 0.0), derived, require_coverage=False)
    second = counter_transfer(omega, (0.0, 8 * radius), derived, require_coverage=False)
    assert np.max(np.abs(second @ first - whole)) < 1e-10 * np.max(np.abs(whole))


def test_counter_phase_is_linear_in_blockaded_depth():
    depths = np.array([0.5, 1.0, 2.0, 3.0, 4.0])
    phis = np.array([counter_phase_loss(counter_point(d_B)).phi for d_B in depths])
    slope, intercept = np.polyfit(depths, phis, 1)
    residual = np.max(np.abs(phis - (slope * depths + intercept))) / np.max(np.abs(phis))
    assert residual < 0.02
    assert slope < 0


def test_dark_vector_is_null_without_interaction():
    derived = counter_point().model_copy(update={"c6": 0.0})
    residual = m_full(0.0, 0.0, derived) @ dark_vector(derived)
    assert np.max(np.abs(residual)) < 1e-9
    dark = dark_vector(derived)
    assert dark[1] / dark[0] == pytest.approx(-derived.g_sqrt_n / derived.omega)


@pytest.mark.parametrize("matrix", [
    [[0.3, -1.2], [0.7, -0.4]],
    [[-2.0 + 1.0j, 0.5j], [0.5j, -3.0 - 2.0j]],
    [[1.5, 1.0], [0.0, 1.5]],
    [[0.2, 1e-10], [0.0, 0.2 + 1e-12]],
])
def test_expm2_matches_scipy(matrix):
    a = np.array(matrix, dtype=complex)
    expected = expm(a)
    assert np.allclose(expm2(a), expected, rtol=1e-12, atol=1e-12)
    stacked = expm2(np.stack([a, 2 * a, -a]))
    assert np.allclose(stacked[1], expm(2 * a), rtol=1e-12, atol=1e-12)
    assert np.allclose(stacked[2], expm(-a), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("d_B", [1.0, 2.0, 4.0])
def test_counter_phase_and_loss_match_closed_forms(d_B):
    derived = counter_point(d_B)
    assert derived.d_B == pytest.approx(d_B)
    numeric = counter_phase_loss(derived)
    analytic = analytic_counter(derived)
    assert numeric.phi == pytest.approx(analytic.phi, rel=0.05)
    assert numeric.eta == pytest.approx(analytic.eta, rel=0.15)
    assert numeric.bright_fraction < 0.01
    assert numeric.phi < 0 and numeric.eta > 0


def test_counter_phase_scales_inversely_with_detuning():
    phis = [counter_phase_loss(counter_point(2.0, delta)).phi for delta in (10.0, 20.0, 40.0, 80.0)]
    ratios = [phis[k] / phis[k + 1] for k in range(3)]
    assert ratios == pytest.approx([2.0, 2.0, 2.0], rel=0.05)


def test_picked_up_exponent_constants():
    delta = 1000.0
    derived = counter_point(1.0, delta)
    exponent = picked_up_exponent(derived)
    ratio = 1.0 / delta
    root = 2.0 ** (1.0 / 6.0)
    assert exponent.imag / (derived.d_B * ratio) == pytest.approx(-math.pi / (root * 6.0), rel=1e-3)
    assert -exponent.real / (derived.d_B * ratio ** 2) == pytest.approx(5.0 * math.pi / (root * 36.0), rel=1e-3)


def test_long_pulses_see_the_single_frequency_factor():
    derived = counter_point(2.0)
    averaged = pulse_averaged_counter(derived, 1e6 * derived.z_B)
    single = counter_phase_loss(derived)
    assert averaged.phi == pytest.approx(single.phi, rel=1e-5)
    assert averaged.eta == pytest.approx(single.eta, rel=1e-5)


def test_pulse_average_without_interaction_is_unity():
    free = counter_point(2.0).model_copy(update={"c6": 0.0})
    averaged = pulse_averaged_counter(free, 1.0)
    assert abs(averaged.phi) < 1e-12
    assert abs(averaged.eta) < 1e-12


def test_pair_spectral_width_matches_the_relative_envelope():
    derived = counter_point(2.0)
    sigma = 4.0 * derived.z_B
    r = np.linspace(-60 * sigma, 60 * sigma, 4096)
    envelope = np.exp(-r ** 2 / (8 * sigma ** 2))
    k = 2 * np.pi * np.fft.fftfreq(len(r), d=r[1] - r[0])
    power = np.abs(np.fft.fft(envelope)) ** 2
    omega = 2 * derived.v_g * k
    width = math.sqrt(np.sum(omega ** 2 * power) / np.sum(power))
    assert width == pytest.approx(pair_spectral_width(derived, sigma), rel=1e-6)


def test_counter_transfer_guards():
    derived = counter_point()
    radius = derived.z_B
    with pytest.raises(GridError):
        counter_transfer(0.0, (-8 * radius, 8 * radius), derived, steps_per_radius=8)
    with pytest.raises(GridError):
        counter_transfer(0.0, (-2 * radius, 2 * radius), derived)
    assert counter_transfer(0.0, (-8 * radius, 8 * radius), derived).shape == (2, 2)


def test_resonant_counter_closed_form():
    derived = co_point()
    analytic = analytic_counter(derived)
    assert analytic.resonant
    assert analytic.eta == pytest.approx(0.5 * derived.d_b)


def test_rb_counter_gate_numbers():
    derived = prepare(load_config(os.path.join(CONFIG_DIR, "rb_worked_example.conf"))).derived
    analytic = analytic_counter(derived)
    assert analytic.phi == pytest.approx(-0.211, abs=0.002)
    assert 2 * analytic.eta == pytest.approx(0.0176, abs=0.0002)
    # quoted to one significant figure for the experimental proposal
    assert abs(analytic.phi + 0.2) < 0.05
    assert abs(2 * analytic.eta - 0.02) < 0.005


def test_co_propagating_decay_inside_blockade():
    derived = co_point()
    predicted = predicted_decay_length(derived)
    assert predicted == pytest.approx(5e-5)
    assert dark_decay_length(0.0, derived) == pytest.approx(predicted, rel=0.05)
    assert dark_decay_length(10 * derived.z_b, derived) > 100 * predicted


def test_co_decay_length_grows_with_detuning():
    resonant = co_point()
    detuned = derive(PhysicalParams(gamma=1.0, delta=20.0, omega=1.0, g_sqrt_n=100.0, medium_length=1.0,
                                    c6=c6_for_blockade_radius(8e-5, 1.0, 20.0)))
    ratio = dark_decay_length(0.0, detuned) / dark_decay_length(0.0, resonant)
    assert predicted_decay_length(detuned) / predicted_decay_length(resonant) == pytest.approx(401.0)
    assert ratio == pytest.approx(401.0, rel=0.2)


def test_relative_group_speed():
    derived = counter_point()
    outside, inside = relative_group_speed(np.array([100 * derived.z_B, 0.0]), derived)
    assert outside == pytest.approx(2 * derived.v_g, rel=0.02)
    assert inside == pytest.approx(derived.light_speed, rel=0.02)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
