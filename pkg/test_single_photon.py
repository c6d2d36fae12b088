#!/usr/bin/env python3
"""
Tests for single-photon propagation past a stored Rydberg excitation

Reference point: gamma = 1, delta = 20, Omega = 20, d = 200, L/v_g = 0.25, temporal sigma = 2.
"""

import cmath
import math
import os
import sys
import logging

import numpy as np
import pytest
from scipy.integrate import quad

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.config_file import load_config, prepare
from core.errors import GridError
from core.field_grid import ComplexField1D, gaussian_pulse
from core.single_photon import (
    PotentialProfile, analytic_single, input_pulse, narrowband_limit, position_averaged_transfer,
    propagate_single, quadrature_nodes, transfer_function,
)
from core.units_params import PhysicalParams, c6_for_blockade_radius, derive

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")


def reference_point(d_B: float = 1.0, delta: float = 20.0):
    """Derived parameters with the blockaded optical depth (d_b when delta = 0) set to d_B"""
    L, g_sqrt_n, omega = 1e-4, 1000.0, 20.0
    radius = d_B * L / (2.0 * 2.0 * g_sqrt_n ** 2 * L)
    width = abs(delta) if delta != 0 else 1.0
    params = PhysicalParams(gamma=1.0, delta=delta, omega=omega, g_sqrt_n=g_sqrt_n, medium_length=L,
                            c6=c6_for_blockade_radius(radius, omega, width))
    return derive(params)


def test_closed_form_integrals():
    # the numbers behind phase, loss and delay: 2pi/3 and 7pi/9 over the whole line
    area = quad(lambda x: 1.0 / (1.0 + x ** 6), -np.inf, np.inf)[0]
    assert area == pytest.approx(2.0 * math.pi / 3.0, rel=1e-10)
    delay = quad(lambda x: (2.0 * x ** 6 + 1.0) / (1.0 + x ** 6) ** 2, -np.inf, np.inf)[0]
    assert delay == pytest.approx(7.0 * math.pi / 9.0, rel=1e-10)


def test_transfer_reproduces_asymptotic_constants():
    # delta = 1000 gamma leaves O(gamma^2/delta^2) corrections only
    L, g_sqrt_n, delta = 1e-2, 1000.0, 1000.0
    z_B = L / (2.0 * 2.0 * g_sqrt_n ** 2 * L)
    derived = derive(PhysicalParams(gamma=1.0, delta=delta, omega=delta, g_sqrt_n=g_sqrt_n, medium_length=L,
                                    c6=c6_for_blockade_radius(z_B, delta, delta)))
    assert derived.d_B == pytest.approx(1.0)
    ratio = 1.0 / delta
    profile = PotentialProfile.from_derived(derived)

    factor = transfer_function(0.0, derived, profile, points_per_radius=128)
    phase = cmath.phase(factor)
    two_eta = -2.0 * math.log(abs(factor))
    assert phase / (derived.d_B * ratio) == pytest.approx(-math.pi / 6.0, rel=1e-3)
    assert two_eta / (derived.d_B * ratio ** 2) == pytest.approx(5.0 * math.pi / 18.0, rel=1e-3)

    h = 10.0
    omega = np.array([-h, h])
    excess = transfer_function(omega, derived, profile, 128) / transfer_function(
        omega, derived, PotentialProfile.none(), 128)
    slope = (cmath.phase(excess[1]) - cmath.phase(excess[0])) / (2.0 * h)
    assert slope / (derived.z_B / derived.v_g) == pytest.approx(-7.0 * math.pi / 9.0, rel=1e-3)


@pytest.mark.parametrize("d_B", [1.0, 3.0, 6.0, 9.0])
def test_far_detuned_phase_and_loss(d_B):
    derived = reference_point(d_B)
    assert derived.d == pytest.approx(200.0)
    assert derived.d_B == pytest.approx(d_B)
    pulse = input_pulse(derived, sigma=2.0, n_points=1024)
    result = propagate_single(pulse, derived, PotentialProfile.from_derived(derived))
    analytics = analytic_single(derived)
    report = result.report

    assert report.flags == []
    assert report.phase == pytest.approx(analytics.phase, rel=0.05)
    assert 2 * report.eta == pytest.approx(analytics.two_eta, rel=0.10)
    assert report.group_delay == pytest.approx(-analytics.delay_reduction, rel=0.10)
    # the V = 0 twin carries the bulk EIT delay L/v_g
    assert result.reference.centroid() - pulse.centroid() == pytest.approx(0.25, rel=0.01)


def test_phase_error_shrinks_along_the_detuning_ladder():
    # Omega = delta keeps the pulse bandwidth small against the blockade light shift Omega^2/delta;
    # what is left is the (1 + i gamma/delta)^(-5/6) correction to the closed form
    L, g_sqrt_n, d_B = 1e-4, 1000.0, 3.0
    radius = d_B / (4.0 * g_sqrt_n ** 2)
    errors = []
    for delta in (10.0, 20.0, 40.0, 80.0):
        derived = derive(PhysicalParams(gamma=1.0, delta=delta, omega=delta, g_sqrt_n=g_sqrt_n, medium_length=L,
                                        c6=c6_for_blockade_radius(radius, delta, delta)))
        assert derived.d_B == pytest.approx(d_B)
        pulse = input_pulse(derived, sigma=2.0, n_points=1024)
        report = propagate_single(pulse, derived, PotentialProfile.from_derived(derived)).report
        errors.append(abs(report.phase / analytic_single(derived).phase - 1.0))
    logger.info(f"Relative phase errors along the ladder: {errors}")
    assert errors[1] < 0.05
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_doubling_quadrature_points_is_converged():
    derived = reference_point(3.0)
    omega = np.linspace(-2.0, 2.0, 9)
    profile = PotentialProfile.from_derived(derived)
    coarse = transfer_function(omega, derived, profile, points_per_radius=32)
    fine = transfer_function(omega, derived, profile, points_per_radius=64)
    assert np.max(np.abs(fine - coarse)) < 1e-8


def test_propagation_is_linear():
    derived = reference_point(3.0)
    first = input_pulse(derived, sigma=2.0, n_points=1024)
    second = gaussian_pulse(first.grid, 1.5, 2.5, carrier_detuning=0.2)
    a, b = 0.6 - 0.3j, -1.1 + 0.4j
    combined = ComplexField1D(first.grid, a * first.values + b * second.values)
    profile = PotentialProfile.from_derived(derived)
    out_first = propagate_single(first, derived, profile).output.values
    out_second = propagate_single(second, derived, profile).output.values
    out_combined = propagate_single(combined, derived, profile).output.values
    expected = a * out_first + b * out_second
    assert np.max(np.abs(out_combined - expected)) < 1e-10 * np.max(np.abs(expected))


@pytest.mark.parametrize("d_b", [2.0, 4.0])
def test_resonant_two_level_absorption(d_b):
    derived = reference_point(d_b, delta=0.0)
    assert derived.d_b == pytest.approx(d_b)
    pulse = input_pulse(derived, sigma=2.0, n_points=1024)
    report = propagate_single(pulse, derived, PotentialProfile.from_derived(derived)).report
    analytics = analytic_single(derived)
    assert analytics.resonant
    assert math.exp(-2 * report.eta) == pytest.approx(math.exp(-analytics.two_eta), rel=0.10)


def test_position_average_is_translation_invariant_inside_the_medium():
    derived = reference_point(1.0)
    omega = np.linspace(-1.0, 1.0, 5)
    centered = transfer_function(omega, derived, PotentialProfile.from_derived(derived))
    single = position_averaged_transfer(omega, derived, [0.0])
    assert np.allclose(single, centered, rtol=1e-14, atol=0.0)

    offset = 100 * derived.z_B
    averaged = position_averaged_transfer(omega, derived, [-offset, offset])
    assert np.max(np.abs(averaged / centered - 1.0)) < 1e-6


def test_guards_and_limits():
    derived = reference_point(1.0)
    with pytest.raises(GridError):
        quadrature_nodes(-1.0, 1.0, 0.0, 0.1, points_per_radius=4)
    assert narrowband_limit(derived) == pytest.approx(0.2 * 400.0 / math.sqrt(200.0))
    free = transfer_function(0.0, derived, PotentialProfile.none())
    assert free == pytest.approx(1.0)


def test_rb_single_photon_numbers():
    derived = prepare(load_config(os.path.join(CONFIG_DIR, "rb_worked_example.conf"))).derived
    analytics = analytic_single(derived)
    assert analytics.phase == pytest.approx(-math.pi / 6.0 * derived.d_B / 20.0)
    assert analytics.phase == pytest.approx(-0.237, abs=0.002)
    assert analytics.two_eta == pytest.approx(0.0198, abs=0.0002)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
