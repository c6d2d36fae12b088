#!/usr/bin/env python3
"""
Tests for the key = value config reader, unit conversion and run.* resolution
"""

import math
import os
import sys
import logging

import pytest

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.config_file import (
    SPEED_OF_LIGHT, load_config, parse_config, parse_lines, prepare,
)
from core.errors import ConfigurationError, ParameterError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")

INTERNAL = """
# internal units
gamma = 1
delta = 20 gamma
omega = 20
g_sqrt_n = 1000
medium_length = 1e-4
c6 = 4.8828125e-39   # z_B = 2.5e-7
"""


def test_parse_lines_reads_units_and_comments():
    entries = parse_lines("gamma = 2.87 MHz  # half linewidth\n\nmedium_length = 1 mm\n")
    assert entries["gamma"].text == "2.87"
    assert entries["gamma"].unit == "MHz"
    assert entries["medium_length"].unit == "mm"


@pytest.mark.parametrize("text, message", [
    ("gamma = 1\ngamma = 2\n", "duplicate"),
    ("gamma = 1\nfoo = 2\n", "unknown key"),
    ("gamma 1\n", "expected"),
])
def test_parse_lines_rejects(text, message):
    with pytest.raises(ConfigurationError) as info:
        parse_lines(text)
    assert message in str(info.value)


def test_internal_units_config():
    bundle = parse_config(INTERNAL)
    assert not bundle.physical_units
    assert bundle.params.delta == 20.0
    assert bundle.params.light_speed == 1.0
    prepared = prepare(bundle)
    assert prepared.derived.d == pytest.approx(200.0)
    assert prepared.derived.z_B == pytest.approx(2.5e-7, rel=1e-9)
    assert prepared.derived.d_B == pytest.approx(1.0, rel=1e-9)
    # no run.sigma: sigma-relative lengths use four blockade radii
    assert prepared.run.sigma is None
    assert prepared.run.spatial_sigma(prepared.derived) == pytest.approx(1e-6, rel=1e-9)


def test_physical_units_are_converted():
    bundle = load_config(os.path.join(CONFIG_DIR, "rb_worked_example.conf"))
    params = bundle.params
    assert bundle.physical_units
    assert params.gamma == pytest.approx(2 * math.pi * 2.87e6)
    assert params.delta == pytest.approx(20 * params.gamma)
    assert params.omega == pytest.approx(2 * math.pi * 2e6)
    assert params.wavelength == pytest.approx(0.795e-6)
    assert params.density == pytest.approx(1e18)
    assert params.medium_length == pytest.approx(1e-3)
    assert params.light_speed == SPEED_OF_LIGHT
    assert params.c6 == pytest.approx(793771.78 * 2 * math.pi * 1e6 * 1e-36)

    prepared = prepare(bundle)
    assert prepared.params.gamma == pytest.approx(1.0)
    assert prepared.derived.d_B == pytest.approx(9.05, abs=0.01)
    assert prepared.derived.z_B * prepared.params.units.length == pytest.approx(15e-6, rel=1e-6)


@pytest.mark.parametrize("replace, extra, message", [
    ("medium_length = 1 mm", "medium_length = 1", "missing unit"),
    ("c6 = 793771.78 MHz*um^6", "c6 = 793771.78 MHz*um^3", "does not match exponent"),
    ("c6 = 793771.78 MHz*um^6", "c6 = 793771.78 MHz", "expected"),
    ("omega = 2 MHz", "omega = 2 furlongs", "unknown frequency unit"),
    ("density = 1e12 cm^-3", "density = many cm^-3", "not a number"),
])
def test_bad_units_rejected(replace, extra, message):
    with open(os.path.join(CONFIG_DIR, "rb_worked_example.conf")) as f:
        text = f.read()
    with pytest.raises(ConfigurationError) as info:
        parse_config(text.replace(replace, extra))
    assert message in str(info.value)


def test_missing_required_key():
    with pytest.raises(ConfigurationError) as info:
        parse_config(INTERNAL.replace("omega = 20\n", ""))
    assert "omega" in str(info.value)


def test_invalid_physics_surfaces_as_parameter_error():
    bundle = parse_config(INTERNAL.replace("omega = 20", "omega = -20"))
    with pytest.raises(ParameterError):
        prepare(bundle)


def test_run_settings_relative_units():
    prepared = prepare(load_config(os.path.join(CONFIG_DIR, "counter_gate.conf")))
    derived, run = prepared.derived, prepared.run
    assert derived.d_B == pytest.approx(2.0, rel=1e-4)
    assert run.geometry == "counter"
    assert run.sigma == pytest.approx(4 * derived.z_B)
    assert run.separation == pytest.approx(10 * run.sigma)

    prepared = prepare(load_config(os.path.join(CONFIG_DIR, "co_pairs.conf")))
    assert prepared.derived.z_B is None
    assert prepared.derived.z_b == pytest.approx(8e-3, rel=1e-9)
    assert prepared.run.geometry == "co"
    assert prepared.run.sigma == pytest.approx(0.1, rel=1e-9)


def test_run_settings_errors():
    with pytest.raises(ConfigurationError):
        prepare(parse_config(INTERNAL + "run.geometry = sideways\n"))
    with pytest.raises(ConfigurationError):
        prepare(parse_config(INTERNAL + "run.n_points = 12.5\n"))
    with pytest.raises(ConfigurationError):
        prepare(parse_config(INTERNAL + "run.t_end = 3 fortnights\n"))


def test_run_time_units_follow_the_frequency_scale():
    text = open(os.path.join(CONFIG_DIR, "rb_worked_example.conf")).read() + "run.t_end = 2 us\n"
    prepared = prepare(parse_config(text))
    assert prepared.run.t_end == pytest.approx(2e-6 * 2 * math.pi * 2.87e6)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
