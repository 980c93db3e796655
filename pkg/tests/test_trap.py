import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from penning_ising.errors import RadialConfinementError
from penning_ising.trap import (
    BE9_ION_MASS,
    CONSTANTS,
    TrapSpec,
    characteristic_lengths,
    cyclotron_frequency,
    pair_energy_scales,
    rotating_frame_beta,
)


def test_constants_positive_and_coulomb_identity():
    for name, value, _unit in CONSTANTS.table():
        assert value > 0, name
    expected = 1.0 / (4.0 * math.pi * CONSTANTS.vacuum_permittivity)
    assert CONSTANTS.coulomb_constant == pytest.approx(expected, rel=1e-12)


def test_be9_ion_mass_is_atom_minus_electron():
    assert BE9_ION_MASS == pytest.approx(1.4964171195439169e-26, rel=1e-12)


def test_cyclotron_frequency_operating_point(trap):
    assert cyclotron_frequency(trap) == pytest.approx(47752111.990124071, rel=1e-12)
    assert cyclotron_frequency(trap) / (2 * math.pi) == pytest.approx(7.60e6, rel=1e-3)


def test_cyclotron_doubles_with_charge(trap):
    doubled = TrapSpec(ion_charge=2 * trap.ion_charge)
    assert cyclotron_frequency(doubled) == pytest.approx(2 * cyclotron_frequency(trap), rel=1e-15)


def test_cyclotron_vanishes_with_field():
    small = TrapSpec(b_field=1e-3, omega_r=1.0)
    tiny = TrapSpec(b_field=1e-9, omega_r=1e-7)
    assert cyclotron_frequency(tiny) < cyclotron_frequency(small) * 1e-5


@pytest.mark.parametrize("b_scale", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("q_scale", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("m_scale", [0.5, 1.0, 4.0])
def test_cyclotron_scaling_grid(trap, b_scale, q_scale, m_scale):
    spec = TrapSpec(
        b_field=trap.b_field * b_scale,
        ion_charge=trap.ion_charge * q_scale,
        ion_mass=trap.ion_mass * m_scale,
        omega_r=1e3,
    )
    expected = cyclotron_frequency(trap) * b_scale * q_scale / m_scale
    assert cyclotron_frequency(spec) == pytest.approx(expected, rel=1e-14)


def test_beta_operating_point(trap):
    beta = rotating_frame_beta(trap)
    assert beta == pytest.approx(0.037912756589961508, rel=1e-10)
    assert beta == pytest.approx(0.0377, abs=5e-4)


@given(
    fz=st.floats(100e3, 2e6),
    fr_frac=st.floats(0.01, 0.99),
)
@settings(max_examples=200, deadline=None)
def test_beta_two_routes_agree(fz, fr_frac):
    wc = cyclotron_frequency(TrapSpec(omega_r=1.0))
    spec = TrapSpec(omega_z=2 * math.pi * fz, omega_r=fr_frac * wc)
    direct = rotating_frame_beta(spec, check=False)
    expanded = (spec.omega_r * wc - spec.omega_r**2) / spec.omega_z**2 - 0.5
    assert direct == pytest.approx(expanded, rel=1e-12, abs=1e-15)


def test_beta_maximal_at_half_cyclotron(trap):
    wc = cyclotron_frequency(trap)
    omega_z = 2 * math.pi * 3e6
    peak = rotating_frame_beta(TrapSpec(omega_z=omega_z, omega_r=wc / 2))
    for frac in (0.3, 0.45, 0.49, 0.51, 0.55, 0.7):
        assert rotating_frame_beta(TrapSpec(omega_z=omega_z, omega_r=frac * wc), check=False) < peak


def test_beta_unconfined_for_slow_rotation():
    spec = TrapSpec(omega_r=1e-3)
    assert rotating_frame_beta(spec, check=False) == pytest.approx(-0.5, abs=1e-6)
    with pytest.raises(RadialConfinementError):
        rotating_frame_beta(spec)


def test_trap_spec_rejects_invalid():
    with pytest.raises(ValueError):
        TrapSpec(ion_mass=0.0)
    with pytest.raises(ValueError):
        TrapSpec(omega_r=1e9)
    with pytest.raises(ValueError):
        TrapSpec(b_field=-1.0)


def test_characteristic_lengths_operating_point(trap):
    lengths = characteristic_lengths(trap)
    assert lengths["axial_length"] == pytest.approx(8.5173633982532978e-6, rel=1e-10)
    assert lengths["planar_length"] == pytest.approx(2.5353819230326266e-5, rel=1e-10)


def test_axial_length_scaling(trap):
    wc = cyclotron_frequency(trap)
    base_z = 2 * math.pi * 100e3
    fast = TrapSpec(omega_z=8 * base_z, omega_r=wc / 2)
    base = TrapSpec(omega_z=base_z, omega_r=wc / 2)
    assert characteristic_lengths(fast)["axial_length"] == pytest.approx(
        characteristic_lengths(base)["axial_length"] / 4, rel=1e-14
    )


def test_planar_equals_axial_when_beta_is_one(trap):
    wc = cyclotron_frequency(trap)
    # omega_r (wc - omega_r) = 1.5 omega_z^2
    omega_z = 2 * math.pi * 2e6
    omega_r = 0.5 * (wc - math.sqrt(wc**2 - 6 * omega_z**2))
    spec = TrapSpec(omega_z=omega_z, omega_r=omega_r)
    assert rotating_frame_beta(spec) == pytest.approx(1.0, rel=1e-10)
    lengths = characteristic_lengths(spec)
    assert lengths["planar_length"] == pytest.approx(lengths["axial_length"], rel=1e-10)


def test_pair_energy_scales_values(trap):
    assert pair_energy_scales(10e-6, trap)["magnetic_dipole"] == pytest.approx(8.6e-39, rel=0.02)
    assert pair_energy_scales(10e-6, trap)["magnetic_dipole"] == pytest.approx(8.600726268734914e-39, rel=1e-12)
    assert pair_energy_scales(20e-6, trap)["coulomb"] == pytest.approx(1.1535387753891779e-23, rel=1e-12)


def test_pair_energy_power_laws(trap):
    d = np.geomspace(1e-6, 1e-3, 9)
    coulomb = np.array([pair_energy_scales(x, trap)["coulomb"] for x in d])
    dipole = np.array([pair_energy_scales(x, trap)["magnetic_dipole"] for x in d])
    logd = np.log(d)
    assert np.diff(np.log(coulomb)) / np.diff(logd) == pytest.approx(-1.0, rel=1e-12)
    assert np.diff(np.log(dipole)) / np.diff(logd) == pytest.approx(-3.0, rel=1e-12)


def test_dipole_negligible_against_coulomb(trap):
    scales = pair_energy_scales(20e-6, trap)
    assert scales["magnetic_dipole"] < 1e-14 * scales["coulomb"]


def test_pair_energy_rejects_nonpositive():
    with pytest.raises(ValueError):
        pair_energy_scales(0.0)
