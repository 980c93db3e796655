import math

import numpy as np
import pytest

from penning_ising.couplings import (
    CouplingMatrix,
    OdfSpec,
    coupling_matrix,
    coupling_prefactor,
    detuning_sweep,
    fit_power_law,
    lamb_dicke_check,
    large_detuning_limit,
    mean_coupling,
    odf_wavevector,
    static_adiabatic_oracle,
    two_ion_closed_form,
)
from penning_ising.crystal import Crystal, find_equilibrium, seed_lattice
from penning_ising.errors import DegenerateFitError, ResonanceError
from penning_ising.modes import mode_spectrum, stiffness_matrix

from conftest import khz

J12_20UM_800KHZ = 372.14315735692504
C12_20UM = 9.7861514741847895e-35
TILT_20UM = 4593148.2905672835
NEAR_COM_JBAR_DELTA = 12685984.425261177


def _pair(trap, d):
    return Crystal.from_positions([[-d / 2, 0.0], [d / 2, 0.0]], trap)


# -- ODF geometry and Lamb-Dicke -------------------------------------------------

def test_odf_effective_wavelength(odf):
    lam = odf_wavevector(odf)["lambda_r"]
    assert lam == pytest.approx(3.7372550888888819e-6, rel=1e-12)
    assert lam == pytest.approx(3.7e-6, rel=0.03)


def test_odf_counter_propagating_limit():
    odf = OdfSpec(theta_r=math.pi * (1 - 1e-9))
    assert odf_wavevector(odf)["lambda_r"] == pytest.approx(313e-9 / 2, rel=1e-12)


def test_odf_small_angle_linear():
    a = odf_wavevector(OdfSpec(theta_r=2e-3))["delta_k"]
    b = odf_wavevector(OdfSpec(theta_r=1e-3))["delta_k"]
    assert b == pytest.approx(a / 2, rel=1e-6)


def test_odf_spec_validation():
    for bad in ({"f0": 0.0}, {"mu_r": -1.0}, {"theta_r": 0.0}, {"theta_r": math.pi}, {"optical_wavelength": 0.0}):
        with pytest.raises(ValueError):
            OdfSpec(**bad)


def test_lamb_dicke_com_mode(spectra, odf):
    spec = spectra(7)
    report = lamb_dicke_check(spec, odf)
    com = spec.com_index
    assert report["z0_m"][com] == pytest.approx(2.6559705194917307e-8, rel=1e-9)
    assert report["eta_m"][com] == pytest.approx(0.044652972696423697, rel=1e-9)
    assert report["pass"]


def test_lamb_dicke_zero_temperature_and_threshold(spectra, odf):
    spec = spectra(7)
    cold = lamb_dicke_check(spec, OdfSpec(temperature=0.0))
    np.testing.assert_allclose(cold["thermal_eta_m"], cold["eta_m"], rtol=1e-15)
    nearly_cold = lamb_dicke_check(spec, OdfSpec(temperature=1e-9))
    np.testing.assert_allclose(nearly_cold["thermal_eta_m"], cold["eta_m"], rtol=1e-12)
    warm = lamb_dicke_check(spec, odf)
    assert np.all(warm["thermal_eta_m"] > warm["eta_m"])
    assert not lamb_dicke_check(spec, odf, threshold=0.0)["pass"]


# -- coupling matrix --------------------------------------------------------------

def test_two_ion_coupling_value(trap):
    odf = OdfSpec(mu_r=2 * math.pi * 800e3)
    j12 = two_ion_closed_form(20e-6, trap, odf)
    assert j12 == pytest.approx(J12_20UM_800KHZ, rel=1e-6)
    assert j12 == pytest.approx(3.7e2, rel=0.02)
    cm = coupling_matrix(mode_spectrum(_pair(trap, 20e-6)), odf)
    assert cm.j[0, 1] == pytest.approx(J12_20UM_800KHZ, rel=1e-6)


def test_two_ion_oracle_equivalence_random(trap, odf):
    rng = np.random.default_rng(100)
    for _ in range(100):
        d = rng.uniform(15e-6, 80e-6)
        spec = mode_spectrum(_pair(trap, d))
        tilt = spec.frequencies[1]
        # keep at least 1 kHz from either pole
        while True:
            mu = rng.uniform(0.8 * tilt, 1.2 * trap.omega_z)
            if min(abs(mu - trap.omega_z), abs(mu - tilt)) > khz(1):
                break
        o = odf.with_mu(mu)
        assert coupling_matrix(spec, o).j[0, 1] == pytest.approx(two_ion_closed_form(d, trap, o), rel=1e-12)


def test_two_ion_sign_flips_inside_band(trap, odf):
    tilt = TILT_20UM
    above = two_ion_closed_form(20e-6, trap, odf.with_mu(trap.omega_z + khz(5)))
    between = two_ion_closed_form(20e-6, trap, odf.with_mu(0.5 * (tilt + trap.omega_z)))
    assert above > 0
    assert between < 0


def test_two_ion_vanishes_at_large_separation(trap, odf):
    values = [abs(two_ion_closed_form(d, trap, odf)) for d in (20e-6, 200e-6, 2e-3)]
    assert values[0] > values[1] > values[2]
    # once the tilt mode merges with COM the coupling falls as d^-3
    assert values[2] / values[1] == pytest.approx(1e-3, rel=0.02)


@pytest.mark.parametrize("n", [2, 7, 50, 217])
def test_antiferromagnetic_above_band(spectra, odf, trap, n):
    spec = spectra(n)
    off = ~np.eye(n, dtype=bool)
    for delta in (0.5, 1, 5, 10, 50, 100):
        cm = coupling_matrix(spec, odf.with_mu(trap.omega_z + khz(delta)))
        assert cm.j[off].min() > 0


def test_coupling_matrix_structure(spectra, odf):
    cm = coupling_matrix(spectra(50), odf)
    np.testing.assert_array_equal(cm.j, cm.j.T)
    np.testing.assert_array_equal(np.diag(cm.j), 0.0)
    assert cm.jbar == mean_coupling(cm.j)
    assert cm.mu_r == odf.mu_r
    assert 0 < cm.power_law_a < 3


def test_coupling_vanishes_at_large_detuning(spectra, odf, trap):
    spec = spectra(7)
    mags = [np.abs(coupling_matrix(spec, odf.with_mu(f * trap.omega_z)).j).max() for f in (2, 20, 200)]
    assert mags[0] > mags[1] > mags[2]
    assert mags[2] < 1e-7 * mags[0]


def test_resonance_guard(spectra, odf, trap):
    spec = spectra(7)
    with pytest.raises(ResonanceError):
        coupling_matrix(spec, odf.with_mu(trap.omega_z))
    with pytest.raises(ResonanceError):
        coupling_matrix(spec, odf.with_mu(spec.frequencies[3] * (1 + 1e-7)))
    coupling_matrix(spec, odf.with_mu(spec.frequencies[3] * (1 + 1e-5)))
    with pytest.raises(ResonanceError):
        coupling_matrix(spec, odf.with_mu(spec.frequencies[3] * (1 + 1e-5)), guard_band=1e-4)


def test_large_detuning_asymptote(crystals, spectra, odf, trap):
    crystal, spec = crystals(217), spectra(217)
    iu = np.triu_indices(crystal.n, 1)
    mu = 20 * trap.omega_z
    cm = coupling_matrix(spec, odf.with_mu(mu))
    ratio = mu**4 * cm.j[iu] / large_detuning_limit(crystal, odf)[iu]
    assert np.abs(ratio - 1).max() < 0.01
    assert cm.power_law_a == pytest.approx(3.0, abs=0.15)


def test_ten_omega_z_two_term_expansion(crystals, spectra, odf, trap):
    """sum_m b b /(mu^2 - w^2) = sum_k (K/m)^k / mu^(2k+2); two off-diagonal terms at 10 omega_z."""
    crystal, spec = crystals(217), spectra(217)
    mu = 10 * trap.omega_z
    cm = coupling_matrix(spec, odf.with_mu(mu))
    assert cm.power_law_a == pytest.approx(3.0, rel=0.05)
    d = stiffness_matrix(crystal) / trap.ion_mass
    series = d / mu**4 + d @ d / mu**6 + d @ d @ d / mu**8
    expected = coupling_prefactor(trap, odf, crystal.n) * series
    iu = np.triu_indices(crystal.n, 1)
    np.testing.assert_allclose(cm.j[iu], expected[iu], rtol=2e-4)


# -- static limit -------------------------------------------------------------------

def test_static_oracle_two_ions(trap, odf):
    c = static_adiabatic_oracle(_pair(trap, 20e-6), odf.f0)
    assert c[0, 1] == pytest.approx(C12_20UM, rel=1e-9)
    assert c[0, 1] > 0


def test_static_oracle_magnitude_matches_two_ion_display(trap, odf):
    d = 20e-6
    c12 = static_adiabatic_oracle(_pair(trap, d), odf.f0)[0, 1]
    display = trap.coulomb_strength / d**3 * odf.f0**2 / (trap.ion_mass * trap.omega_z**2) ** 2
    correction = trap.omega_z**2 / TILT_20UM**2
    assert display * correction == pytest.approx(abs(c12), rel=1e-6)


@pytest.mark.parametrize("n", [2, 3, 7])
def test_static_bridge(crystals, odf, trap, n):
    crystal = crystals(n)
    hbar = trap.constants.reduced_planck
    c = static_adiabatic_oracle(crystal, odf.f0)
    j = coupling_matrix(mode_spectrum(crystal), odf.with_mu(1e-3 * trap.omega_z)).j
    iu = np.triu_indices(n, 1)
    np.testing.assert_allclose(n * c[iu] / (2 * hbar), j[iu], rtol=1e-4)


def test_static_oracle_symmetric_triangle(crystals, odf):
    c = static_adiabatic_oracle(crystals(3), odf.f0)
    vals = c[np.triu_indices(3, 1)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-8)


# -- averages and power-law fit ----------------------------------------------------------

def test_mean_coupling_counting():
    j0, n = 3.5, 9
    j = np.full((n, n), j0)
    np.fill_diagonal(j, 0.0)
    assert mean_coupling(j) == pytest.approx(j0 * (n - 1) / n, rel=1e-15)
    pair = np.array([[0.0, 2.0], [2.0, 0.0]])
    assert mean_coupling(pair) == pytest.approx(1.0)


def test_mean_coupling_near_com_limit(spectra, odf, trap):
    n = 217
    spec = spectra(n)
    delta = khz(0.5)
    jbar = coupling_matrix(spec, odf.with_mu(trap.omega_z + delta)).jbar
    limit = NEAR_COM_JBAR_DELTA * (n - 1) / n
    assert jbar * delta == pytest.approx(limit, rel=0.01)


def test_power_law_synthetic_cubic(crystals):
    crystal = crystals(50)
    d = crystal.distances()
    with np.errstate(divide="ignore"):
        j = 7.0 / d**3
    np.fill_diagonal(j, 0.0)
    fit = fit_power_law(j, crystal)
    assert fit["a"] == pytest.approx(3.0, abs=1e-3)
    assert fit["fit_rms"] < 1e-10


def test_power_law_degenerate(crystals, trap):
    with pytest.raises(DegenerateFitError):
        fit_power_law(np.ones((2, 2)), crystals(2))
    triangle = Crystal.from_positions(seed_lattice(3, trap, jitter=0.0), trap)
    with pytest.raises(DegenerateFitError):
        fit_power_law(np.ones((3, 3)), triangle)


def test_power_law_skips_zero_couplings(crystals):
    crystal = crystals(7)
    d = crystal.distances()
    with np.errstate(divide="ignore"):
        j = 1.0 / d**2
    j[0, 1] = j[1, 0] = 0.0
    np.fill_diagonal(j, 0.0)
    assert fit_power_law(j, crystal)["a"] == pytest.approx(2.0, abs=1e-9)


def test_nearly_uniform_near_com(spectra, odf, trap):
    cm = coupling_matrix(spectra(217), odf.with_mu(trap.omega_z + khz(0.5)))
    off = cm.j[~np.eye(217, dtype=bool)]
    assert off.std() / off.mean() < 0.05
    assert cm.power_law_a < 0.1


# -- detuning sweep ------------------------------------------------------------------

GRID = [0.5, 1, 5, 10, 50, 100]


def test_sweep_monotone_exponent_and_positive(crystals, spectra, odf):
    rows = detuning_sweep(crystals(217), spectra(217), odf, [khz(x) for x in GRID])
    assert [r.detuning for r in rows] == [khz(x) for x in GRID]
    a = [r.a for r in rows]
    assert all(x < y for x, y in zip(a, a[1:]))
    assert all(r.jbar > 0 for r in rows)
    assert 0 <= a[0] and a[-1] <= 3.2


def test_sweep_inverse_detuning_scaling(crystals, spectra, odf):
    deltas = [khz(x) for x in (0.5, 0.75, 1.0, 1.5, 2.0)]
    rows = detuning_sweep(crystals(217), spectra(217), odf, deltas)
    products = np.array([r.jbar * d for r, d in zip(rows, deltas)])
    assert products.max() / products.min() - 1 < 0.10


def test_sweep_collects_resonant_rows(crystals, spectra, odf, trap):
    spec = spectra(50)
    resonant = spec.frequencies[5] - trap.omega_z
    rows = detuning_sweep(crystals(50), spec, odf, [khz(1), resonant, khz(2)])
    assert rows[0].error == "" and rows[2].error == ""
    assert rows[1].error.startswith("ResonanceError")
    assert math.isnan(rows[1].jbar)


def test_sweep_threads_bitwise_identical(crystals, spectra, odf):
    deltas = [khz(x) for x in GRID]
    serial = detuning_sweep(crystals(217), spectra(217), odf, deltas)
    threaded = detuning_sweep(crystals(217), spectra(217), odf, deltas, workers=4)
    assert serial == threaded


def test_coupling_matrix_type(spectra, odf):
    assert isinstance(coupling_matrix(spectra(7), odf), CouplingMatrix)
