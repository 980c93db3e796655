"""Phonon-mediated Ising couplings driven by a spin-dependent optical dipole force.

For a drive F0 cos(mu t) on every ion (sign set by the spin), the effective
interaction H = (1/N) sum_{i<j} J_ij sz_i sz_j has

    J_ij = F0^2 N / (2 hbar m) * sum_m b_im b_jm / (mu^2 - omega_m^2)

in rad/s, summed over all N transverse modes.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, PhysicsError, ResonanceError, UnstablePlanarCrystalError
from .modes import coulomb_weights, stiffness_matrix

DEFAULT_GUARD_BAND = 1e-6
DEFAULT_LAMB_DICKE_THRESHOLD = 1.0


@dataclass(frozen=True)
class OdfSpec:
    f0: float = 2e-23
    mu_r: float = 2.0 * math.pi * 800e3
    theta_r: float = math.radians(4.8)
    optical_wavelength: float = 313e-9
    temperature: float = 1e-3

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError(f"f0 must be positive, got {self.f0!r}")
        if not self.mu_r > 0:
            raise ValueError(f"mu_r must be positive, got {self.mu_r!r}")
        if not 0 < self.theta_r < math.pi:
            raise ValueError(f"theta_r must lie in (0, pi), got {self.theta_r!r}")
        if not self.optical_wavelength > 0:
            raise ValueError("optical_wavelength must be positive")
        if not self.temperature >= 0:
            raise ValueError("temperature must be non-negative")

    def with_mu(self, mu_r):
        return OdfSpec(self.f0, mu_r, self.theta_r, self.optical_wavelength, self.temperature)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    j: np.ndarray
    jbar: float
    power_law_a: float
    fit_rms: float
    mu_r: float

    @property
    def n(self):
        return self.j.shape[0]


def odf_wavevector(odf):
    """Wavevector difference |dk| = 2 k sin(theta/2) of the crossed beams, and lambda_R = 2 pi/|dk|."""
    dk = 2.0 * (2.0 * math.pi / odf.optical_wavelength) * math.sin(odf.theta_r / 2.0)
    return {"delta_k": dk, "lambda_r": 2.0 * math.pi / dk}


def lamb_dicke_check(spectrum, odf, threshold=DEFAULT_LAMB_DICKE_THRESHOLD):
    """Per-mode Lamb-Dicke parameters at the ODF wavevector.

    z0 = sqrt(hbar / 2 m omega) is the ground-state extent; the thermal RMS
    is z0 sqrt(coth(hbar omega / 2 k T)). A mode passes when |dk| z_rms is
    below ``threshold``.
    """
    trap = spectrum.crystal.trap
    c = trap.constants
    omega = np.asarray(spectrum.frequencies)
    z0 = np.sqrt(c.reduced_planck / (2.0 * trap.ion_mass * omega))
    if odf.temperature > 0:
        x = c.reduced_planck * omega / (2.0 * c.boltzmann * odf.temperature)
        z_rms = z0 * np.sqrt(1.0 / np.tanh(x))
    else:
        z_rms = z0.copy()
    dk = odf_wavevector(odf)["delta_k"]
    eta = dk * z0
    thermal = dk * z_rms
    passed = thermal < threshold
    return {
        "z0_m": z0,
        "eta_m": eta,
        "rms_z_m": z_rms,
        "thermal_eta_m": thermal,
        "mode_pass": passed,
        "pass": bool(passed.all()),
        "threshold": threshold,
    }


def _check_resonance(omegas, mu, omega_z, guard_band):
    gap = np.abs(mu - np.asarray(omegas))
    k = int(np.argmin(gap))
    if gap[k] <= guard_band * omega_z:
        raise ResonanceError(
            f"mu_r = {mu:.9g} rad/s within {guard_band:g} omega_z of mode {k} "
            f"(omega = {omegas[k]:.9g} rad/s)"
        )


def coupling_prefactor(trap, odf, n):
    """F0^2 N / (2 hbar m) in rad/s * (rad/s)^2."""
    return odf.f0**2 * n / (2.0 * trap.constants.reduced_planck * trap.ion_mass)


def coupling_matrix(spectrum, odf, n=None, guard_band=DEFAULT_GUARD_BAND):
    """Evaluate the mode sum for J_ij exactly and summarise it.

    ``n`` is the spin count in the prefactor and defaults to the mode count.
    Raises :class:`ResonanceError` when mu_r lies within ``guard_band * omega_z``
    of any mode.
    """
    trap = spectrum.crystal.trap
    n = spectrum.n if n is None else n
    if not spectrum.stable:
        raise UnstablePlanarCrystalError("coupling matrix needs a stable mode spectrum")
    _check_resonance(spectrum.frequencies, odf.mu_r, trap.omega_z, guard_band)
    weights = 1.0 / (odf.mu_r**2 - spectrum.omega_sq)
    b = spectrum.eigenvectors
    j = coupling_prefactor(trap, odf, n) * ((b * weights) @ b.T)
    j = 0.5 * (j + j.T)
    np.fill_diagonal(j, 0.0)
    a, rms = math.nan, math.nan
    if spectrum.n >= 3:
        try:
            fit = fit_power_law(j, spectrum.crystal)
            a, rms = fit["a"], fit["fit_rms"]
        except DegenerateFitError:
            pass
    j.setflags(write=False)
    return CouplingMatrix(j=j, jbar=mean_coupling(j), power_law_a=a, fit_rms=rms, mu_r=odf.mu_r)


def mean_coupling(cm, n=None):
    """Average pairwise coupling (1/N^2) sum_j sum_{i != j} J_ij."""
    j = cm.j if isinstance(cm, CouplingMatrix) else np.asarray(cm)
    n = j.shape[0] if n is None else n
    off = j.sum() - np.trace(j)
    return float(off / n**2)


def two_ion_closed_form(d, spec, odf, guard_band=DEFAULT_GUARD_BAND):
    """J_12 for two ions at separation ``d`` from the explicit COM and tilt modes.

    The tilt mode has omega_t^2 = omega_z^2 - 2 k_e q^2 / (m d^3).
    """
    if not d > 0:
        raise ValueError(f"separation must be positive, got {d!r}")
    wz2 = spec.omega_z**2
    wt2 = wz2 - 2.0 * spec.coulomb_strength / (spec.ion_mass * d**3)
    if wt2 <= 0:
        raise UnstablePlanarCrystalError(f"tilt mode unstable at d = {d:.4g} m")
    _check_resonance([spec.omega_z, math.sqrt(wt2)], odf.mu_r, spec.omega_z, guard_band)
    mu2 = odf.mu_r**2
    pref = odf.f0**2 / (2.0 * spec.constants.reduced_planck * spec.ion_mass)
    return pref * (1.0 / (mu2 - wz2) - 1.0 / (mu2 - wt2))


def static_adiabatic_oracle(crystal, f0):
    """Pair coefficients C_ij = -F0^2 (K^-1)_ij (J) for a static spin-dependent force.

    The quadratic response energy is E(s) = -F0^2 s^T K^-1 s / 2, whose
    s_i s_j coefficient is C_ij. It relates to the oscillating drive by
    C_ij = 2 hbar J_ij(mu -> 0) / N.
    """
    k = stiffness_matrix(crystal)
    evals, evecs = np.linalg.eigh(k)
    if evals.min() <= 0:
        raise UnstablePlanarCrystalError("stiffness matrix not positive definite")
    kinv = (evecs / evals) @ evecs.T
    c = -(f0**2) * 0.5 * (kinv + kinv.T)
    np.fill_diagonal(c, 0.0)
    return c


def large_detuning_limit(crystal, odf, n=None):
    """Leading behaviour mu^4 J_ij -> (F0^2 N / 2 hbar m) k_e q^2 / (m d_ij^3)."""
    trap = crystal.trap
    n = crystal.n if n is None else n
    return coupling_prefactor(trap, odf, n) * coulomb_weights(crystal) / trap.ion_mass


def fit_power_law(cm, crystal):
    """Least-squares fit of log|J_ij| against log d_ij over all pairs i < j.

    Returns the exponent ``a`` of J ~ 1/d^a and the RMS residual in log space.
    Pairs with J_ij = 0 are skipped.
    """
    j = cm.j if isinstance(cm, CouplingMatrix) else np.asarray(cm)
    if crystal.n < 3:
        raise DegenerateFitError("power-law fit needs at least three ions")
    iu = np.triu_indices(crystal.n, k=1)
    d = crystal.distances()[iu]
    vals = np.abs(j[iu])
    keep = vals > 0
    d, vals = d[keep], vals[keep]
    if np.unique(np.round(d / d.max(), 9)).size < 2:
        raise DegenerateFitError("fewer than two distinct pair distances")
    x, y = np.log(d), np.log(vals)
    design = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    return {"a": float(-slope), "fit_rms": float(np.sqrt(np.mean(resid**2))), "log_amplitude": float(intercept)}


@dataclass(frozen=True)
class SweepRow:
    detuning: float
    jbar: float
    a: float
    fit_rms: float
    error: str = ""


def detuning_sweep(crystal, spectrum, odf_base, detunings, guard_band=DEFAULT_GUARD_BAND, workers=1):
    """J-bar and power-law exponent at mu = omega_z + delta for each detuning (rad/s).

    Rows keep the input order. A resonant or otherwise invalid row carries
    the error message and NaN values instead of aborting the sweep.
    """
    omega_z = crystal.trap.omega_z

    def row(delta):
        try:
            cm = coupling_matrix(spectrum, odf_base.with_mu(omega_z + delta), crystal.n, guard_band)
        except (PhysicsError, ValueError) as exc:
            return SweepRow(delta, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
        return SweepRow(delta, cm.jbar, cm.power_law_a, cm.fit_rms)

    detunings = list(detunings)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(row, detunings))
    return [row(d) for d in detunings]
