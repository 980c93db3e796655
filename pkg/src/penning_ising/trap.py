"""Physical constants, Penning-trap parameters and closed-form trap quantities.

Frequencies are angular (rad/s) everywhere in the library. Conversion from
ordinary frequency happens only at the configuration boundary.
"""
import math
from dataclasses import dataclass, field

import scipy.constants as const

from .errors import RadialConfinementError


@dataclass(frozen=True)
class PhysicalConstants:
    elementary_charge: float = const.e
    vacuum_permittivity: float = const.epsilon_0
    reduced_planck: float = const.hbar
    vacuum_permeability: float = const.mu_0
    bohr_magneton: float = const.physical_constants["Bohr magneton"][0]
    atomic_mass_unit: float = const.atomic_mass
    electron_mass: float = const.m_e
    boltzmann: float = const.k

    @property
    def coulomb_constant(self):
        return 1.0 / (4.0 * math.pi * self.vacuum_permittivity)

    def table(self):
        """Rows of (name, value, unit) for the reference table in the README."""
        return [
            ("elementary_charge", self.elementary_charge, "C"),
            ("vacuum_permittivity", self.vacuum_permittivity, "F/m"),
            ("coulomb_constant", self.coulomb_constant, "N m^2/C^2"),
            ("reduced_planck", self.reduced_planck, "J s"),
            ("vacuum_permeability", self.vacuum_permeability, "N/A^2"),
            ("bohr_magneton", self.bohr_magneton, "J/T"),
            ("atomic_mass_unit", self.atomic_mass_unit, "kg"),
            ("electron_mass", self.electron_mass, "kg"),
            ("boltzmann", self.boltzmann, "J/K"),
        ]


CONSTANTS = PhysicalConstants()

BE9_ATOMIC_MASS_U = 9.0121831
BE9_ION_MASS = BE9_ATOMIC_MASS_U * CONSTANTS.atomic_mass_unit - CONSTANTS.electron_mass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrapSpec:
    """Penning trap operating point for a single ion species.

    Defaults are the 9Be+ operating point: B0 = 4.46 T, axial frequency
    2pi x 795 kHz and rotation frequency 2pi x 45 kHz.
    """

    omega_z: float = TWO_PI * 795e3
    omega_r: float = TWO_PI * 45e3
    b_field: float = 4.46
    ion_mass: float = BE9_ION_MASS
    ion_charge: float = CONSTANTS.elementary_charge
    constants: PhysicalConstants = field(default=CONSTANTS, repr=False, compare=False)

    def __post_init__(self):
        for name in ("ion_mass", "ion_charge", "b_field", "omega_z", "omega_r"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        omega_c = cyclotron_frequency(self)
        if self.omega_r >= omega_c:
            raise ValueError(
                f"omega_r = {self.omega_r:.6g} rad/s must be below the cyclotron "
                f"frequency {omega_c:.6g} rad/s"
            )

    @property
    def coulomb_strength(self):
        """k_e q^2 in J m."""
        return self.constants.coulomb_constant * self.ion_charge**2


def cyclotron_frequency(spec):
    """Bare cyclotron frequency qB/m in rad/s."""
    return spec.ion_charge * spec.b_field / spec.ion_mass


def rotating_frame_beta(spec, check=True):
    """Radial confinement strength in the rotating frame (weak, symmetric wall).

    beta = omega_r (Omega_c - omega_r) / omega_z^2 - 1/2. With ``check`` set,
    beta <= 0 raises :class:`RadialConfinementError`.
    """
    beta = spec.omega_r * (cyclotron_frequency(spec) - spec.omega_r) / spec.omega_z**2 - 0.5
    if check and not beta > 0:
        raise RadialConfinementError(
            f"beta = omega_r(Omega_c - omega_r)/omega_z^2 - 1/2 = {beta:.6g} <= 0: "
            "no radial confinement in the rotating frame"
        )
    return beta


def characteristic_lengths(spec):
    """Axial length (k_e q^2 / m omega_z^2)^(1/3) and planar length axial / beta^(1/3)."""
    beta = rotating_frame_beta(spec)
    axial = (spec.coulomb_strength / (spec.ion_mass * spec.omega_z**2)) ** (1.0 / 3.0)
    return {"axial_length": axial, "planar_length": axial / beta ** (1.0 / 3.0)}


def pair_energy_scales(d, spec=None):
    """Coulomb and magnetic-dipole interaction energies (J) of two ions at separation ``d``.

    The dipole scale uses one Bohr magneton per ion: mu0 muB^2 / (4 pi d^3).
    """
    if not d > 0:
        raise ValueError(f"separation must be positive, got {d!r}")
    spec = spec if spec is not None else TrapSpec()
    c = spec.constants
    return {
        "coulomb": spec.coulomb_strength / d,
        "magnetic_dipole": c.vacuum_permeability * c.bohr_magneton**2 / (4.0 * math.pi * d**3),
    }
