"""Run configuration: an INI-style file with one section per stage.

Frequencies are entered in Hz and converted to rad/s here; nothing past this
module sees ordinary frequencies. Every key is optional, unknown sections or
keys are rejected.
"""
import configparser
import dataclasses
import math
from dataclasses import dataclass, field

from .couplings import OdfSpec
from .errors import ConfigError
from .trap import BE9_ION_MASS, CONSTANTS, TWO_PI, TrapSpec

DEFAULT_MASS_U = BE9_ION_MASS / CONSTANTS.atomic_mass_unit


@dataclass(frozen=True)
class SpeciesConfig:
    mass_u: float = DEFAULT_MASS_U
    charge_e: float = 1.0


@dataclass(frozen=True)
class TrapConfig:
    b0_tesla: float = 4.46
    f_z_hz: float = 795e3
    f_r_hz: float = 45e3


@dataclass(frozen=True)
class CrystalConfig:
    n_ions: int = 217
    tol: float = 1e-6
    max_iter: int = 20000
    jitter_seed: int = 0


@dataclass(frozen=True)
class OdfConfig:
    f0_newton: float = 2e-23
    f_mu_hz: float = 800e3
    theta_r_deg: float = 4.8
    wavelength_m: float = 313e-9
    temperature_k: float = 1e-3
    guard_band_rel: float = 1e-6
    lamb_dicke_threshold: float = 1.0


@dataclass(frozen=True)
class DynamicsConfig:
    theta_rad: float = math.pi / 2
    b_transverse_hz: float = 0.0
    t_start_s: float = 0.0
    t_stop_s: float = 2e-3
    t_steps: int = 101
    precession_points: int = 19
    size_cap: int = 14


@dataclass(frozen=True)
class SweepConfig:
    detunings_hz: tuple = (500.0, 1e3, 5e3, 10e3, 50e3, 100e3)
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    species: SpeciesConfig = field(default_factory=SpeciesConfig)
    trap: TrapConfig = field(default_factory=TrapConfig)
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    odf: OdfConfig = field(default_factory=OdfConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def trap_spec(self):
        return TrapSpec(
            omega_z=TWO_PI * self.trap.f_z_hz,
            omega_r=TWO_PI * self.trap.f_r_hz,
            b_field=self.trap.b0_tesla,
            ion_mass=self.species.mass_u * CONSTANTS.atomic_mass_unit,
            ion_charge=self.species.charge_e * CONSTANTS.elementary_charge,
        )

    def odf_spec(self):
        return OdfSpec(
            f0=self.odf.f0_newton,
            mu_r=TWO_PI * self.odf.f_mu_hz,
            theta_r=math.radians(self.odf.theta_r_deg),
            optical_wavelength=self.odf.wavelength_m,
            temperature=self.odf.temperature_k,
        )

    def replace(self, section, **changes):
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    def si_echo(self):
        """Every input after unit conversion (rad/s, kg, C, rad)."""
        trap = self.trap_spec()
        odf = self.odf_spec()
        return {
            "ion_mass_kg": trap.ion_mass,
            "ion_charge_c": trap.ion_charge,
            "b_field_t": trap.b_field,
            "omega_z_rad_s": trap.omega_z,
            "omega_r_rad_s": trap.omega_r,
            "n_ions": self.crystal.n_ions,
            "crystal_tol_rel": self.crystal.tol,
            "crystal_max_iter": self.crystal.max_iter,
            "jitter_seed": self.crystal.jitter_seed,
            "f0_n": odf.f0,
            "mu_r_rad_s": odf.mu_r,
            "theta_r_rad": odf.theta_r,
            "optical_wavelength_m": odf.optical_wavelength,
            "temperature_k": odf.temperature,
            "guard_band_rel": self.odf.guard_band_rel,
            "lamb_dicke_threshold": self.odf.lamb_dicke_threshold,
            "dynamics_theta_rad": self.dynamics.theta_rad,
            "b_transverse_rad_s": TWO_PI * self.dynamics.b_transverse_hz,
            "t_start_s": self.dynamics.t_start_s,
            "t_stop_s": self.dynamics.t_stop_s,
            "t_steps": self.dynamics.t_steps,
            "precession_points": self.dynamics.precession_points,
            "size_cap": self.dynamics.size_cap,
            "detunings_rad_s": [TWO_PI * d for d in self.sweep.detunings_hz],
            "sweep_workers": self.sweep.workers,
            "output_format": self.output.format,
        }


_POSITIVE = {
    "species.mass_u", "species.charge_e", "trap.b0_tesla", "trap.f_z_hz", "trap.f_r_hz",
    "crystal.n_ions", "crystal.tol", "crystal.max_iter", "odf.f0_newton", "odf.f_mu_hz",
    "odf.theta_r_deg", "odf.wavelength_m", "odf.guard_band_rel", "dynamics.t_steps",
    "dynamics.precession_points", "dynamics.size_cap", "sweep.workers",
}
_NON_NEGATIVE = {"odf.temperature_k", "odf.lamb_dicke_threshold", "crystal.jitter_seed", "dynamics.t_start_s"}


def _parse_value(raw, default, key):
    try:
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if isinstance(default, bool):
            raise TypeError
        if isinstance(default, int):
            value = float(raw)
            if value != int(value):
                raise ValueError(f"{raw!r} is not an integer")
            return int(value)
        if isinstance(default, float):
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(f"{raw!r} is not finite")
            return value
        return raw.strip()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None


def _validate(cfg):
    for section in dataclasses.fields(cfg):
        sub = getattr(cfg, section.name)
        for f in dataclasses.fields(sub):
            key = f"{section.name}.{f.name}"
            value = getattr(sub, f.name)
            if key in _POSITIVE and not value > 0:
                hint = ""
                if key == "trap.f_r_hz":
                    hint = (" (beta = omega_r(Omega_c - omega_r)/omega_z^2 - 1/2 needs a "
                            "rotation frequency for radial confinement)")
                raise ConfigError(f"{key} must be positive, got {value!r}{hint}")
            if key in _NON_NEGATIVE and value < 0:
                raise ConfigError(f"{key} must be non-negative, got {value!r}")
    if not cfg.odf.theta_r_deg < 180:
        raise ConfigError(f"odf.theta_r_deg must lie in (0, 180), got {cfg.odf.theta_r_deg!r}")
    if cfg.dynamics.t_stop_s < cfg.dynamics.t_start_s:
        raise ConfigError("dynamics.t_stop_s must not precede dynamics.t_start_s")
    if cfg.output.format not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {cfg.output.format!r}")
    if not cfg.sweep.detunings_hz:
        raise ConfigError("sweep.detunings_hz must list at least one detuning")

    omega_z = TWO_PI * cfg.trap.f_z_hz
    omega_r = TWO_PI * cfg.trap.f_r_hz
    mass = cfg.species.mass_u * CONSTANTS.atomic_mass_unit
    charge = cfg.species.charge_e * CONSTANTS.elementary_charge
    omega_c = charge * cfg.trap.b0_tesla / mass
    if omega_r >= omega_c:
        raise ConfigError(
            f"trap.f_r_hz = {cfg.trap.f_r_hz:g} Hz is not below the cyclotron frequency "
            f"{omega_c / TWO_PI:g} Hz"
        )
    beta = omega_r * (omega_c - omega_r) / omega_z**2 - 0.5
    if not beta > 0:
        raise ConfigError(
            f"trap.f_r_hz = {cfg.trap.f_r_hz:g} Hz gives beta = omega_r(Omega_c - omega_r)/omega_z^2 "
            f"- 1/2 = {beta:.4g} <= 0: no radial confinement"
        )
    return cfg


def parse_config(text, source="<string>"):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    defaults = RunConfig()
    sections = {f.name: getattr(defaults, f.name) for f in dataclasses.fields(defaults)}
    updates = {}
    for name in parser.sections():
        if name not in sections:
            raise ConfigError(f"{source}: unknown section [{name}]")
        base = sections[name]
        known = {f.name for f in dataclasses.fields(base)}
        values = {}
        for key, raw in parser.items(name):
            if key not in known:
                raise ConfigError(f"{source}: unknown key {name}.{key}")
            values[key] = _parse_value(raw, getattr(base, key), f"{name}.{key}")
        updates[name] = dataclasses.replace(base, **values)
    return _validate(dataclasses.replace(defaults, **updates))


def load_config(path=None):
    """Read and validate a configuration file; ``None`` gives the defaults."""
    if path is None:
        return _validate(RunConfig())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def render_config(cfg):
    """Serialise a config back to the INI format (round-trips through parse_config)."""
    lines = []
    for section in dataclasses.fields(cfg):
        sub = getattr(cfg, section.name)
        lines.append(f"[{section.name}]")
        for f in dataclasses.fields(sub):
            value = getattr(sub, f.name)
            if isinstance(value, tuple):
                value = ", ".join(repr(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        lines.append("")
    return "\n".join(lines)
