"""Engineered Ising couplings in planar Penning-trap ion crystals."""
from .config import RunConfig, load_config
from .couplings import CouplingMatrix, OdfSpec, coupling_matrix, detuning_sweep
from .crystal import Crystal, find_equilibrium, seed_lattice
from .dynamics import analytic_depolarization, exact_evolve, excess_precession_curve, mean_field_field
from .modes import ModeSpectrum, mode_spectrum
from .trap import TrapSpec, characteristic_lengths, cyclotron_frequency, rotating_frame_beta

__version__ = "0.1.0"

__all__ = [
    "Crystal",
    "CouplingMatrix",
    "ModeSpectrum",
    "OdfSpec",
    "RunConfig",
    "TrapSpec",
    "analytic_depolarization",
    "characteristic_lengths",
    "coupling_matrix",
    "cyclotron_frequency",
    "detuning_sweep",
    "exact_evolve",
    "excess_precession_curve",
    "find_equilibrium",
    "load_config",
    "mean_field_field",
    "mode_spectrum",
    "rotating_frame_beta",
    "seed_lattice",
]
