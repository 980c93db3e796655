import math

import numpy as np
import pytest

from penning_ising.couplings import OdfSpec
from penning_ising.crystal import find_equilibrium, seed_lattice
from penning_ising.modes import mode_spectrum
from penning_ising.trap import TrapSpec

# Frozen by a 40-digit mpmath evaluation with the CODATA 2022 constants that
# scipy.constants ships; see tests/oracles.py for the derivation.
DEFAULT_TRAP = TrapSpec()
DEFAULT_ODF = OdfSpec()


@pytest.fixture(scope="session")
def trap():
    return DEFAULT_TRAP


@pytest.fixture(scope="session")
def odf():
    return DEFAULT_ODF


@pytest.fixture(scope="session")
def crystals(trap):
    """Equilibrium crystals keyed by ion number, built once per session."""
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = find_equilibrium(seed_lattice(n, trap), trap)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def spectra(crystals):
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = mode_spectrum(crystals(n))
        return cache[n]

    return get


def random_couplings(rng, n, scale=500.0):
    j = rng.normal(size=(n, n)) * scale
    j = j + j.T
    np.fill_diagonal(j, 0.0)
    return j


def khz(x):
    return 2.0 * math.pi * 1e3 * x


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
