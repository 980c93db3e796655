"""Transverse (drumhead) normal modes of a planar ion crystal.

For a crystal in the plane z = 0 the axial block of the Hessian decouples:

    K = m omega_z^2 I - L,

where L is the graph Laplacian with edge weights k_e q^2 / d_ij^3. The
Lorentz force vanishes for axial velocities, so the modes follow from the
symmetric eigenproblem K b = m omega^2 b.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import UnstablePlanarCrystalError


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Axial modes sorted by descending frequency.

    ``eigenvectors[:, m]`` is b_m. Degenerate subspaces come back in whatever
    orthonormal basis the eigensolver picks; couplings only see the
    projector onto each subspace, so the choice is immaterial.
    """

    frequencies: np.ndarray
    eigenvectors: np.ndarray
    omega_sq: np.ndarray
    com_index: int
    crystal: object
    stiffness: np.ndarray

    @property
    def n(self):
        return self.frequencies.shape[0]

    @property
    def stable(self):
        return bool(self.omega_sq.min() > 0)


def coulomb_weights(crystal):
    """Laplacian edge weights k_e q^2 / d_ij^3 (N/m), zero diagonal."""
    return crystal.trap.coulomb_strength * kernels.inverse_cube_matrix(crystal.positions)


def stiffness_matrix(crystal):
    """Axial stiffness matrix (N/m): m omega_z^2 on the diagonal minus the Coulomb Laplacian."""
    trap = crystal.trap
    w = coulomb_weights(crystal)
    k = w.copy()
    k[np.diag_indices_from(k)] = trap.ion_mass * trap.omega_z**2 - w.sum(axis=1)
    return k


def _fix_signs(vecs):
    # first component that is not negligible is made positive
    scale = np.abs(vecs).max(axis=0)
    first = np.argmax(np.abs(vecs) > 1e-8 * scale, axis=0)
    signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def mode_spectrum(crystal, check=True):
    """Diagonalise the axial stiffness matrix.

    The COM mode is the eigenvector with the smallest component variance.
    With ``check`` set, a non-positive eigenvalue raises
    :class:`UnstablePlanarCrystalError`; otherwise unstable modes get
    frequency 0 and show up only in ``omega_sq``.
    """
    k = stiffness_matrix(crystal)
    evals, evecs = np.linalg.eigh(k / crystal.trap.ion_mass)
    order = np.argsort(evals, kind="stable")[::-1]
    omega_sq = evals[order]
    vecs = _fix_signs(evecs[:, order])
    if check and omega_sq.min() <= 0:
        raise UnstablePlanarCrystalError(
            f"axial mode with omega^2 = {omega_sq.min():.4g} rad^2/s^2 <= 0: "
            "planar crystal is unstable against buckling"
        )
    freqs = np.sqrt(np.clip(omega_sq, 0.0, None))
    com = int(np.argmin(vecs.var(axis=0)))
    for arr in (freqs, vecs, omega_sq, k):
        arr.setflags(write=False)
    return ModeSpectrum(freqs, vecs, omega_sq, com, crystal, k)


def check_planar_stability(spectrum):
    """Stability report: min omega_m^2 and the margin m omega_z^2 - lambda_max(L)."""
    trap = spectrum.crystal.trap
    m_wz2 = trap.ion_mass * trap.omega_z**2
    # K = m wz^2 I - L, so lambda_min(K) = m wz^2 - lambda_max(L)
    margin = trap.ion_mass * float(spectrum.omega_sq.min())
    lowest = float(np.sqrt(spectrum.omega_sq.min())) if spectrum.stable else 0.0
    return {
        "stable": margin > 0,
        "min_omega_sq": float(spectrum.omega_sq.min()),
        "min_frequency": lowest,
        "margin": margin,
        "laplacian_max_eigenvalue": m_wz2 - margin,
    }
