"""Spin dynamics under the engineered Ising Hamiltonian.

Conventions (hbar = 1, energies in rad/s):

    H = (1/N) sum_{i<j} J_ij sz_i sz_j + (b/2) sum_j sx_j

so ``b`` is the full Rabi frequency between up and down. Basis state 0 of each
spin is up (sz = +1); spin 0 is the most significant bit. A preparation at
angle theta is |up> rotated about y, Bloch vector (sin theta, 0, cos theta).
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import expm_multiply

from .errors import NormDriftError, SizeCapError, UnsupportedPreparationError

DEFAULT_SIZE_CAP = 14
NORM_DRIFT_LIMIT = 1e-9
_DENSE_EIGH_MAX_DIM = 2048


def _coupling_array(cm):
    return np.asarray(getattr(cm, "j", cm), dtype=np.float64)


@dataclass(frozen=True, eq=False)
class SpinEnsembleState:
    mode: str
    theta: float
    mean_field: np.ndarray = None
    exact: np.ndarray = None

    @classmethod
    def product(cls, n, theta, mode="exact"):
        if mode == "mean_field":
            vec = np.tile([math.sin(theta), 0.0, math.cos(theta)], (n, 1))
            return cls(mode, theta, mean_field=vec)
        return cls(mode, theta, exact=product_state(n, theta))


def mean_field_field(cm, z_expectations):
    """Effective z field on each spin, (2/N) sum_{i != j} J_ij <sz_i>, in rad/s.

    Under the mean-field model the transverse Bloch component of spin j
    precesses about z at this rate.
    """
    j = _coupling_array(cm)
    z = np.asarray(z_expectations, dtype=np.float64)
    if np.any(np.abs(z) > 1 + 1e-12):
        raise ValueError("<sz> must lie in [-1, 1]")
    n = j.shape[0]
    off = j - np.diag(np.diag(j))
    return (2.0 / n) * (off @ z)


def excess_precession_curve(cm, theta_list):
    """Spin-averaged mean-field precession rate for uniform preparation at each theta."""
    j = _coupling_array(cm)
    n = j.shape[0]
    rates = []
    for theta in theta_list:
        field = mean_field_field(j, np.full(n, math.cos(theta)))
        rates.append(float(field.mean()))
    return np.array(rates)


def analytic_depolarization(cm, t_list, theta=math.pi / 2):
    """<sx_j(t)> = prod_{k != j} cos(2 J_jk t / N) for spins prepared along +x.

    Returns an array of shape (len(t_list), N).
    """
    if not math.isclose(theta, math.pi / 2, rel_tol=0, abs_tol=1e-12):
        raise UnsupportedPreparationError("closed form holds only for theta = pi/2")
    j = _coupling_array(cm)
    n = j.shape[0]
    t = np.asarray(t_list, dtype=np.float64)
    off = j - np.diag(np.diag(j))
    phases = (2.0 / n) * off[None, :, :] * t[:, None, None]
    cosines = np.cos(phases)
    idx = np.arange(n)
    cosines[:, idx, idx] = 1.0
    return cosines.prod(axis=2)


def product_state(n, theta):
    single = np.array([math.cos(theta / 2.0), math.sin(theta / 2.0)], dtype=np.complex128)
    psi = np.ones(1, dtype=np.complex128)
    for _ in range(n):
        psi = np.kron(psi, single)
    return psi


def _spin_signs(n):
    # signs[k, s] = sz eigenvalue of spin k in basis state s
    states = np.arange(2**n)
    bits = (states[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 1.0 - 2.0 * bits


def ising_diagonal(j, n):
    """Diagonal of (1/N) sum_{i<j} J_ij sz_i sz_j in the computational basis."""
    signs = _spin_signs(n)
    iu, ju = np.triu_indices(n, k=1)
    diag = np.zeros(2**n)
    for a, b in zip(iu, ju):
        diag += j[a, b] * signs[a] * signs[b]
    return diag / n


def transverse_operator(n):
    """Sparse sum_j sx_j."""
    dim = 2**n
    rows = np.arange(dim)
    cols = np.concatenate([rows ^ (1 << (n - 1 - k)) for k in range(n)])
    data = np.ones(n * dim)
    return sparse.csr_matrix((data, (np.tile(rows, n), cols)), shape=(dim, dim))


def spin_expectations(psi, n):
    """Per-spin (<sx>, <sy>, <sz>), each of length N."""
    tensor = psi.reshape((2,) * n)
    sx, sy, sz = np.empty(n), np.empty(n), np.empty(n)
    for k in range(n):
        moved = np.moveaxis(tensor, k, 0).reshape(2, -1)
        up, down = moved[0], moved[1]
        overlap = np.vdot(up, down)
        sx[k] = 2.0 * overlap.real
        sy[k] = 2.0 * overlap.imag
        sz[k] = float(np.vdot(up, up).real - np.vdot(down, down).real)
    return sx, sy, sz


def exact_evolve(cm, b_transverse, theta, t_list, n=None, size_cap=DEFAULT_SIZE_CAP):
    """Statevector evolution from a uniform product state at angle ``theta``.

    Returns a dict with per-spin arrays ``sx``, ``sy``, ``sz`` of shape
    (len(t_list), N), their spin averages, and ``norm`` per time.
    """
    j = _coupling_array(cm)
    n = j.shape[0] if n is None else n
    if n > size_cap:
        raise SizeCapError(f"exact evolution limited to {size_cap} spins, got {n}")
    t = np.asarray(t_list, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")
    psi0 = product_state(n, theta)
    diag = ising_diagonal(j, n)
    dim = 2**n

    if b_transverse == 0:
        states = np.exp(-1j * np.outer(t, diag)) * psi0[None, :]
    elif dim <= _DENSE_EIGH_MAX_DIM:
        ham = (0.5 * b_transverse) * transverse_operator(n).toarray()
        ham[np.diag_indices(dim)] += diag
        evals, evecs = np.linalg.eigh(ham)
        coeff = evecs.T @ psi0
        states = (np.exp(-1j * np.outer(t, evals)) * coeff[None, :]) @ evecs.T
    else:
        ham = (0.5 * b_transverse) * transverse_operator(n) + sparse.diags(diag)
        ham = (-1j * ham).tocsr()
        states = np.empty((t.size, dim), dtype=np.complex128)
        psi, t_prev = psi0, 0.0
        for k, tk in enumerate(t):
            psi = expm_multiply(ham * (tk - t_prev), psi)
            states[k], t_prev = psi, tk

    norms = np.linalg.norm(states, axis=1)
    drift = np.abs(norms - 1.0).max() if t.size else 0.0
    if drift > NORM_DRIFT_LIMIT:
        raise NormDriftError(f"state norm drifted by {drift:.3g}")
    sx = np.empty((t.size, n))
    sy = np.empty((t.size, n))
    sz = np.empty((t.size, n))
    for k in range(t.size):
        sx[k], sy[k], sz[k] = spin_expectations(states[k], n)
    return {
        "t": t,
        "sx": sx,
        "sy": sy,
        "sz": sz,
        "sx_mean": sx.mean(axis=1),
        "sy_mean": sy.mean(axis=1),
        "sz_mean": sz.mean(axis=1),
        "norm": norms,
    }
