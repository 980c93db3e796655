"""Pure NumPy implementations of the pairwise Coulomb kernels.

All routines work in dimensionless units where the pair energy is ``1/d``.
They are the reference the compiled kernels are tested against.
"""
import numpy as np


def _pair_geometry(x):
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    return diff, dist


def coulomb_energy_gradient(x):
    """Return ``(sum_{i<j} 1/d_ij, dE/dx)`` for an (N, D) position array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    diff, dist = _pair_geometry(x)
    inv = 1.0 / dist
    energy = 0.5 * inv.sum()
    inv3 = inv**3
    grad = -np.einsum("ij,ijk->ik", inv3, diff)
    return float(energy), grad


def coulomb_hessian(x):
    """Hessian of the Coulomb energy, shape (N*D, N*D), ion-major ordering."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n, dim = x.shape
    diff, dist = _pair_geometry(x)
    inv3 = dist**-3
    inv5 = dist**-5
    # off-diagonal blocks: -(3 r r^T / d^5 - I / d^3)
    blocks = -(3.0 * inv5[:, :, None, None] * diff[:, :, :, None] * diff[:, :, None, :])
    blocks += inv3[:, :, None, None] * np.eye(dim)
    idx = np.arange(n)
    blocks[idx, idx] = -blocks.sum(axis=1)
    return blocks.transpose(0, 2, 1, 3).reshape(n * dim, n * dim)


def inverse_cube_matrix(x):
    """Matrix of ``1/d_ij**3`` with zero diagonal."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    _, dist = _pair_geometry(x)
    return dist**-3


def min_separation(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        return np.inf
    _, dist = _pair_geometry(x)
    return float(dist.min())
