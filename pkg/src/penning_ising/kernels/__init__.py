"""Pairwise Coulomb kernels with a compiled backend and a NumPy fallback.

The compiled extension is used when it was built and
``PENNING_ISING_PURE_PYTHON`` is unset. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("PENNING_ISING_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

coulomb_energy_gradient = _active.coulomb_energy_gradient
coulomb_hessian = _active.coulomb_hessian
inverse_cube_matrix = _active.inverse_cube_matrix
min_separation = _active.min_separation

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "coulomb_energy_gradient",
    "coulomb_hessian",
    "inverse_cube_matrix",
    "min_separation",
]
