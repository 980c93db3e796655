"""Planar Coulomb-crystal equilibria in the rotating frame of a Penning trap.

Positions are (N, 2) arrays in metres in the crystal plane z = 0. The
minimisation runs in units of the planar length ``l_p``, where the energy is
``sum_i |x_i|^2 / 2 + sum_{i<j} 1/|x_i - x_j|`` in units of ``k_e q^2 / l_p``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import CoincidentIonsError, NonConvergenceError
from .trap import characteristic_lengths, rotating_frame_beta

COINCIDENCE_DISTANCE = 1e-12
DEFAULT_REL_TOL = 1e-6
DEFAULT_MAX_ITER = 20000
JITTER_FRACTION = 1e-3

# L-BFGS hands over to the Newton polish at this dimensionless gradient.
_LBFGS_GTOL = 1e-4
_NEWTON_MAX_STEPS = 60


@dataclass(frozen=True, eq=False)
class Crystal:
    positions: np.ndarray
    trap: object
    energy: float
    gradient_norm: float
    iterations: int = 0
    converged: bool = False
    tol: float = math.inf

    def __post_init__(self):
        self.positions.setflags(write=False)

    @classmethod
    def from_positions(cls, positions, trap):
        """Wrap an arbitrary configuration (not necessarily an equilibrium)."""
        positions = np.array(positions, dtype=np.float64).reshape(-1, 2)
        grad = potential_gradient(positions, trap)
        return cls(
            positions=positions,
            trap=trap,
            energy=potential_energy(positions, trap),
            gradient_norm=float(np.abs(grad).max()),
        )

    @property
    def n(self):
        return self.positions.shape[0]

    def distances(self):
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt((diff**2).sum(axis=-1))


def force_unit(spec):
    """k_e q^2 / l_p^2, equal to m omega_z^2 beta l_p (newtons)."""
    lp = characteristic_lengths(spec)["planar_length"]
    return spec.coulomb_strength / lp**2


def seed_lattice(n, spec, seed=0, jitter=JITTER_FRACTION):
    """Triangular lattice of spacing l_p filled in shells of increasing radius.

    Sites at equal distance from the origin are taken in order of polar angle.
    Every coordinate gets a uniform jitter of ``jitter * l_p`` drawn from a
    generator seeded with ``seed``; a single ion sits exactly at the origin.
    """
    if n < 1:
        raise ValueError(f"need at least one ion, got n = {n}")
    lp = characteristic_lengths(spec)["planar_length"]
    rings = int(math.ceil(math.sqrt(n))) + 2
    i, j = np.meshgrid(np.arange(-rings, rings + 1), np.arange(-rings, rings + 1), indexing="ij")
    sites = np.stack([i + 0.5 * j, (math.sqrt(3.0) / 2.0) * j], axis=-1).reshape(-1, 2)
    radius = np.round(np.hypot(sites[:, 0], sites[:, 1]), 9)
    angle = np.round(np.mod(np.arctan2(sites[:, 1], sites[:, 0]), 2 * math.pi), 9)
    order = np.lexsort((angle, radius))
    unit = sites[order[:n]]
    if n > 1 and jitter:
        rng = np.random.default_rng(seed)
        unit = unit + rng.uniform(-jitter, jitter, size=unit.shape)
    return unit * lp


def _check_separation(positions):
    dmin = kernels.min_separation(positions)
    if dmin < COINCIDENCE_DISTANCE:
        raise CoincidentIonsError(f"ions closer than {COINCIDENCE_DISTANCE} m (min d = {dmin:.3g} m)")


def potential_energy(positions, spec):
    """Trap plus Coulomb energy (J) of a planar configuration."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    _check_separation(positions)
    beta = rotating_frame_beta(spec)
    coulomb, _ = kernels.coulomb_energy_gradient(positions)
    trap = 0.5 * spec.ion_mass * spec.omega_z**2 * beta * float((positions**2).sum())
    return trap + spec.coulomb_strength * coulomb


def potential_gradient(positions, spec):
    """Analytic gradient (N) of :func:`potential_energy`, shape (N, 2)."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    _check_separation(positions)
    beta = rotating_frame_beta(spec)
    _, grad = kernels.coulomb_energy_gradient(positions)
    return spec.ion_mass * spec.omega_z**2 * beta * positions + spec.coulomb_strength * grad


def _energy_and_grad(flat):
    x = flat.reshape(-1, 2)
    coulomb, grad = kernels.coulomb_energy_gradient(x)
    return 0.5 * float(flat @ flat) + coulomb, (x + grad).ravel()


def _newton_step(x, grad):
    hess = kernels.coulomb_hessian(x)
    hess[np.diag_indices_from(hess)] += 1.0
    evals, evecs = np.linalg.eigh(hess)
    # drop the rotational zero mode; |lambda| turns saddle directions downhill
    keep = np.abs(evals) > 1e-10 * np.abs(evals).max()
    coeff = (evecs[:, keep].T @ grad.ravel()) / np.abs(evals[keep])
    return -(evecs[:, keep] @ coeff).reshape(x.shape)


def find_equilibrium(seed, spec, tol=None, max_iter=DEFAULT_MAX_ITER, rel_tol=DEFAULT_REL_TOL):
    """Relax ``seed`` (metres) to a local minimum of the planar potential.

    ``tol`` is the max-norm gradient tolerance in newtons; when omitted it is
    ``rel_tol`` times :func:`force_unit`. The result is deterministic in
    (seed, spec, tol).
    """
    seed = np.array(seed, dtype=np.float64).reshape(-1, 2)
    rotating_frame_beta(spec)
    lp = characteristic_lengths(spec)["planar_length"]
    funit = force_unit(spec)
    gtol = rel_tol if tol is None else tol / funit
    if not gtol > 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    _check_separation(seed)

    x = seed / lp
    iterations = 0
    if seed.shape[0] > 1:
        res = minimize(
            _energy_and_grad,
            x.ravel(),
            jac=True,
            method="L-BFGS-B",
            options={"gtol": max(gtol, _LBFGS_GTOL), "ftol": 0.0, "maxiter": max_iter, "maxcor": 30},
        )
        x = res.x.reshape(-1, 2)
        iterations = int(res.nit)

    _, grad = _energy_and_grad(x.ravel())
    grad = grad.reshape(-1, 2)
    steps = 0
    while np.abs(grad).max() > gtol:
        if steps >= _NEWTON_MAX_STEPS or iterations >= max_iter:
            raise NonConvergenceError(
                f"gradient {np.abs(grad).max() * funit:.3g} N above tolerance "
                f"{gtol * funit:.3g} N after {iterations} iterations"
            )
        step = _newton_step(x, grad)
        norm0 = np.linalg.norm(grad)
        alpha = 1.0
        for _ in range(30):
            trial = x + alpha * step
            if kernels.min_separation(trial) > 0:
                _, g_trial = _energy_and_grad(trial.ravel())
                if np.linalg.norm(g_trial) < norm0:
                    break
            alpha *= 0.5
        else:
            raise NonConvergenceError("Newton polish stalled: no step reduces the gradient")
        x, grad = trial, g_trial.reshape(-1, 2)
        steps += 1
        iterations += 1

    positions = x * lp
    return Crystal(
        positions=positions,
        trap=spec,
        energy=potential_energy(positions, spec),
        gradient_norm=float(np.abs(grad).max() * funit),
        iterations=iterations,
        converged=True,
        tol=gtol * funit,
    )


def nn_spacing_stats(crystal):
    """Min, median and max over ions of the nearest-neighbour distance (m)."""
    if crystal.n < 2:
        raise ValueError("nearest-neighbour statistics need at least two ions")
    d = crystal.distances()
    np.fill_diagonal(d, np.inf)
    nn = d.min(axis=1)
    return {"min": float(nn.min()), "median": float(np.median(nn)), "max": float(nn.max())}
