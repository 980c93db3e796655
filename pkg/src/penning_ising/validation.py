"""Self-checks run by ``penning-ising validate``.

Each check recomputes a quantity along an independent route (closed form,
finite differences, a second backend) and compares. The suite takes a few
seconds at the default N = 217.
"""
import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .couplings import (
    OdfSpec,
    coupling_matrix,
    large_detuning_limit,
    lamb_dicke_check,
    odf_wavevector,
    static_adiabatic_oracle,
    two_ion_closed_form,
)
from .crystal import Crystal, find_equilibrium, potential_energy, potential_gradient, seed_lattice
from .dynamics import analytic_depolarization, exact_evolve, mean_field_field
from .modes import mode_spectrum
from .trap import (
    CONSTANTS,
    TrapSpec,
    characteristic_lengths,
    pair_energy_scales,
    rotating_frame_beta,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def check_constants(ctx):
    c = CONSTANTS
    err = _rel(c.coulomb_constant, 1.0 / (4.0 * math.pi * c.vacuum_permittivity))
    return err < 1e-12, f"coulomb constant rel err {err:.2e}"


def check_beta_two_ways(ctx):
    trap = ctx["trap"]
    wc = trap.ion_charge * trap.b_field / trap.ion_mass
    alt = (trap.omega_r * wc - trap.omega_r**2) / trap.omega_z**2 - 0.5
    err = _rel(rotating_frame_beta(trap), alt)
    return err < 1e-12, f"beta = {rotating_frame_beta(trap):.6f}, rel err {err:.2e}"


def check_two_ion_equilibrium(ctx):
    trap = ctx["trap"]
    lp = characteristic_lengths(trap)["planar_length"]
    c = find_equilibrium(np.array([[-0.7 * lp, 0.1 * lp], [0.9 * lp, -0.2 * lp]]), trap)
    d = float(np.linalg.norm(c.positions[0] - c.positions[1]))
    beta = rotating_frame_beta(trap)
    exact = (2 * trap.coulomb_strength / (trap.ion_mass * beta * trap.omega_z**2)) ** (1 / 3)
    err = _rel(d, exact)
    return err < 1e-8, f"separation rel err {err:.2e}"


def check_three_ion_triangle(ctx):
    trap = ctx["trap"]
    c = find_equilibrium(seed_lattice(3, trap), trap)
    beta = rotating_frame_beta(trap)
    exact = (trap.coulomb_strength / (math.sqrt(3) * trap.ion_mass * beta * trap.omega_z**2)) ** (1 / 3)
    radii = np.linalg.norm(c.positions, axis=1)
    err = float(np.max(np.abs(radii - exact)) / exact)
    return err < 1e-8, f"circumradius max rel err {err:.2e}"


def check_gradient_fd(ctx):
    trap = ctx["trap"]
    lp = characteristic_lengths(trap)["planar_length"]
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        x = rng.uniform(-3, 3, size=(12, 2)) * lp
        g = potential_gradient(x, trap)
        h = 1e-6 * lp
        fd = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            xp, xm = x.copy(), x.copy()
            xp[idx] += h
            xm[idx] -= h
            fd[idx] = (potential_energy(xp, trap) - potential_energy(xm, trap)) / (2 * h)
        worst = max(worst, float(np.abs(fd - g).max() / np.abs(g).max()))
    return worst < 1e-6, f"max rel err {worst:.2e}"


def check_backends_agree(ctx):
    if kernels.compiled_backend is None:
        return True, "compiled backend not built; skipped"
    x = ctx["crystal"].positions
    ec, gc = kernels.compiled_backend.coulomb_energy_gradient(x)
    ep, gp = kernels.python_backend.coulomb_energy_gradient(x)
    err = max(_rel(ec, ep), float(np.abs(gc - gp).max() / np.abs(gp).max()))
    return err < 1e-12, f"compiled vs NumPy rel err {err:.2e}"


def check_com_theorem(ctx):
    spec = ctx["spectrum"]
    trap = ctx["trap"]
    err = _rel(float(spec.frequencies.max()), trap.omega_z)
    com = spec.eigenvectors[:, spec.com_index]
    spread = float(np.ptp(com * math.sqrt(spec.n)))
    return err < 1e-9 and spread < 1e-8, f"|max w - wz|/wz = {err:.2e}, COM spread {spread:.2e}"


def check_mode_orthonormality(ctx):
    spec = ctx["spectrum"]
    b = spec.eigenvectors
    orth = float(np.abs(b.T @ b - np.eye(spec.n)).max())
    m = ctx["trap"].ion_mass
    resid = np.linalg.norm(spec.stiffness @ b - m * b * spec.omega_sq, axis=0).max()
    scale = m * ctx["trap"].omega_z ** 2
    return orth < 1e-10 and resid < 1e-8 * scale, f"orthonormality {orth:.2e}, residual {resid / scale:.2e}"


def check_two_ion_oracle(ctx):
    trap, odf = ctx["trap"], ctx["odf"]
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        d = rng.uniform(20e-6, 60e-6)
        c = Crystal.from_positions([[-d / 2, 0], [d / 2, 0]], trap)
        spec = mode_spectrum(c)
        mu = trap.omega_z + 2 * math.pi * rng.uniform(1e3, 50e3)
        o = odf.with_mu(mu)
        worst = max(worst, _rel(coupling_matrix(spec, o).j[0, 1], two_ion_closed_form(d, trap, o)))
    return worst < 1e-12, f"max rel err {worst:.2e}"


def check_static_bridge(ctx):
    trap, odf = ctx["trap"], ctx["odf"]
    hbar = trap.constants.reduced_planck
    worst = 0.0
    for n in (2, 3, 7):
        c = find_equilibrium(seed_lattice(n, trap), trap)
        cij = static_adiabatic_oracle(c, odf.f0)
        j = coupling_matrix(mode_spectrum(c), odf.with_mu(1e-3 * trap.omega_z)).j
        iu = np.triu_indices(n, 1)
        worst = max(worst, float(np.max(np.abs(n * cij[iu] / (2 * hbar) - j[iu]) / np.abs(j[iu]))))
    return worst < 1e-4, f"max rel err {worst:.2e}"


def check_large_detuning(ctx):
    c, spec, odf, trap = ctx["crystal"], ctx["spectrum"], ctx["odf"], ctx["trap"]
    mu = 20 * trap.omega_z
    cm = coupling_matrix(spec, odf.with_mu(mu))
    limit = large_detuning_limit(c, odf)
    iu = np.triu_indices(c.n, 1)
    err = float(np.max(np.abs(mu**4 * cm.j[iu] / limit[iu] - 1))) if c.n > 1 else 0.0
    ok = err < 0.01 and (c.n < 3 or abs(cm.power_law_a - 3) < 0.15)
    return ok, f"mu^4 J max rel dev {err:.2e}, a = {cm.power_law_a:.4f}"


def check_sign_above_band(ctx):
    spec, odf, trap = ctx["spectrum"], ctx["odf"], ctx["trap"]
    worst = math.inf
    for khz in (0.5, 1, 5, 10, 50, 100):
        cm = coupling_matrix(spec, odf.with_mu(trap.omega_z + 2 * math.pi * khz * 1e3))
        off = cm.j[~np.eye(spec.n, dtype=bool)]
        worst = min(worst, float(off.min()) if off.size else math.inf)
    return worst > 0, f"min J_ij over grid {worst:.3e} rad/s"


def check_depolarization(ctx):
    rng = np.random.default_rng(3)
    worst = 0.0
    for n in (2, 5, 8):
        j = rng.normal(size=(n, n)) * 500
        j = j + j.T
        np.fill_diagonal(j, 0)
        t = np.linspace(0, 5e-3, 20)
        exact = exact_evolve(j, 0.0, math.pi / 2, t)
        worst = max(worst, float(np.abs(exact["sx"] - analytic_depolarization(j, t)).max()))
    return worst < 1e-10, f"max abs err {worst:.2e}"


def check_norm(ctx):
    rng = np.random.default_rng(5)
    n = 6
    j = rng.normal(size=(n, n)) * 300
    j = j + j.T
    np.fill_diagonal(j, 0)
    t = np.linspace(0, 1e-2, 25)
    out = exact_evolve(j, 2 * math.pi * 100.0, 0.7, t)
    drift = float(np.abs(out["norm"] - 1).max())
    return drift < 1e-12, f"norm drift {drift:.2e}"


def check_mean_field_derivative(ctx):
    rng = np.random.default_rng(9)
    n, theta = 6, 0.6
    j = np.abs(rng.normal(size=(n, n))) * 400
    j = j + j.T
    np.fill_diagonal(j, 0)
    field = mean_field_field(j, np.full(n, math.cos(theta)))
    expected = field * math.sin(theta)
    h = 1e-5 / np.abs(j).max()
    sy = exact_evolve(j, 0.0, theta, [-h, h])["sy"]
    fd = (sy[1] - sy[0]) / (2 * h)
    err = float(np.max(np.abs(fd - expected) / np.abs(expected)))
    return err < 5e-3, f"max rel err {err:.2e}"


def check_sanity_scales(ctx):
    trap, odf = ctx["trap"], ctx["odf"]
    dip = pair_energy_scales(10e-6, trap)["magnetic_dipole"]
    lam = odf_wavevector(odf)["lambda_r"]
    report = lamb_dicke_check(ctx["spectrum"], odf)
    eta = float(report["eta_m"][ctx["spectrum"].com_index])
    ok = _rel(dip, 8.6e-39) < 0.02 and _rel(lam, 3.7e-6) < 0.03
    return ok, f"dipole {dip:.3e} J, lambda_R {lam * 1e6:.3f} um, COM eta {eta:.4f}"


CHECKS = [
    ("constants", check_constants),
    ("beta_two_ways", check_beta_two_ways),
    ("two_ion_equilibrium", check_two_ion_equilibrium),
    ("three_ion_triangle", check_three_ion_triangle),
    ("gradient_finite_difference", check_gradient_fd),
    ("kernel_backends_agree", check_backends_agree),
    ("com_mode_theorem", check_com_theorem),
    ("mode_orthonormality", check_mode_orthonormality),
    ("two_ion_coupling_oracle", check_two_ion_oracle),
    ("static_limit_bridge", check_static_bridge),
    ("large_detuning_asymptote", check_large_detuning),
    ("antiferromagnetic_sign", check_sign_above_band),
    ("depolarization_closed_form", check_depolarization),
    ("norm_conservation", check_norm),
    ("mean_field_derivative", check_mean_field_derivative),
    ("sanity_scales", check_sanity_scales),
]


def run_validation(trap=None, odf=None, n_ions=217, seed=0):
    """Run every check; failures and exceptions are recorded, never raised."""
    trap = trap or TrapSpec()
    odf = odf or OdfSpec()
    crystal = find_equilibrium(seed_lattice(n_ions, trap, seed=seed), trap)
    ctx = {"trap": trap, "odf": odf, "crystal": crystal, "spectrum": mode_spectrum(crystal)}
    results = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # noqa: BLE001
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
