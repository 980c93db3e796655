"""Batch command-line interface.

    penning-ising {equilibrate,modes,couplings,sweep,dynamics,validate}
                  [--config PATH] [--out DIR] [--seed U64] [--quiet]

Each stage runs the ones it depends on and writes their tables as well.
Exit codes: 0 ok, 2 configuration, 3 physics (resonance, instability, ...),
4 non-convergence, 5 internal error or failed validation.
"""
import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import io, kernels
from .config import load_config
from .couplings import coupling_matrix, detuning_sweep, lamb_dicke_check, odf_wavevector
from .crystal import find_equilibrium, force_unit, nn_spacing_stats, seed_lattice
from .dynamics import analytic_depolarization, excess_precession_curve, exact_evolve
from .errors import ConfigError, PenningIsingError, SizeCapError
from .modes import check_planar_stability, mode_spectrum
from .trap import TWO_PI, characteristic_lengths, cyclotron_frequency, rotating_frame_beta
from .validation import run_validation

log = logging.getLogger("penning_ising")

COMMANDS = ("equilibrate", "modes", "couplings", "sweep", "dynamics", "validate")
_STAGE = {"equilibrate": 0, "modes": 1, "couplings": 2, "sweep": 3, "dynamics": 3}


def _equilibrate(cfg, out, summary):
    trap = cfg.trap_spec()
    lengths = characteristic_lengths(trap)
    summary["derived"] = {
        "omega_c_rad_s": cyclotron_frequency(trap),
        "beta": rotating_frame_beta(trap),
        "axial_length_m": lengths["axial_length"],
        "planar_length_m": lengths["planar_length"],
        "force_unit_n": force_unit(trap),
    }
    seed = seed_lattice(cfg.crystal.n_ions, trap, seed=cfg.crystal.jitter_seed)
    crystal = find_equilibrium(seed, trap, max_iter=cfg.crystal.max_iter, rel_tol=cfg.crystal.tol)
    summary["crystal"] = {
        "n_ions": crystal.n,
        "energy_j": crystal.energy,
        "gradient_norm_n": crystal.gradient_norm,
        "tol_n": crystal.tol,
        "iterations": crystal.iterations,
        "nearest_neighbour_m": nn_spacing_stats(crystal) if crystal.n > 1 else None,
    }
    io.write_table(out, "crystal", ["ion_index", "x_m", "y_m"], io.crystal_rows(crystal), cfg.output.format)
    log.info("crystal: N=%d, E=%.6e J, |grad|=%.2e N, %d iterations",
             crystal.n, crystal.energy, crystal.gradient_norm, crystal.iterations)
    return crystal


def _modes(cfg, out, summary, crystal):
    spectrum = mode_spectrum(crystal)
    stability = check_planar_stability(spectrum)
    lamb_dicke = lamb_dicke_check(spectrum, cfg.odf_spec(), threshold=cfg.odf.lamb_dicke_threshold)
    summary["modes"] = {
        "omega_max_rad_s": float(spectrum.frequencies.max()),
        "omega_min_rad_s": float(spectrum.frequencies.min()),
        "com_index": spectrum.com_index,
        "stability": stability,
    }
    summary["lamb_dicke"] = {
        "pass": lamb_dicke["pass"],
        "threshold": lamb_dicke["threshold"],
        "eta_com": float(lamb_dicke["eta_m"][spectrum.com_index]),
        "eta_max": float(lamb_dicke["eta_m"].max()),
        "thermal_eta_max": float(lamb_dicke["thermal_eta_m"].max()),
        "lambda_r_m": odf_wavevector(cfg.odf_spec())["lambda_r"],
        "failing_modes": [int(m) for m in np.flatnonzero(~lamb_dicke["mode_pass"])],
    }
    io.write_table(out, "modes", ["mode_index", "omega_rad_s"], io.mode_rows(spectrum), cfg.output.format)
    header, rows = io.eigenvector_table(spectrum)
    io.write_table(out, "modes_eigenvectors", header, rows, cfg.output.format)
    log.info("modes: omega/2pi in [%.3f, %.3f] kHz",
             spectrum.frequencies.min() / TWO_PI / 1e3, spectrum.frequencies.max() / TWO_PI / 1e3)
    return spectrum


def _couplings(cfg, out, summary, crystal, spectrum):
    cm = coupling_matrix(spectrum, cfg.odf_spec(), crystal.n, cfg.odf.guard_band_rel)
    off = cm.j[~np.eye(crystal.n, dtype=bool)]
    summary["couplings"] = {
        "mu_r_rad_s": cm.mu_r,
        "jbar_rad_s": cm.jbar,
        "jbar_per_f0_sq": cm.jbar / cfg.odf.f0_newton**2,
        "power_law_a": cm.power_law_a,
        "fit_rms": cm.fit_rms,
        "j_min_rad_s": float(off.min()) if off.size else None,
        "j_max_rad_s": float(off.max()) if off.size else None,
    }
    io.write_table(out, "couplings", ["i", "j", "d_ij_m", "J_ij_rad_s"],
                   io.coupling_rows(cm, crystal), cfg.output.format)
    log.info("couplings: Jbar = %.6g rad/s, a = %.4f", cm.jbar, cm.power_law_a)
    return cm


def _sweep(cfg, out, summary, crystal, spectrum):
    detunings = [TWO_PI * d for d in cfg.sweep.detunings_hz]
    rows = detuning_sweep(crystal, spectrum, cfg.odf_spec(), detunings,
                          guard_band=cfg.odf.guard_band_rel, workers=cfg.sweep.workers)
    table = [(d_hz, r.jbar, r.a, r.fit_rms) for d_hz, r in zip(cfg.sweep.detunings_hz, rows)]
    io.write_table(out, "sweep", ["detuning_hz", "jbar_rad_s", "a_fit", "fit_rms"], table, cfg.output.format)
    summary["sweep"] = {
        "rows": len(rows),
        "errors": {str(d): r.error for d, r in zip(cfg.sweep.detunings_hz, rows) if r.error},
    }
    for d_hz, r in zip(cfg.sweep.detunings_hz, rows):
        log.info("sweep: delta = %g Hz  Jbar = %.6g rad/s  a = %.4f %s", d_hz, r.jbar, r.a, r.error)
    return rows


def _dynamics(cfg, out, summary, cm):
    dyn = cfg.dynamics
    n = cm.n
    times = np.linspace(dyn.t_start_s, dyn.t_stop_s, dyn.t_steps)
    b = TWO_PI * dyn.b_transverse_hz
    if n <= dyn.size_cap:
        res = exact_evolve(cm, b, dyn.theta_rad, times, size_cap=dyn.size_cap)
        sx, sy, sz = res["sx"], res["sy"], res["sz"]
        method = "exact"
    elif b == 0 and math.isclose(dyn.theta_rad, math.pi / 2, abs_tol=1e-12):
        sx = analytic_depolarization(cm, times)
        sy = np.zeros_like(sx)
        sz = np.zeros_like(sx)
        method = "analytic_depolarization"
    else:
        raise SizeCapError(
            f"{n} spins exceed the exact-evolution cap of {dyn.size_cap}; only theta = pi/2 "
            "with zero transverse field has a closed form"
        )
    rows = [(t, k, sx[i, k], sy[i, k], sz[i, k]) for i, t in enumerate(times) for k in range(n)]
    io.write_table(out, "dynamics", ["t_s", "spin_index", "sx", "sy", "sz"], rows, cfg.output.format)
    thetas = np.linspace(0.0, math.pi, dyn.precession_points)
    rates = excess_precession_curve(cm, thetas)
    io.write_table(out, "precession", ["theta_rad", "rate_rad_s"], list(zip(thetas, rates)), cfg.output.format)
    summary["dynamics"] = {
        "method": method,
        "t_points": int(times.size),
        "final_sx_mean": float(sx[-1].mean()),
        "precession_rate_theta0_rad_s": float(rates[0]),
    }
    log.info("dynamics: %s, final <sx> = %.6f", method, sx[-1].mean())


def run_command(cmd, cfg, out):
    """Run one pipeline command and write its outputs under ``out``; returns the summary."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    summary = {"command": cmd, "inputs": cfg.si_echo(), "kernel_backend": kernels.BACKEND}

    if cmd == "validate":
        trap, odf = cfg.trap_spec(), cfg.odf_spec()
        results = run_validation(trap, odf, n_ions=cfg.crystal.n_ions, seed=cfg.crystal.jitter_seed)
        summary["validation"] = {
            "passed": sum(r.passed for r in results),
            "failed": sum(not r.passed for r in results),
            "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
        }
        for r in results:
            log.info("%-28s %s  %s", r.name, "PASS" if r.passed else "FAIL", r.detail)
    else:
        stage = _STAGE[cmd]
        crystal = _equilibrate(cfg, out, summary)
        if stage >= 1:
            spectrum = _modes(cfg, out, summary, crystal)
        if stage >= 2:
            cm = _couplings(cfg, out, summary, crystal, spectrum)
        if cmd == "sweep":
            _sweep(cfg, out, summary, crystal, spectrum)
        if cmd == "dynamics":
            _dynamics(cfg, out, summary, cm)

    summary["wall_clock_s"] = time.perf_counter() - start
    io.write_json(out / "summary.json", summary)
    return summary


def build_parser():
    parser = argparse.ArgumentParser(prog="penning-ising", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="INI configuration file (defaults: 217 9Be+ ions)")
    parser.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="lattice jitter seed (overrides crystal.jitter_seed)")
    parser.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
            cfg = cfg.replace("crystal", jitter_seed=args.seed)
        out = args.out if args.out is not None else Path(cfg.output.directory)
        summary = run_command(args.command, cfg, out)
    except PenningIsingError as exc:
        log.error("error: %s", exc)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return 5
    if args.command == "validate":
        v = summary["validation"]
        print(f"validation: {v['passed']} passed, {v['failed']} failed")
        return 0 if v["failed"] == 0 else 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
