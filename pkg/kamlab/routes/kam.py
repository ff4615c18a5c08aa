import logging
from typing import List

import click
import numpy as np

from kamlab.kam.frequency import IterateConfig, degenerate_family, frequency_map_solve, torus_extract_and_verify
from kamlab.kam.iteration import conjugacy_residual, fit_contraction, kam_iterate
from kamlab.normal_forms.birkhoff import birkhoff_normal_form, frequency_from
from kamlab.normal_forms.diagnostics import degeneracy_detect
from kamlab.routes.common import apply_quiet, finish, require_model, run_options
from kamlab.schemas.arithmetic import DiophantineParams
from kamlab.schemas.model import ModelFile
from kamlab.schemas.run import CountertermConfig, FamilyConfig, FreqmapConfig, IterateParams, ToriConfig
from kamlab.utils.models import load_config, load_hamiltonian, model_weights
from kamlab.utils.parallel import parallel_map
from kamlab.utils.reports import TRACE_HEADER, orbit_header, trace_rows

logger = logging.getLogger(__name__)

ORIGIN_TOL = 1e-12
FAMILY_TOL = 1e-8
# gaps at the Newton tolerance carry no slope information
GAP_FLOOR = 1e-9
SLOPE_SLACK = 0.3


def iterate_config(params: IterateParams, model: ModelFile) -> IterateConfig:
    return IterateConfig(kappa=params.kappa, tau=params.tau, h=params.h, n_max=params.n_max, tol=params.tol,
                         weights=model_weights(model), q=params.q, fourier_cutoff=params.fourier_cutoff)


def _action_point(c: List[float], d: int) -> np.ndarray:
    return np.zeros(d) if not c else np.asarray(c, dtype=float)


@click.command("counterterm")
@run_options
def counterterm(model_path, config_path, out_dir, seed, quiet):
    """Counter term Lambda(c, omega) with the KAM iteration trace."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, CountertermConfig)
    H = load_hamiltonian(model)
    c = _action_point(config.c, H.dim)
    if config.omega is not None:
        omega = np.asarray(config.omega, dtype=float)
    elif np.any(c):
        omega = birkhoff_normal_form(H, config.q).gradient(c)
    else:
        omega = frequency_from(H)
    run = iterate_config(config, model)
    result = kam_iterate(H, omega, c, run.kappa, run.tau, run.h, run.n_max, run.tol, run.weights,
                         fourier_cutoff=run.fourier_cutoff)
    eps = [r.eps for r in result.trace]
    report = {
        "c": result.c, "omega": result.omega, "Lambda": result.Lambda, "Gamma": result.Gamma,
        "frequency_residual": result.frequency_residual().tolist(), "eps": result.eps,
        "converged": result.converged, "steps": len(result.trace) - 1,
        "conjugacy_residual": conjugacy_residual(H, result),
    }
    if len(eps) >= 3:
        report["contraction"] = fit_contraction(eps[:-1], eps[1:])
    finish("counterterm", model, config, report, out_dir, quiet, {"converged": result.converged},
           {"counterterm_trace": (TRACE_HEADER, trace_rows(result.trace))})


@click.command("freqmap")
@run_options
def freqmap(model_path, config_path, out_dir, seed, quiet):
    """Frequency map Omega(c) over a grid of action points."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, FreqmapConfig)
    H = load_hamiltonian(model)
    run = iterate_config(config, model)
    nf = birkhoff_normal_form(H, config.q)
    omega0 = frequency_from(H)

    solutions = parallel_map(lambda c: frequency_map_solve(H, c, run, workers=1), config.c_grid)
    points, checks = [], {}
    for sol in solutions:
        c = np.asarray(sol.c)
        gap = float(np.linalg.norm(np.asarray(sol.Omega) - nf.gradient(c), np.inf))
        points.append({"c": sol.c, "Omega": sol.Omega, "seed": sol.seed, "residual": sol.residual,
                       "newton_steps": sol.newton_steps, "normal_form_gap": gap,
                       "Lambda": sol.result.Lambda, "Gamma": sol.result.Gamma})
        if not np.any(c):
            checks["origin_is_omega0"] = float(np.max(np.abs(np.asarray(sol.Omega) - omega0))) <= ORIGIN_TOL
    report = {"points": points}
    usable = [(np.linalg.norm(p["c"], np.inf), p["normal_form_gap"]) for p in points
              if np.any(p["c"]) and p["normal_form_gap"] > GAP_FLOOR]
    if len(usable) >= 2:
        size, gap = np.log(np.array(usable)).T
        report["gap_slope"] = float(np.polyfit(size, gap, 1)[0])
        checks["gap_slope"] = report["gap_slope"] >= config.q - 1 - SLOPE_SLACK
    d = H.dim
    rows = [p["c"] + p["Omega"] + [p["normal_form_gap"], p["residual"]] for p in points]
    header = [f"c_{i + 1}" for i in range(d)] + [f"Omega_{i + 1}" for i in range(d)] + ["nf_gap", "residual"]
    finish("freqmap", model, config, report, out_dir, quiet, checks, {"freqmap": (header, rows)})


@click.command("tori")
@run_options
def tori(model_path, config_path, out_dir, seed, quiet):
    """Embed the KAM torus at c and verify it against integrated orbits."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, ToriConfig, seed)
    H = load_hamiltonian(model)
    c = _action_point(config.c, H.dim)
    solution = frequency_map_solve(H, c, iterate_config(config, model))
    params = DiophantineParams(kappa=config.kappa, tau=config.tau, N_check=config.N_check)
    torus = torus_extract_and_verify(H, solution, params, config.T, config.dt, config.samples,
                                     config.deviation_tol, seed=config.seed or 0, weights=model_weights(model))
    report = {"torus": torus.model_dump(exclude={"orbit"}), "newton_steps": solution.newton_steps}
    checks = {"diophantine": torus.diophantine.diophantine, "torus_invariant": torus.passed}
    finish("tori", model, config, report, out_dir, quiet, checks,
           {"tori_orbit": (orbit_header(H.dim), torus.orbit),
            "tori_trace": (TRACE_HEADER, trace_rows(solution.result.trace))})


@click.command("family")
@run_options
def family(model_path, config_path, out_dir, seed, quiet):
    """Frequency map along degenerate directions, or along omega0 for Russmann-type normal forms."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, FamilyConfig)
    H = load_hamiltonian(model)
    report = degeneracy_detect(birkhoff_normal_form(H, config.q).N, config.degeneracy_tol, H=H)
    scan = degenerate_family(H, report, config.s_grid, iterate_config(config, model))
    solved = [p for p in scan.points if p.error is None]
    checks = {"all_points_solved": len(solved) == len(scan.points)}
    if scan.mode == "russmann":
        checks["parallel_to_omega0"] = all(p.angle <= FAMILY_TOL for p in solved)
        if scan.mu_fit is not None:
            size = max(len(scan.mu_fit), len(report.mu))
            fit = np.pad(scan.mu_fit, (0, size - len(scan.mu_fit)))
            extracted = np.pad(report.mu, (0, size - len(report.mu)))
            checks["mu_matches"] = float(np.max(np.abs(fit - extracted))) <= FAMILY_TOL
    else:
        checks["frequency_constant"] = all(p.deviation <= FAMILY_TOL for p in solved)
    d = H.dim
    rows = [[np.linalg.norm(p.s)] + p.c + (p.Omega or [float("nan")] * d) +
            [p.deviation if p.deviation is not None else float("nan"), p.angle if p.angle is not None else float("nan")]
            for p in scan.points]
    header = ["s"] + [f"c_{i + 1}" for i in range(d)] + [f"Omega_{i + 1}" for i in range(d)] + ["deviation", "angle"]
    finish("family", model, config, {"degeneracy": report, "scan": scan}, out_dir, quiet, checks,
           {"family": (header, rows)})


commands = [counterterm, freqmap, tori, family]
