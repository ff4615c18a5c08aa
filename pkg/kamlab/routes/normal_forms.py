import logging

import click
import numpy as np

from kamlab.kam.frequency import counterterm_frequency
from kamlab.normal_forms.birkhoff import (
    birkhoff_normal_form,
    bnf_invariance_check,
    centered_consistency,
    centered_normal_form,
    random_generator,
)
from kamlab.normal_forms.diagnostics import degeneracy_detect, diophantine_density
from kamlab.normal_forms.liouville import kolmogorov_ball_fraction, liouville_truncated_bnf
from kamlab.routes.common import apply_quiet, finish, require_model, run_options
from kamlab.routes.kam import iterate_config
from kamlab.schemas.arithmetic import DiophantineParams
from kamlab.schemas.run import BnfConfig, DegeneracyConfig, DensityConfig, LiouvilleConfig
from kamlab.utils.models import load_config, load_hamiltonian, model_weights, require_seed

logger = logging.getLogger(__name__)

INVARIANCE_TOL = 1e-9
CONSISTENCY_TOL = 1e-10
HESSIAN_GAP_TOL = 1e-8
DENSITY_CEILING = 0.05
CERTIFIED_FLOOR = 0.5


@click.command("bnf")
@run_options
def bnf(model_path, config_path, out_dir, seed, quiet):
    """Birkhoff normal form N, its remainder and an invariance check under a random exact change."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, BnfConfig, seed)
    H = load_hamiltonian(model)
    nf = birkhoff_normal_form(H, config.q, weights=model_weights(model), fourier_cutoff=config.fourier_cutoff)
    result = {"N_coeffs": nf.coefficients(config.tol * 1e-3), "residual": nf.residual_norm,
              "conjugacy_defect": nf.conjugacy_defect, "omega0": nf.omega0, "q": nf.q}
    checks = {"conjugacy_defect": nf.conjugacy_defect <= config.tol}
    if config.seed is not None:
        chi = random_generator(H.dim, config.invariance_norm, config.seed, degree_cutoff=config.q + 1)
        invariance = bnf_invariance_check(H, chi, config.q, fourier_cutoff=config.fourier_cutoff)
        result["invariance"] = invariance.model_dump()
        checks["invariance"] = invariance.deviation <= INVARIANCE_TOL
    finish("bnf", model, config, result, out_dir, quiet, checks)


@click.command("centered-bnf")
@run_options
def centered_bnf(model_path, config_path, out_dir, seed, quiet):
    """Two-variable normal form Gamma(c) + <Omega(c), r - c> + O^2(r - c)."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, BnfConfig, seed)
    H = load_hamiltonian(model)
    centered = centered_normal_form(H, config.q, config.action_cutoff, config.fourier_cutoff)
    nf = birkhoff_normal_form(H, config.q, fourier_cutoff=config.fourier_cutoff)
    gamma_gap, omega_gap = centered_consistency(centered, nf)
    tol = config.tol * 1e-3
    result = {
        "Gamma": {",".join(map(str, alpha)): v.real for (_, alpha), v in centered.Gamma.mean_value().terms(tol).items()},
        "Omega": [{",".join(map(str, alpha)): v.real for (_, alpha), v in w.mean_value().terms(tol).items()}
                  for w in centered.Omega],
        "conjugacy_defect": centered.conjugacy_defect,
        "gamma_gap": gamma_gap,
        "omega_gap": omega_gap,
    }
    checks = {"gamma_matches_N": gamma_gap <= CONSISTENCY_TOL, "omega_matches_dN": omega_gap <= CONSISTENCY_TOL,
              "conjugacy_defect": centered.conjugacy_defect <= config.tol}
    finish("centered-bnf", model, config, result, out_dir, quiet, checks)


@click.command("degeneracy")
@run_options
def degeneracy(model_path, config_path, out_dir, seed, quiet):
    """Degeneracy index j, degenerate directions, transversality and the Russmann profile."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, DegeneracyConfig)
    H = load_hamiltonian(model)
    nf = birkhoff_normal_form(H, config.q)
    report = degeneracy_detect(nf.N, config.tol, H=H, k_list=config.k_list, p=config.p)
    finish("degeneracy", model, config, report, out_dir, quiet)


@click.command("density")
@run_options
def density(model_path, config_path, out_dir, seed, quiet):
    """Monte-Carlo non-Diophantine fraction of the normal-form frequencies over an action ball."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, DensityConfig, seed)
    rng_seed = require_seed(config)
    H = load_hamiltonian(model)
    if config.frequency_source == "counterterm":
        frequency = counterterm_frequency(H, iterate_config(config.iterate, model))
    else:
        frequency = birkhoff_normal_form(H, config.q).gradient
    estimates = []
    for kappa in config.kappas:
        params = DiophantineParams(kappa=kappa, tau=config.tau, N_check=config.N_check)
        estimates.append(diophantine_density(frequency, config.eta, params, config.samples, rng_seed,
                                             dim=model.d))
    ordered = sorted(estimates, key=lambda e: -e.kappa)
    fractions = [e.fraction for e in ordered]
    checks = {"monotone": all(b <= a for a, b in zip(fractions, fractions[1:])),
              "small_at_min_kappa": fractions[-1] < DENSITY_CEILING}
    rows = [[e.kappa, e.fraction, e.half_width] for e in estimates]
    finish("density", model, config, {"estimates": estimates}, out_dir, quiet, checks,
           {"density": (["kappa", "fraction", "half_width"], rows)})


@click.command("liouville")
@run_options
def liouville(model_path, config_path, out_dir, seed, quiet):
    """Truncated normal form for a Liouville base frequency and the certified Kolmogorov ball."""
    apply_quiet(quiet)
    model = require_model(model_path)
    config = load_config(config_path, LiouvilleConfig, seed)
    rng_seed = require_seed(config)
    H = load_hamiltonian(model)
    truncation = liouville_truncated_bnf(H, config.Q_n, config.gamma, config.q, weights=model_weights(model))
    if config.frequency_source == "counterterm":
        frequency = counterterm_frequency(truncation.truncated, iterate_config(config.iterate, model))
    else:
        frequency = centered_normal_form(truncation.truncated, config.q)
    params = DiophantineParams(kappa=0.5, tau=config.tau, N_check=config.N_check)
    ball = kolmogorov_ball_fraction(frequency, params, config.samples, rng_seed, radius=config.radius,
                                    Q_n=config.Q_n, gamma=config.gamma, q=config.q, dim=H.dim)
    hessian = truncation.normal_form.hessian(np.zeros(H.dim))
    result = {
        "K": truncation.K,
        "min_divisor": truncation.min_divisor,
        "divisor_witness": truncation.divisor_witness,
        "remainder_norm": truncation.remainder_norm,
        "remainder_bound": truncation.remainder_bound,
        "hessian_gap": truncation.hessian_gap,
        "M0_singular": bool(abs(np.linalg.det(hessian)) < HESSIAN_GAP_TOL),
        "ball": ball,
    }
    checks = {"hessian_gap": truncation.hessian_gap <= HESSIAN_GAP_TOL,
              "certified_fraction": ball.certified_fraction > CERTIFIED_FLOOR}
    finish("liouville", model, config, result, out_dir, quiet, checks)


commands = [bnf, centered_bnf, degeneracy, density, liouville]
