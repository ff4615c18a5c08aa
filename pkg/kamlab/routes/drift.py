import logging
from typing import Optional

import click
import numpy as np

from kamlab.drift.bumps import build_bumps, check_plateaus, check_witnesses
from kamlab.drift.cover import build_cover
from kamlab.drift.flows import Stage, diffusion_experiment, gdelta_schedule, launch_state
from kamlab.drift.kicks import build_kick, determinant_defect
from kamlab.drift.model import SLOW, DriftModel, assemble_H0
from kamlab.errors import ModelValidationError
from kamlab.routes.common import apply_quiet, finish, run_options
from kamlab.schemas.model import ModelFile
from kamlab.schemas.run import DiffusionConfig
from kamlab.utils.models import load_config, parse_model, require_seed
from kamlab.utils.reports import orbit_header

logger = logging.getLogger(__name__)

R4_TOL = 1e-12
DETERMINANT_TOL = 1e-12
ENERGY_TOL = 1e-10


def _diffusion_config(model: Optional[ModelFile], config_path: Optional[str], seed: Optional[int]) -> DiffusionConfig:
    if config_path is None and model is not None:
        if model.kind != "drift":
            raise ModelValidationError("diffusion needs a drift model or a config file", {"field": "kind"})
        config = DiffusionConfig(**model.parameters)
        return config if seed is None else config.model_copy(update={"seed": seed})
    return load_config(config_path, DiffusionConfig, seed)


def build_drift_model(config: DiffusionConfig) -> DriftModel:
    lo, hi = config.cover_range
    cover = build_cover(lo, hi, config.growth, config.overlap)
    bumps = build_bumps(cover, config.omega0, config.eps, config.s, config.eta, config.exponents,
                        sigma=config.gevrey_sigma)
    return assemble_H0(bumps, config.omega0)


@click.command("diffusion")
@run_options
def diffusion(model_path, config_path, out_dir, seed, quiet):
    """Exact orbits of the kicked drift model and their action excursions."""
    apply_quiet(quiet)
    model = parse_model(model_path) if model_path else None
    config = _diffusion_config(model, config_path, seed)
    drift = build_drift_model(config)
    d = drift.dim
    checks = {"plateaus": check_plateaus(drift.bumps), "witnesses": check_witnesses(drift.bumps)}
    tables = {}

    if len(config.stages) > 1:
        stages = [Stage(**st.model_dump()) for st in config.stages]
        schedule = gdelta_schedule(drift, stages, config.s, require_seed(config), config.samples)
        checks["cumulative_norm"] = schedule.measured_norm <= config.eps
        checks["within_budget"] = schedule.cumulative_bound <= schedule.budget
        for k, st in enumerate(schedule.stages):
            checks[f"stage_{k}_forward"] = st.verdict.forward
            checks[f"stage_{k}_backward"] = st.verdict.backward
            checks[f"stage_{k}_symplectic"] = determinant_defect(schedule.kicks[k], d) <= DETERMINANT_TOL
        result = {"verdicts": [st.verdict for st in schedule.stages], "cumulative_norm": schedule.measured_norm,
                  "cumulative_bound": schedule.cumulative_bound, "budget": schedule.budget, "kicks": schedule.kicks}
        finish("diffusion", model, config, result, out_dir, quiet, checks)
        return

    stage = config.stages[0]
    kick = build_kick(drift, stage.interval, stage.A, stage.delta, config.s, stage.eps)
    points = [np.asarray(p, dtype=float) for p in config.initial_points]
    if not points:
        points = [launch_state(drift, kick, stage.delta, require_seed(config))]
    verdicts = []
    for k, state in enumerate(points):
        if state.shape != (2 * d,):
            raise ModelValidationError(f"initial point {k} has {state.size} entries, expected {2 * d}",
                                       {"field": f"initial_points.{k}"})
        run = diffusion_experiment(drift, [kick], state, config.A, config.T, config.dt, config.samples)
        verdicts.append(run.verdict)
        tables[f"diffusion_orbit_{k}"] = (orbit_header(d), run.trace.rows())
    first = verdicts[0]

    # an orbit outside every kick support keeps its actions
    rest_state = points[0].copy()
    rest_state[d + SLOW] = 0.0
    rest_run = diffusion_experiment(drift, [kick], rest_state, config.A, first.T, first.dt, config.samples)
    excursion = float(np.max(np.abs(np.asarray(rest_run.trace.r) - rest_state[d:])))

    checks.update({
        "forward": first.forward,
        "backward": first.backward,
        "kick_norm": kick.norm < stage.eps,
        "kick_symplectic": determinant_defect(kick, d, seed=config.seed or 0) <= DETERMINANT_TOL,
        "r4_conserved": max(v.r4_drift for v in verdicts) <= R4_TOL,
        "energy_conserved": max(v.energy_drift for v in verdicts) <= ENERGY_TOL,
        "rest_orbit_bounded": excursion <= R4_TOL,
    })
    result = {
        "i1": first.i1, "i2": first.i2, "sup_r": max(first.sup_forward, first.sup_backward), "t_hit": first.t_hit,
        "cumulative_norm": kick.norm, "verdicts": verdicts, "kick": kick, "rest_excursion": excursion,
    }
    finish("diffusion", model, config, result, out_dir, quiet, checks, tables)


commands = [diffusion]
