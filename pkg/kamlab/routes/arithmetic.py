import logging

import click

from kamlab.arithmetic.diophantine import is_diophantine_up_to, small_divisor_table, uniform_exponent_estimate
from kamlab.arithmetic.liouville import build_liouville_pair, witness_residuals, witness_verdict
from kamlab.errors import ConfigValidationError
from kamlab.routes.common import apply_quiet, finish, run_options
from kamlab.schemas.arithmetic import DiophantineParams, LiouvilleSchedule
from kamlab.schemas.run import DiophConfig
from kamlab.utils.models import load_config, parse_model

logger = logging.getLogger(__name__)

WITNESS_TOL = 1e-15


@click.command("dioph")
@run_options
def dioph(model_path, config_path, out_dir, seed, quiet):
    """Small-divisor table, finite Diophantine check and uniform exponent estimate."""
    apply_quiet(quiet)
    config = load_config(config_path, DiophConfig)
    model = parse_model(model_path) if model_path else None
    params = DiophantineParams(kappa=config.kappa, tau=config.tau, N_check=config.N_check)
    result, checks = {}, {}

    if config.liouville_exponents:
        anchor = None if config.omega is None else repr(config.omega[1] / config.omega[0])
        base = "1" if config.omega is None else repr(config.omega[0])
        vector = build_liouville_pair(LiouvilleSchedule(exponents=config.liouville_exponents, base=base,
                                                        anchor=anchor))
        residuals = witness_residuals(vector)
        result["frequency_vector"] = vector.model_dump()
        result["witness_residuals"] = residuals
        result["witness_verdict"] = witness_verdict(vector, params).model_dump()
        checks["witnesses_reverify"] = max(residuals, default=0.0) <= WITNESS_TOL
        omega = vector.omega
    elif config.omega is not None:
        omega = config.omega
    elif model is not None:
        omega = model.omega0
    else:
        raise ConfigValidationError("dioph needs omega in the config, a Liouville schedule or --model",
                                    {"field": "omega"})

    table = small_divisor_table(omega, config.N_list)
    result["omega"] = [float(w) for w in omega]
    result["verdict"] = is_diophantine_up_to(omega, params).model_dump()
    result["small_divisors"] = [t.model_dump() for t in table]
    if len(config.N_list) >= 2:
        result["exponent"] = uniform_exponent_estimate(omega, config.N_list).model_dump()
    rows = [[t.N] + list(t.k) + [t.value] for t in table]
    header = ["N"] + [f"k_{i + 1}" for i in range(len(omega))] + ["m_star"]
    finish("dioph", model, config, result, out_dir, quiet, checks, {"dioph_table": (header, rows)})


commands = [dioph]
