"""
Shared Command Plumbing
Common flags, model loading and report emission for every subcommand
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import click

from kamlab.errors import AcceptanceFailure, ModelValidationError
from kamlab.schemas.model import ModelFile
from kamlab.utils.models import parse_model
from kamlab.utils.reports import envelope, write_csv, write_json

logger = logging.getLogger(__name__)

CsvTable = Tuple[Sequence[str], Sequence[Sequence[Any]]]


def run_options(fn):
    """--model, --config, --out-dir, --seed and --quiet."""
    options = [
        click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None,
                     help="Model file (JSON)."),
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="Run config file (JSON); defaults apply when omitted."),
        click.option("--out-dir", type=click.Path(file_okay=False), default="reports", show_default=True,
                     help="Directory for JSON reports and CSV traces."),
        click.option("--seed", type=int, default=None, help="Seed for stochastic routines; overrides config."),
        click.option("--quiet", is_flag=True, help="Only log warnings and errors."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def apply_quiet(quiet: bool) -> None:
    if quiet:
        logging.getLogger().setLevel(logging.WARNING)


def require_model(model_path: Optional[str]) -> ModelFile:
    if model_path is None:
        raise ModelValidationError("this command needs --model", {"field": "--model"})
    return parse_model(model_path)


def finish(command: str, model: Any, config: Any, result: Any, out_dir: str, quiet: bool,
           checks: Optional[Dict[str, bool]] = None, tables: Optional[Dict[str, CsvTable]] = None) -> None:
    """Write <command>.json plus CSV tables; fail with exit 3 when a check did not pass."""
    out = Path(out_dir)
    checks = {name: bool(ok) for name, ok in (checks or {}).items()}
    report = envelope(command, model, config, result, checks)
    path = write_json(out / f"{command}.json", report)
    for name, (header, rows) in (tables or {}).items():
        write_csv(out / f"{name}.csv", header, rows)
    failed = sorted(name for name, ok in checks.items() if not ok)
    if not quiet:
        click.echo(f"{command}: report {path}, checks {len(checks) - len(failed)}/{len(checks)} passed")
    if failed:
        logger.error(f"{command}: failed checks {failed}")
        raise AcceptanceFailure(f"acceptance checks failed: {', '.join(failed)}",
                                {"failed": failed, "report": str(path)})
