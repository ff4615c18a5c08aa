import json
import logging
from pathlib import Path
from typing import Optional

import click

from kamlab.utils.presets import PRESET_NAMES, preset_model
from kamlab.utils.reports import canonical_json

logger = logging.getLogger(__name__)


@click.command("presets")
@click.argument("name", required=False)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the materialized model file here.")
def presets(name: Optional[str], out: Optional[str]):
    """List the preset models, or materialize one as a model file."""
    if name is None:
        for preset in PRESET_NAMES:
            click.echo(preset)
        return
    model = preset_model(name)
    text = json.dumps(json.loads(canonical_json(model)), sort_keys=True, indent=2)
    if out is None:
        click.echo(text)
        return
    Path(out).write_text(text + "\n")
    logger.info(f"preset {name} written to {out}")


commands = [presets]
