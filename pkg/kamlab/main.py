import json
import logging

import click

from kamlab import __version__
from kamlab.config import settings
from kamlab.errors import KamlabError
from kamlab.routes import arithmetic, drift, kam, normal_forms, presets

logger = logging.getLogger(__name__)


class KamlabGroup(click.Group):
    """Renders typed failures as a JSON diagnostic on stderr and exits with their code."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except KamlabError as e:
            logger.error(f"{type(e).__name__}: {e.detail}")
            click.echo(json.dumps(e.to_dict(), sort_keys=True, default=str), err=True)
            ctx.exit(e.exit_code)


@click.group(cls=KamlabGroup)
@click.version_option(__version__, prog_name="kamlab")
def cli():
    """Numerical workbench for KAM tori, normal forms and action diffusion."""
    logging.basicConfig(level=settings.LOG_LEVEL.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")


for route in (arithmetic, normal_forms, kam, drift, presets):
    for command in route.commands:
        cli.add_command(command)


if __name__ == "__main__":
    cli(prog_name="kamlab")
