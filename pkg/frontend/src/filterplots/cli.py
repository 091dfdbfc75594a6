"""Command-line wrapper around the figure renderer."""

import sys

import click

from .render import PlotSpec, SchemaError, render

VALID_COMPONENTS = {
    "problem1": ("state",),
    "bot": ("position", "velocity"),
}


@click.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--problem", required=True, type=click.Choice(sorted(VALID_COMPONENTS)))
@click.option("--component", required=True,
              type=click.Choice(["state", "position", "velocity"]))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def main(in_path, problem, component, out_path):
    """Plot RMSE-vs-time curves from a harness rmse.csv, one line per filter."""
    if component not in VALID_COMPONENTS[problem]:
        click.echo(
            f"error: component '{component}' not valid for problem '{problem}' "
            f"(expected one of: {', '.join(VALID_COMPONENTS[problem])})",
            err=True,
        )
        sys.exit(2)
    try:
        render(PlotSpec(in_path=in_path, problem=problem,
                        component=component, out_path=out_path))
    except SchemaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
