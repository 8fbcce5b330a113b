# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""rates module for the cli."""
import click

import lfv_cli


@click.command(name='rates', help='Tabulate λ_(b,k), λ_b, γ_b, γ_(b,m), μ.')
@lfv_cli.config_options
@click.option('--b', '-b', type=int, help='Number of blocks.')
@click.option('--m', '-m', 'm', type=int, multiple=True,
              help='Target block count; repeat for several.')
@click.option('--b-max', 'b_max', type=int,
              help='Largest b of the consistency check.')
def cli(config_path, measure, seed, output_dir, workers, b, m, b_max):
    """Deterministic: no seed needed."""
    lfv_cli.execute('rates', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        b=b, m=m, b_max=b_max
    ))
