# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""tm module for the cli."""
import click

import lfv_cli


def _n_start(ctx, param, value):
    if value is None or value == 'auto':
        return value

    try:
        return int(value)
    except ValueError:
        raise click.BadParameter('expected auto or an integer')


@click.command(name='tm', help='Sample coming-down times T_m.')
@lfv_cli.config_options
@click.option('--m', '-m', 'm', type=int, multiple=True,
              help='Target block count; repeat for several.')
@click.option('--n-start', 'n_start', callback=_n_start,
              help='Starting block count, or auto.')
@click.option('--max-n-start', 'max_n_start', type=int,
              help='Cap on the automatic starting block count.')
@click.option('--horizon', type=float, help='Censoring time.')
@click.option('--b-cap', 'b_cap', type=int,
              help='Largest b of the reported tail sums.')
@click.option('--replicas', '-r', type=int, help='Samples per m.')
def cli(config_path, measure, seed, output_dir, workers, m, n_start,
        max_n_start, horizon, b_cap, replicas):
    lfv_cli.execute('tm', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        m=m, n_start=n_start, max_n_start=max_n_start, horizon=horizon,
        b_cap=b_cap, replicas=replicas
    ))
