# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""cdi module for the cli."""
import click

import lfv_cli


@click.command(name='cdi',
               help='Classify coming down from infinity and fit α.')
@lfv_cli.config_options
@click.option('--m-grid', 'm_grid', type=int, multiple=True,
              help='m values of the α fit; repeat for several.')
@click.option('--m', '-m', 'm', type=int, multiple=True,
              help='m values to report tail sums for.')
@click.option('--b-cap', 'b_cap', type=int,
              help='Largest b of the tail sums.')
@click.option('--b-max', 'b_max', type=int,
              help='Largest n of the powerlaw lower-bound check.')
def cli(config_path, measure, seed, output_dir, workers, m_grid, m, b_cap,
        b_max):
    lfv_cli.execute('cdi', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        m_grid=m_grid, m=m, b_cap=b_cap, b_max=b_max
    ))
