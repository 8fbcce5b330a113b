# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""dimension module for the cli."""
import click

import lfv_cli


@click.command(name='dimension',
               help='Box-counting slope and energy integrals of a sample.')
@lfv_cli.config_options
@click.option('--points-file', 'points_file',
              type=click.Path(exists=True, dir_okay=False),
              help='CSV of points, one per row, instead of simulating.')
@click.option('--n', '-n', type=int)
@click.option('--d', '-d', type=int)
@click.option('--T', '-T', 'T', type=float)
@click.option('--alpha', type=float, help='α of the upper bound 2/α.')
@click.option('--scale', 'scales', type=float, multiple=True)
@click.option('--exponent', 'exponents', type=float, multiple=True)
@click.option('--method', type=click.Choice(['auto', 'forward',
                                             'ancestral']))
@click.option('--replicas', '-r', type=int)
def cli(config_path, measure, seed, output_dir, workers, points_file, n, d,
        T, alpha, scales, exponents, method, replicas):
    lfv_cli.execute('dimension', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        points_file=points_file, n=n, d=d, T=T, alpha=alpha, scales=scales,
        exponents=exponents, method=method, replicas=replicas
    ))
