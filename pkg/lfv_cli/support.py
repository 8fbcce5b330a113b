# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""support module for the cli."""
import click

import lfv_cli


@click.command(name='support',
               help='Radii, dislocations, diameter and box counts of X_T.')
@lfv_cli.config_options
@click.option('--n', '-n', type=int, help='Number of levels.')
@click.option('--d', '-d', type=int, help='Spatial dimension.')
@click.option('--T', '-T', 'T', type=float, help='Final time.')
@click.option('--initial', type=lfv_cli.JSONParam())
@click.option('--alpha', type=float,
              help='Exponent of the cluster schedule; fitted if omitted.')
@click.option('--delta', type=float, help='δ of the radius bounds.')
@click.option('--scale', 'scales', type=float, multiple=True,
              help='Box side; repeat, decreasing.')
@click.option('--exponent', 'exponents', type=float, multiple=True,
              help='Energy exponent a; repeat for several.')
@click.option('--m-grid', 'm_grid', type=int, multiple=True)
@click.option('--method', type=click.Choice(['auto', 'forward',
                                             'ancestral']))
@click.option('--max-levels', 'max_levels', type=int)
@click.option('--replicas', '-r', type=int)
def cli(config_path, measure, seed, output_dir, workers, n, d, T, initial,
        alpha, delta, scales, exponents, m_grid, method, max_levels,
        replicas):
    lfv_cli.execute('support', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        n=n, d=d, T=T, initial=initial, alpha=alpha, delta=delta,
        scales=scales, exponents=exponents, m_grid=m_grid, method=method,
        max_levels=max_levels, replicas=replicas
    ))
