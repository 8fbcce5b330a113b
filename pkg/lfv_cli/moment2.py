# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""moment2 module for the cli."""
import click

import lfv_cli


@click.command(name='moment2',
               help='Monte Carlo second moment against the duality formula.')
@lfv_cli.config_options
@click.option('--T', '-T', 'T', type=float)
@click.option('--phi1', type=lfv_cli.JSONParam(),
              help='Gaussian test function {"center": [...], "width": w}.')
@click.option('--phi2', type=lfv_cli.JSONParam())
@click.option('--n', '-n', type=int)
@click.option('--d', '-d', type=int)
@click.option('--method', type=click.Choice(['auto', 'forward',
                                             'ancestral']))
@click.option('--replicas', '-r', type=int)
def cli(config_path, measure, seed, output_dir, workers, T, phi1, phi2, n, d,
        method, replicas):
    lfv_cli.execute('moment2', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        T=T, phi1=phi1, phi2=phi2, n=n, d=d, method=method,
        replicas=replicas
    ))
