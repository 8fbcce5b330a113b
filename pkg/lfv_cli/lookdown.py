# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""lookdown module for the cli."""
import click

import lfv_cli


@click.command(name='lookdown',
               help='Run the n-level lookdown system with Brownian motion.')
@lfv_cli.config_options
@click.option('--n', '-n', type=int, help='Number of levels.')
@click.option('--d', '-d', type=int, help='Spatial dimension.')
@click.option('--T', '-T', 'T', type=float, help='Final time.')
@click.option('--initial', type=lfv_cli.JSONParam(),
              help='origin, levels or a JSON spec such as'
                   ' {"kind": "normal", "scale": 1}.')
@click.option('--snapshot-time', 'snapshot_times', type=float,
              multiple=True, help='Time to record positions at.')
@click.option('--method', type=click.Choice(['auto', 'forward',
                                             'ancestral']))
@click.option('--max-levels', 'max_levels', type=int,
              help='Refuse forward runs above this many levels.')
@click.option('--replicas', '-r', type=int, help='Number of runs.')
def cli(config_path, measure, seed, output_dir, workers, n, d, T, initial,
        snapshot_times, method, max_levels, replicas):
    lfv_cli.execute('lookdown', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        n=n, d=d, T=T, initial=initial, snapshot_times=snapshot_times,
        method=method, max_levels=max_levels, replicas=replicas
    ))
