# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""coalescent module for the cli."""
import click

import lfv_cli


@click.command(name='coalescent', help='Simulate Λ-coalescent paths of Π_n.')
@lfv_cli.config_options
@click.option('--n', '-n', type=int, help='Number of leaves.')
@click.option('--horizon', type=float,
              help='Length of each path; defaults to T.')
@click.option('--record-time', 'record_times', type=float, multiple=True,
              help='Time to snapshot the partition at; repeat for several.')
@click.option('--replicas', '-r', type=int, help='Number of paths.')
def cli(config_path, measure, seed, output_dir, workers, n, horizon,
        record_times, replicas):
    lfv_cli.execute('coalescent', config_path, lfv_cli.overrides(
        measure=measure, seed=seed, output_dir=output_dir, workers=workers,
        n=n, horizon=horizon, record_times=record_times, replicas=replicas
    ))
