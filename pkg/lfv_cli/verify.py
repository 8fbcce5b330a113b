# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""verify module for the cli."""
import time

import click

import lfv_cli
import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_json as lfv_json
import lfv_lib.lfv_verify as lfv_verify

HEADER = ('module', 'invariant', 'status', 'detail')


@click.command(name='verify', help='Run the invariant suite.')
@click.option('--config', '-c', 'config_path',
              type=click.Path(exists=True, dir_okay=False))
@click.option('--seed', '-s', type=int, help='Master seed, 0 by default.')
@click.option('--output-dir', '-o', 'output_dir')
@click.option('--workers', '-w', type=int)
@click.option('--quick', '-q', is_flag=True, default=None,
              help='Smaller Monte Carlo sizes; skips the slowest checks.')
@click.option('--module', 'modules', multiple=True,
              type=click.Choice(lfv_json.MODULES),
              help='Only check this module; repeat for several.')
def cli(config_path, seed, output_dir, workers, quick, modules):
    started = time.monotonic()
    config = lfv_json.load_config(config_path, lfv_cli.overrides(
        seed=seed, output_dir=output_dir, workers=workers, quick=quick,
        modules=modules
    ), require_seed=False)
    suite = lfv_verify.LFVVerify(
        config.get('seed', 0), config['quick'], config['modules'],
        config['workers']
    )
    results = suite.run()
    rows = [result.row() for result in results]
    lfv_json.write_outputs(config['output_dir'], [
        lfv_json.Artifact.csv('verify.csv', HEADER, rows),
        lfv_json.Artifact.json('verify.json', {
            'seed': config.get('seed', 0),
            'quick': config['quick'],
            'results': [dict(zip(HEADER, row)) for row in rows]
        })
    ], config, started)
    lfv_cli.report(HEADER, rows)
    failures = suite.failures()

    if failures:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': [
                    f'[{f.module}] {f.name} failed: {f.detail}'
                    for f in failures
                ]
            },
            exception=lfv_exceptions.InvariantFailed
        )

    lfv_common.logit({
        'level': 'NOTICE',
        'message': f'{len(results)} invariants checked, none failed'
    })
