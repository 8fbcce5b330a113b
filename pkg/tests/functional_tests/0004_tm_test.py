# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import csv
import io

import pytest


def test_01_kingman_tm(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['tm', '--measure', 'delta0:1', '-m', 2, '-m', 5, '--replicas', 50,
         '-s', 3, '-o', output_dir]
    )

    rows = list(csv.DictReader(io.StringIO(
        read_output(output_dir, 'tm.csv')
    )))
    summary = read_output(output_dir, 'tm.json')['m']

    assert len(rows) == 100
    assert {r['censored'] for r in rows} == {'false'}

    for m in ('2', '5'):
        assert summary[m]['truncation_target_met']
        assert summary[m]['bound_holds']
        assert summary[m]['censored'] == 0


def test_02_fixed_start_and_censoring(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['tm', '--measure', 'beta:1.5', '-m', 3, '--n-start', 100,
         '--horizon', 1e-9, '-r', 10, '-s', 3, '-o', output_dir]
    )

    summary = read_output(output_dir, 'tm.json')['m']['3']

    assert summary['n_start'] == 100
    assert summary['truncation_target_met'] is None
    assert summary['censored'] == 10
    assert summary['mean'] == pytest.approx(1e-9)


def test_03_auto_start_needs_coming_down(invoke_cli, output_dir):
    invoke_cli(
        ['tm', '--measure', 'beta:0.8', '-m', 3, '-s', 3, '-o', output_dir],
        exit_code=2
    )


def test_04_bad_n_start(invoke_cli, output_dir):
    invoke_cli(
        ['tm', '--measure', 'delta0:1', '--n-start', 'many', '-s', 3,
         '-o', output_dir],
        exit_code=2
    )
