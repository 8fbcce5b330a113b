# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import csv
import io


def test_01_kingman_support(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['support', '--measure', 'delta0:1', '--n', 64, '--d', 2, '--T', 1.0,
         '--alpha', 1.0, '-r', 3, '-s', 5, '-o', output_dir]
    )

    report = read_output(output_dir, 'support.json')
    aggregate = report['aggregate']
    radii = list(csv.DictReader(io.StringIO(
        read_output(output_dir, 'radii.csv')
    )))

    assert aggregate['triangle_ok']
    assert aggregate['schedule']['k'] == [1, 2, 3]
    assert aggregate['dimension_bounds'] == {'lower': 2.0, 'upper': 2.0}
    assert len(aggregate['radius_bounds']) == 3
    assert len(report['replicas']) == 3
    assert {r['kind'] for r in radii} == {'R', 'D'}
    assert all(float(r['value']) >= 0.0 for r in radii)


def test_02_no_schedule_without_alpha(invoke_cli, output_dir, read_output):
    result = invoke_cli(
        ['support', '--measure', 'beta:0.8', '--n', 32, '--d', 2, '-T', 0.5,
         '-r', 2, '-s', 5, '-o', output_dir]
    )

    aggregate = read_output(output_dir, 'support.json')['aggregate']

    assert 'schedule' not in aggregate
    assert aggregate['median_diameter'] >= 0.0
    assert 'no α fit' in result.output


def test_03_atom_at_one_is_rejected(invoke_cli, output_dir):
    invoke_cli(
        ['support', '--measure', 'mix:delta1=1+beta=1.5', '-s', 5,
         '-o', output_dir],
        exit_code=2
    )
