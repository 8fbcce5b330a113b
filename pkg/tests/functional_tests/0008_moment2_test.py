# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.


def test_01_second_moment(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['moment2', '--measure', 'delta0:1', '-T', 0.5, '--n', 32, '--d', 1,
         '--phi1', '{"width": 0.5}', '-r', 20, '-s', 4, '-o', output_dir]
    )

    report = read_output(output_dir, 'moment2.json')

    assert report['replicas'] == 20
    assert report['n'] == 32
    assert 0.0 < report['analytic'] < 1.0
    assert report['standard_error'] > 0.0


def test_02_only_gaussian_test_functions(invoke_cli, output_dir):
    result = invoke_cli(
        ['moment2', '--measure', 'delta0:1', '--phi1', '{"kind": "box"}',
         '-s', 4, '-o', output_dir],
        exit_code=2
    )

    assert 'phi1' in result.output
