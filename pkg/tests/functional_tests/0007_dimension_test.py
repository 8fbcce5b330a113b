# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import pytest


def test_01_points_file(invoke_cli, output_dir, read_output, write_file):
    lines = ['x,y'] + [
        f'{i / 32},{j / 32}' for i in range(32) for j in range(32)
    ]
    path = write_file('points.csv', '\n'.join(lines) + '\n')

    invoke_cli(
        ['dimension', '--points-file', path, '--scale', 0.5, '--scale', 0.25,
         '--scale', 0.125, '--scale', 0.0625, '-s', 0, '-o', output_dir]
    )

    report = read_output(output_dir, 'dimension.json')
    rows = read_output(output_dir, 'boxcount.csv').splitlines()

    assert report['measure'] is None
    assert report['median_slope'] == pytest.approx(2.0, abs=1e-9)
    assert report['replicas'][0]['in_bounds']
    assert rows[1:] == ['0,0.5,4', '0,0.25,16', '0,0.125,64', '0,0.0625,256']


def test_02_simulated_points(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['dimension', '--measure', 'delta0:1', '--n', 256, '--d', 2,
         '--T', 1.0, '--alpha', 1.0, '-r', 2, '-s', 1, '-o', output_dir]
    )

    report = read_output(output_dir, 'dimension.json')

    assert report['bounds'] == {'lower': 2.0, 'upper': 2.0}
    assert len(report['replicas']) == 2
    assert 0.0 <= report['median_slope'] <= 2.5


def test_03_missing_points_file(invoke_cli, output_dir, tmp_path):
    invoke_cli(
        ['dimension', '--points-file', str(tmp_path / 'nowhere.csv'),
         '-s', 0, '-o', output_dir],
        exit_code=2
    )
