# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import pytest


def test_01_beta_below_one_stays_infinite(invoke_cli, output_dir,
                                          read_output):
    invoke_cli(['cdi', '--measure', 'beta:0.8', '-o', output_dir])

    report = read_output(output_dir, 'cdi.json')

    assert report['classification'] == 'stays_infinite'
    assert report['cg_bound'] is None


def test_02_kingman_comes_down(invoke_cli, output_dir, read_output):
    invoke_cli(['cdi', '--measure', 'delta0:1', '-m', 10, '-o', output_dir])

    report = read_output(output_dir, 'cdi.json')

    assert report['classification'] == 'comes_down'
    assert report['alpha'] == pytest.approx(1.0, abs=0.05)
    assert '10' in report['tail_sums']
    assert 'lambda_fit' in report


def test_03_beta_carries_the_lower_bound(invoke_cli, output_dir,
                                         read_output):
    invoke_cli(['cdi', '--measure', 'beta:1.5', '--b-max', 40,
                '-o', output_dir])

    report = read_output(output_dir, 'cdi.json')

    assert report['classification'] == 'comes_down'
    assert report['cg_bound']['passed']


def test_04_zero_measure_is_a_numeric_error(invoke_cli, output_dir):
    result = invoke_cli(['cdi', '--measure', 'zero', '-o', output_dir],
                        exit_code=3)

    assert 'zero measure' in result.output
