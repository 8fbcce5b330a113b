# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import csv
import io

import pytest


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_01_kingman_rates(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['rates', '--measure', 'delta0:1', '--b', 4, '--m', 2,
         '-o', output_dir]
    )

    rows = _rows(read_output(output_dir, 'rates.csv'))

    assert [int(r['k']) for r in rows] == [2, 3, 4]
    assert float(rows[0]['lambda_bk']) == 1.0

    for row in rows:
        assert float(row['lambda_b']) == 6.0
        assert float(row['gamma_b']) == 6.0
        assert float(row['gamma_bm']) == 6.0

    summary = read_output(output_dir, 'rates.json')

    assert summary['consistency']['passed']


def test_02_mu_rows_add_up(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['rates', '--measure', 'beta:1.5', '-b', 6, '-m', 2, '-m', 4,
         '-o', output_dir]
    )

    summary = read_output(output_dir, 'rates.json')
    mu = _rows(read_output(output_dir, 'mu.csv'))

    for table in summary['tables']:
        total = sum(
            float(r['mu']) for r in mu if int(r['m']) == table['m']
        )

        assert total == pytest.approx(table['lambda_b'], rel=1e-12)


def test_03_rates_need_no_seed(invoke_cli, output_dir, read_output):
    invoke_cli(['rates', '--measure', 'delta1:1', '-o', output_dir])

    manifest = read_output(output_dir, 'manifest.json')

    assert manifest['config']['seed'] is None
    assert sorted(manifest['files']) == ['mu.csv', 'rates.csv', 'rates.json']
