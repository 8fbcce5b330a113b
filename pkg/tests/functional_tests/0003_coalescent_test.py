# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import csv
import io
import os


def test_01_partition_paths(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['coalescent', '--measure', 'beta:1.5', '--n', 20, '--horizon', 1.0,
         '--record-time', 0.5, '--replicas', 5, '-s', 1, '-o', output_dir]
    )

    rows = list(csv.DictReader(io.StringIO(
        read_output(output_dir, 'partitions.csv')
    )))
    jumps = read_output(output_dir, 'jumps.jsonl')

    assert len(rows) == 10

    for first, last in zip(rows[::2], rows[1::2]):
        assert first['replica'] == last['replica']
        assert float(first['time']) == 0.5
        assert int(first['block_count']) >= int(last['block_count'])
        assert len(last['blocks'].split('|')) == int(last['block_count'])

    assert all(j['k'] >= 2 and j['time'] <= 1.0 for j in jumps)


def test_02_same_seed_same_bytes(invoke_cli, tmp_path, read_output):
    manifests = []

    for name in ('first', 'second'):
        directory = str(tmp_path / name)
        invoke_cli(
            ['coalescent', '--measure', 'delta0:1', '--n', 12,
             '--horizon', 2.0, '-r', 4, '-s', 7, '-o', directory]
        )
        manifests.append(read_output(directory, 'manifest.json'))

    assert manifests[0]['files'] == manifests[1]['files']
    assert os.path.isfile(str(tmp_path / 'first' / 'jumps.jsonl'))


def test_03_seed_is_required(invoke_cli, output_dir):
    result = invoke_cli(
        ['coalescent', '--measure', 'delta0:1', '-o', output_dir],
        exit_code=2
    )

    assert 'seed' in result.output
