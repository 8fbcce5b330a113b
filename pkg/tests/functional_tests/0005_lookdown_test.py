# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import csv
import io


def test_01_snapshots_and_events(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['lookdown', '--measure', 'beta:1.5', '--n', 8, '--d', 2, '--T', 0.5,
         '--snapshot-time', 0.25, '-r', 3, '-s', 2, '-o', output_dir]
    )

    reader = csv.DictReader(io.StringIO(
        read_output(output_dir, 'snapshots.csv')
    ))
    rows = list(reader)
    events = read_output(output_dir, 'events.jsonl')

    assert reader.fieldnames == ['replica', 'time', 'level', 'x_1', 'x_2']
    assert len(rows) == 3 * 2 * 8
    assert {float(r['time']) for r in rows} == {0.25, 0.5}

    for event in events:
        assert event['participants'] == sorted(event['participants'])
        assert 1 <= event['participants'][0] < event['participants'][-1] <= 8
        assert 0.0 < event['time'] <= 0.5


def test_02_levels_are_listed_in_order(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['lookdown', '--measure', 'delta0:1', '--n', 5, '--d', 1, '-T', 1.0,
         '--initial', 'levels', '-r', 2, '-s', 2, '-o', output_dir]
    )

    rows = list(csv.DictReader(io.StringIO(
        read_output(output_dir, 'snapshots.csv')
    )))

    assert [r['level'] for r in rows[:5]] == ['1', '2', '3', '4', '5']


def test_03_json_initial_spec(invoke_cli, output_dir, read_output):
    invoke_cli(
        ['lookdown', '--measure', 'delta0:1', '--n', 4, '--d', 1, '-T', 0.1,
         '--initial', '{"kind": "uniform", "width": 2.0}', '-r', 1, '-s', 2,
         '-o', output_dir]
    )

    config = read_output(output_dir, 'manifest.json')['config']

    assert config['initial'] == {'kind': 'uniform', 'width': 2.0}


def test_04_atom_at_one_is_rejected(invoke_cli, output_dir):
    result = invoke_cli(
        ['lookdown', '--measure', 'delta1:1', '-s', 2, '-o', output_dir],
        exit_code=2
    )

    assert 'atom at 1' in result.output


def test_05_level_cap(invoke_cli, output_dir):
    invoke_cli(
        ['lookdown', '--measure', 'delta0:1', '--n', 8, '--max-levels', 4,
         '--method', 'forward', '-s', 2, '-o', output_dir],
        exit_code=2
    )
