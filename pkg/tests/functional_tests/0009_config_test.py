# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import json
import os

import lfv_lib


def test_01_config_file_alone(invoke_cli, output_dir, read_output,
                              write_file):
    path = write_file('run.json', json.dumps({
        'measure': 'delta0:1', 'b': 4, 'm': [2], 'output_dir': output_dir
    }))

    invoke_cli(['rates', '-c', path])

    assert read_output(output_dir, 'manifest.json')['config']['b'] == 4


def test_02_unknown_key_is_named(invoke_cli, output_dir, write_file):
    path = write_file('run.json', json.dumps({
        'measure': 'beta:1.5', 'betaa': 1.5, 'b': 2
    }))
    result = invoke_cli(['rates', '-c', path, '-o', output_dir], exit_code=2)

    assert 'unknown key "betaa"' in result.output
    assert 'b: must be at least 3' in result.output
    assert not os.path.exists(output_dir)


def test_03_flags_override_the_file(invoke_cli, output_dir, read_output,
                                    write_file):
    path = write_file('run.json', json.dumps({'measure': 'delta1:1', 'b': 5}))

    invoke_cli(['rates', '-c', path, '--measure', 'delta0:1', '-o',
                output_dir])

    summary = read_output(output_dir, 'rates.json')

    assert summary['measure'].startswith('delta0:')


def test_04_unknown_flag(invoke_cli):
    result = invoke_cli(['rates', '--bogus'], exit_code=2)

    assert 'bogus' in result.output


def test_05_unknown_command(invoke_cli):
    invoke_cli(['frobnicate'], exit_code=2)


def test_06_version(invoke_cli):
    result = invoke_cli(['--version'])

    assert lfv_lib.__version__ in result.output


def test_07_output_dir_from_the_environment(invoke_cli, read_output,
                                            tmp_path, monkeypatch):
    target = str(tmp_path / 'from-env')
    monkeypatch.setenv('LFV_OUTPUT_DIR', target)

    invoke_cli(['rates', '--measure', 'delta0:1'])

    assert 'rates.csv' in read_output(target, 'manifest.json')['files']


def test_08_log_file_keeps_verbose_off_the_console(invoke_cli, output_dir,
                                                  tmp_path, monkeypatch):
    log_file = str(tmp_path / 'lfv.log')
    monkeypatch.setenv('LFV_LOGFILE', log_file)

    result = invoke_cli(['rates', '--measure', 'delta0:1', '-b', 4, '-o',
                         output_dir])

    with open(log_file, 'r', encoding='utf-8') as f:
        logged = f.read()

    assert 'Wrote ' not in result.output
    assert '(VERBOSE) Wrote ' in logged
