# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

import lfv_lib.lfv_common as lfv_common


def pytest_addoption(parser):
    parser.addoption(
        '--acceptance', action='store_true', default=False,
        help='Run the Monte Carlo checks at acceptance scale.'
    )


def pytest_runtest_setup(item):
    if 'require_acceptance' in item.keywords and not item.config.getvalue(
        'acceptance'
    ):
        pytest.skip('Need --acceptance option to run')


@pytest.fixture(autouse=True)
def library_mode():
    """Exceptions raise instead of exiting, whatever ran before."""
    lfv_common.set_interactive(False)
    yield
    lfv_common.set_interactive(False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def output_dir(tmp_path):
    return str(tmp_path / 'out')


@pytest.fixture
def invoke_cli():
    from lfv_cli import cli

    def invoke(cmd, reason=None, assert_returncode=True, exit_code=0):
        cmd = [str(c) for c in cmd]
        result = CliRunner().invoke(cli, cmd, catch_exceptions=False)
        reason = f'{reason}: {result.output}' if reason else result.output

        if assert_returncode:
            assert result.exit_code == exit_code, reason

        return result

    return invoke


@pytest.fixture
def read_output():
    def read(directory, name):
        path = os.path.join(directory, name)

        with open(path, 'r') as f:
            if name.endswith('.json'):
                return json.load(f)
            if name.endswith('.jsonl'):
                return [json.loads(line) for line in f if line.strip()]

            return f.read()

    return read


@pytest.fixture
def write_file(tmp_path):
    def write_to_file(name, data):
        location = str(tmp_path / name)

        with lfv_common.open_atomic(location, 'w') as f:
            f.write(data)

        return location

    return write_to_file
