# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import math

import numpy as np
import pytest

import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions


def _draw(payload, rng, index):
    return (index, float(rng.random()) * payload)


@pytest.mark.parametrize('value, text', [
    (True, 'true'), (np.bool_(False), 'false'), (np.int64(7), '7'),
    (0.1, '0.1'), (np.float32(0.5), '0.5'), (math.inf, 'inf'),
    (-math.inf, '-inf'), (math.nan, 'nan'), (None, ''), ('beta', 'beta')
])
def test_01_format_number(value, text):
    assert lfv_common.format_number(value) == text


def test_02_jsonable():
    payload = {
        1: np.arange(3), 'x': (np.float64(0.25), math.nan),
        'flag': np.bool_(True)
    }

    assert lfv_common.jsonable(payload) == {
        '1': [0, 1, 2], 'x': [0.25, 'nan'], 'flag': True
    }


def test_03_csv_and_jsonl_text():
    assert lfv_common.csv_text(('t', 'ok'), [(0.5, True), (math.inf, None)]) \
        == 't,ok\n0.5,true\ninf,\n'
    assert lfv_common.jsonl_text([{'b': 1, 'a': 2}]) == '{"a": 2, "b": 1}\n'


def test_04_replica_streams_are_fixed_and_distinct():
    first = lfv_common.replica_rng(9, 0).random(4)

    assert np.array_equal(first, lfv_common.replica_rng(9, 0).random(4))
    assert not np.array_equal(first, lfv_common.replica_rng(9, 1).random(4))
    assert not np.array_equal(first, lfv_common.replica_rng(10, 0).random(4))


def test_05_replicas_come_back_in_order():
    serial = lfv_common.run_replicas(_draw, 2.0, 4, 6)

    assert [index for index, _ in serial] == list(range(6))
    assert serial[3][1] == lfv_common.replica_rng(4, 3).random() * 2.0


def test_06_mean_and_se():
    mean, se = lfv_common.mean_and_se([1.0, 2.0, 3.0, 4.0])

    assert mean == 2.5
    assert se == pytest.approx(math.sqrt(5.0 / 3.0) / 2.0)
    assert lfv_common.mean_and_se([3.0]) == (3.0, math.inf)
    assert all(math.isnan(v) for v in lfv_common.mean_and_se([]))


def test_07_exceptions_raise_in_library_mode():
    with pytest.raises(lfv_exceptions.NumericError) as err:
        lfv_common.logit(
            {'level': 'EXCEPTION', 'message': ['first', 'second']},
            exception=lfv_exceptions.NumericError
        )

    assert str(err.value) == 'first\nsecond'


def test_08_exceptions_exit_when_interactive():
    lfv_common.set_interactive(True)

    with pytest.raises(SystemExit) as err:
        lfv_common.logit(
            {'level': 'EXCEPTION', 'message': 'no'},
            exception=lfv_exceptions.InvariantFailed
        )

    assert err.value.code == 4

    with pytest.raises(lfv_exceptions.ConfigError):
        with lfv_common.raising():
            lfv_common.logit(
                {'level': 'EXCEPTION', 'message': 'no'},
                exception=lfv_exceptions.ConfigError
            )

    assert lfv_common.INTERACTIVE


def test_09_silent_logging_reaches_the_callback():
    seen = []

    lfv_common.logit({'level': 'INFO', 'message': 'hello'},
                     _callback=lambda content, _: seen.append(content),
                     silent=True)
    lfv_common.logit({'level': 'INFO', 'message': 'quiet'}, silent=True)

    assert seen == [{'level': 'INFO', 'message': 'hello'}]
