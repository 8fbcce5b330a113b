# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
from mock import patch

import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_verify as lfv_verify

LFVVerify = lfv_verify.LFVVerify


def _broken(self):
    raise lfv_exceptions.NumericError('quadrature diverged')


def _skipped(self):
    return None


def test_01_chisquare_against_expected_counts():
    assert lfv_verify._chisquare_counts([5, 0, 1], [1.0, 0.0, 0.0]) == 0.0
    assert lfv_verify._chisquare_counts([10, 0], [1.0, 0.0]) == 1.0
    assert lfv_verify._chisquare_counts([100, 200], [1.0, 2.0]) > 0.99


def test_02_contingency_of_identical_samples():
    sample = [1, 1, 2, 3, 3, 3]

    assert lfv_verify._contingency(sample, sample) > 0.99
    assert lfv_verify._contingency([1, 1], [1]) == 1.0


def test_03_statuses_and_rows():
    checks = (
        ('measures', 'pascal', '_pascal'),
        ('measures', 'broken', '_broken'),
        ('estimators', 'skipped', '_skipped')
    )

    with patch.object(LFVVerify, 'CHECKS', checks), \
            patch.object(LFVVerify, '_broken', _broken, create=True), \
            patch.object(LFVVerify, '_skipped', _skipped, create=True):
        suite = LFVVerify(seed=1)
        results = suite.run()

    assert [r.status for r in results] == [
        lfv_verify.PASSED, lfv_verify.FAILED, lfv_verify.SKIPPED
    ]
    assert results[1].row() == (
        'measures', 'broken', lfv_verify.FAILED,
        'NumericError: quadrature diverged'
    )
    assert suite.failures() == [results[1]]


def test_04_module_filter():
    checks = (
        ('measures', 'pascal', '_pascal'),
        ('lookdown', 'broken', '_broken')
    )

    with patch.object(LFVVerify, 'CHECKS', checks), \
            patch.object(LFVVerify, '_broken', _broken, create=True):
        results = LFVVerify(modules=['measures']).run()

    assert [r.name for r in results] == ['pascal']


def test_05_quick_mode_skips_compactness():
    assert LFVVerify(quick=True)._compactness() is None
    assert LFVVerify(quick=True)._size('tm_replicas') < \
        LFVVerify(quick=False)._size('tm_replicas')


def test_06_same_seed_same_streams():
    first = LFVVerify(seed=4)._rng('jump_chain').random(3)
    second = LFVVerify(seed=4)._rng('jump_chain').random(3)

    assert first.tolist() == second.tolist()


def test_07_rate_invariants_pass():
    results = LFVVerify(modules=['measures']).run()

    assert results
    assert all(r.status == lfv_verify.PASSED for r in results), [
        r.row() for r in results
    ]
