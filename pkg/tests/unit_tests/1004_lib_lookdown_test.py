# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
import numpy as np
import pytest
from mock import patch

import lfv_lib.lfv_coalescent as lfv_coalescent
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_lookdown as lfv_lookdown
import lfv_lib.lfv_measures as lfv_measures

parse = lfv_measures.parse_measure


@pytest.fixture
def one_event_log():
    log = lfv_lookdown.EventLog(4)
    log.append(0.5, (3, 1))

    return log


def test_01_relabel_sources():
    assert lfv_lookdown.relabel_sources((2, 4), 5).tolist() == [1, 2, 3, 2, 4]
    assert lfv_lookdown.relabel_sources((1, 3), 3).tolist() == [1, 2, 1]


def test_02_apply_event_copies_the_lowest_participant():
    state = lfv_lookdown.LookdownState([10.0, 20.0, 30.0, 40.0, 50.0], 1.5)
    after = lfv_lookdown.apply_event(state, [4, 2])

    assert after.positions[:, 0].tolist() == [10.0, 20.0, 30.0, 20.0, 40.0]
    assert after.time == 1.5
    assert state.positions[3, 0] == 40.0


def test_03_ancestral_levels(one_event_log):
    assert lfv_lookdown.ancestral_levels(one_event_log, 0.0, 1.0).tolist() \
        == [1, 2, 1, 3]
    assert lfv_lookdown.ancestral_levels(one_event_log, 0.6, 1.0).tolist() \
        == [1, 2, 3, 4]
    assert lfv_lookdown.ancestral_level(one_event_log, 4, 0.0, 1.0) == 3
    assert lfv_lookdown.ancestral_levels(one_event_log, 0.0, 0.4).tolist() \
        == [1, 2, 3, 4]


def test_04_recovered_partition(one_event_log):
    Partition = lfv_coalescent.OrderedPartition

    assert lfv_lookdown.recovered_partition(one_event_log, 1.0, 1.0) == \
        Partition([[1, 3], [2], [4]])
    assert lfv_lookdown.recovered_partition(one_event_log, 0.2, 1.0) == \
        Partition.singletons(4)
    assert lfv_lookdown.recovered_partition(one_event_log, 1.0, 1.0, 3) == \
        Partition([[1, 3], [2]])


def test_05_query_times_are_checked(one_event_log):
    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_lookdown.ancestral_levels(one_event_log, 1.5, 1.0)

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_lookdown.recovered_partition(one_event_log, -0.1, 1.0)

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_lookdown.ancestral_level(one_event_log, 5, 0.0, 1.0)


def test_06_event_log_validation(one_event_log):
    with pytest.raises(lfv_exceptions.ArgumentError):
        one_event_log.append(0.5, (1, 2))

    with pytest.raises(lfv_exceptions.ArgumentError):
        one_event_log.append(0.7, (2, 2))

    with pytest.raises(lfv_exceptions.ArgumentError):
        one_event_log.append(0.7, (3, 5))

    one_event_log.append(0.7, (2, 3, 4), 'multiple')

    assert len(one_event_log) == 2
    assert one_event_log[-1].participants == (2, 3, 4)
    assert one_event_log.records()[0] == {
        'time': 0.5, 'participants': [1, 3], 'source': 'multiple'
    }


@pytest.mark.parametrize('spec', ['delta1:1', 'mix:delta1=0.5+beta=1.5'])
def test_07_atom_at_one_is_unsupported(spec):
    with pytest.raises(lfv_exceptions.UnsupportedMeasure) as err:
        lfv_lookdown.simulate_lookdown(parse(spec), 4, 1, 1.0)

    assert err.value.exit_code == 2


def test_08_level_cap_is_a_resource_limit(rng):
    with pytest.raises(lfv_exceptions.ResourceLimit):
        lfv_lookdown.simulate_lookdown(parse('delta0:1'), 10, 1, 1.0,
                                       rng=rng, max_levels=5)


def test_09_zero_measure_is_pure_brownian_motion(rng):
    run = lfv_lookdown.simulate_lookdown(parse('zero'), 6, 2, 3.0,
                                         initial='levels', rng=rng,
                                         diffusion=0.0)

    assert len(run.log) == 0
    assert np.array_equal(run.positions, run.initial)


def test_10_same_seed_same_run():
    measure = parse('beta:1.5')
    runs = [
        lfv_lookdown.simulate_lookdown(measure, 32, 2, 0.5,
                                       rng=np.random.default_rng(7),
                                       snapshot_times=(0.25,))
        for _ in range(2)
    ]

    assert np.array_equal(runs[0].positions, runs[1].positions)
    assert runs[0].log.records() == runs[1].log.records()
    assert [s for s, _ in runs[0].snapshots] == [0.25]


@pytest.mark.parametrize('spec', ['delta0:1', 'beta:1.5', 'beta:0.8'])
def test_11_forward_relabeling_matches_ancestral_levels(spec, rng):
    run = lfv_lookdown.simulate_lookdown(parse(spec), 24, 1, 1.0,
                                         initial='levels', rng=rng,
                                         diffusion=0.0)
    levels = lfv_lookdown.ancestral_levels(run.log, 0.0, 1.0)

    assert run.positions[:, 0].tolist() == levels.tolist()


def test_12_kingman_events_are_pairwise(rng):
    run = lfv_lookdown.simulate_lookdown(parse('delta0:1'), 5, 1, 2.0,
                                         rng=rng)

    assert len(run.log) > 0
    assert all(len(e.participants) == 2 for e in run.log)
    assert {e.source for e in run.log} == {'pairwise'}


def test_13_coming_down_times_grow_with_the_sample(rng):
    run = lfv_lookdown.simulate_lookdown(parse('beta:1.5'), 40, 1, 5.0,
                                         rng=rng)
    times, censored = lfv_lookdown.coming_down_times(run.log, 40, 3, 5.0)

    assert times[:3].tolist() == [0.0, 0.0, 0.0]
    assert np.all(np.diff(times) >= 0.0)
    assert np.all(times[censored] == 5.0)


def test_14_forward_anchors(rng):
    run = lfv_lookdown.simulate_lookdown(parse('beta:1.5'), 48, 2, 1.0,
                                         rng=rng, record_ancestry=True)
    record = run.ancestry((4, 16, 48))

    assert record.anchor(48).truncated

    for target in (4, 16):
        anchor = record.anchor(target)

        assert anchor.levels.max() <= anchor.count
        assert anchor.ancestors().shape == (48, 2)

        if not anchor.censored:
            assert anchor.count <= target
            assert 0.0 < anchor.lookback <= 1.0


def test_15_ancestry_sampler_anchors(rng):
    record = lfv_lookdown.sample_ancestry(parse('beta:1.5'), 64, 2, 1.0,
                                          rng=rng, block_targets=(4, 16, 100))

    assert record.positions.shape == (64, 2)
    assert record.anchor(100).truncated

    for target in (4, 16):
        anchor = record.anchor(target)

        assert anchor.positions.shape[0] == anchor.count
        assert anchor.levels.max() <= anchor.count
        assert anchor.ancestors().shape == (64, 2)


def test_16_ancestry_log_replays_to_the_same_genealogy(rng):
    record = lfv_lookdown.sample_ancestry(parse('beta:1.5'), 30, 1, 0.5,
                                          initial='levels', rng=rng,
                                          diffusion=0.0)
    levels = lfv_lookdown.ancestral_levels(record.log, 0.0, 0.5)

    assert record.positions[:, 0].tolist() == levels.tolist()


def test_17_initial_positions(rng):
    levels = lfv_lookdown.initial_positions('levels', 3, 2, rng)

    assert levels.tolist() == [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]
    assert lfv_lookdown.initial_positions(None, 2, 3, rng).shape == (2, 3)

    spread = lfv_lookdown.initial_positions(
        {'kind': 'uniform', 'width': 2.0}, 100, 1, rng
    )

    assert np.all(np.abs(spread) <= 1.0)

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_lookdown.initial_positions('corner', 2, 1, rng)


def test_18_method_choice():
    kingman = parse('delta0:1')

    assert lfv_lookdown.choose_method(kingman, 1, 10.0) == 'forward'
    assert lfv_lookdown.choose_method(kingman, 8, 1.0) == 'forward'
    assert lfv_lookdown.choose_method(kingman, 4096, 1.0) == 'ancestral'
    assert lfv_lookdown.choose_method(kingman, 4096, 1.0, 'forward') == \
        'forward'

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_lookdown.choose_method(kingman, 8, 1.0, 'backward')


def test_19_forward_anchors_keep_only_the_crossing_events(rng):
    forward = lfv_lookdown._run_forward

    with patch.object(lfv_lookdown, '_run_forward', wraps=forward) as passes:
        run = lfv_lookdown.simulate_lookdown(
            parse('delta0:1'), 64, 1, 1.0, initial='levels', rng=rng,
            record_ancestry=True, diffusion=0.0
        )
        record = run.ancestry((4, 16))

    assert len(run.log) > 2
    assert passes.call_count == 2
    assert 'keep' not in passes.call_args_list[0][1]
    assert len(passes.call_args_list[1][1]['keep']) <= 2

    for target in (4, 16):
        anchor = record.anchor(target)

        if not anchor.censored:
            assert anchor.positions.shape[0] == anchor.count

        assert anchor.ancestors()[:, 0].tolist() == \
            run.positions[:, 0].tolist()


def test_20_pre_event_positions_replay_the_run(rng):
    run = lfv_lookdown.simulate_lookdown(parse('beta:1.5'), 16, 1, 1.0,
                                         initial='levels', rng=rng,
                                         record_ancestry=True, diffusion=0.0)
    before = run.pre_event_positions(range(len(run.log)))
    after = [
        lfv_lookdown.apply_event(lfv_lookdown.LookdownState(before[index]),
                                 event.participants).positions
        for index, event in enumerate(run.log)
    ]

    assert sorted(before) == list(range(len(run.log)))

    for index in range(1, len(run.log)):
        assert np.array_equal(before[index], after[index - 1])

    if after:
        assert np.array_equal(after[-1], run.positions)

    assert run.pre_event_positions([]) == {}

    with pytest.raises(lfv_exceptions.ArgumentError):
        lfv_lookdown.simulate_lookdown(
            parse('beta:1.5'), 4, 1, 1.0, rng=rng
        ).pre_event_positions([0])
