# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""The n-level lookdown particle system with Brownian spatial motion."""
import math

import numpy as np

import lfv_lib.lfv_coalescent as lfv_coalescent
import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_measures as lfv_measures

FORWARD_EVENT_LIMIT = 200000
DEFAULT_MAX_LEVELS = 4096
METHODS = ('auto', 'forward', 'ancestral')


def _argument_error(message):
    lfv_common.logit(
        {
            'level': 'EXCEPTION',
            'message': message
        },
        exception=lfv_exceptions.ArgumentError
    )


class LookdownState(object):

    """Positions X_1(t)..X_n(t); row i holds level i + 1."""

    def __init__(self, positions, time=0.0):
        positions = np.asarray(positions, dtype=float)

        if positions.ndim == 1:
            positions = positions.reshape(-1, 1)

        self.positions = positions
        self.time = time

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def d(self):
        return self.positions.shape[1]


class Event(object):

    def __init__(self, time, participants, source='multiple'):
        self.time = time
        self.participants = participants
        self.source = source

    def to_dict(self):
        return {
            'time': self.time,
            'participants': list(self.participants),
            'source': self.source
        }


class EventLog(object):

    """Birth events on levels 1..n in increasing time order."""

    def __init__(self, n, events=()):
        self.n = n
        self.events = []

        for event in events:
            self.append(event.time, event.participants, event.source)

    def append(self, time, participants, source='multiple'):
        participants = _participants(participants, self.n)

        if self.events and not time > self.events[-1].time:
            _argument_error(
                f'Event times must increase: {time!r} after'
                f' {self.events[-1].time!r}'
            )

        self.events.append(Event(float(time), participants, source))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, index):
        return self.events[index]

    def records(self):
        return [event.to_dict() for event in self.events]


def _participants(participants, n):
    levels = tuple(sorted(set(int(j) for j in participants)))

    if len(levels) < 2:
        _argument_error(f'An event needs at least two levels, got {levels}')
    if levels[0] < 1 or levels[-1] > n:
        _argument_error(f'Event levels {levels} fall outside 1..{n}')

    return levels


def initial_positions(initial, count, d, rng):
    """Exchangeable starting positions for count levels in R^d."""
    if initial is None or initial == 'origin':
        return np.zeros((count, d))
    if initial == 'levels':
        positions = np.zeros((count, d))
        positions[:, 0] = np.arange(1, count + 1)

        return positions
    if isinstance(initial, dict):
        kind = initial.get('kind')

        if kind == 'normal':
            return rng.normal(0.0, float(initial.get('scale', 1.0)),
                              size=(count, d))
        if kind == 'uniform':
            half = float(initial.get('width', 1.0)) / 2.0

            return rng.uniform(-half, half, size=(count, d))

    _argument_error(f'Unknown initial position spec {initial!r}')


def relabel_sources(participants, size):
    """
    Source level (1-based) of every level after an event on participants:
    levels up to min J keep their place, members of J copy min J and the
    others come from k - |J ∩ [1, k]| + 1 below.
    """
    levels = np.arange(1, size + 1)
    J = np.asarray(participants, dtype=np.int64)
    first = int(J[0])
    below = np.searchsorted(J, levels, side='left')
    sources = levels - (below - 1)
    sources[levels <= first] = levels[levels <= first]
    sources[J[J <= size] - 1] = first

    return sources


def apply_event(state, participants):
    """Relabel after an event: new state with |J| - 1 top levels dropped."""
    J = _participants(participants, state.n)
    sources = relabel_sources(J, state.n)

    return LookdownState(state.positions[sources - 1], state.time)


def _ancestor_step(levels, participants):
    J = np.asarray(participants, dtype=np.int64)
    first = J[0]
    member = np.isin(levels, J)
    through = np.searchsorted(J, levels, side='right')
    shifted = levels - (through - 1)

    return np.where(member, first, np.where(levels > first, shifted, levels))


def _check_times(s, T):
    if not 0.0 <= s <= T:
        _argument_error(f'Need 0 <= s <= T, got s={s!r}, T={T!r}')


def ancestral_levels(log, s, T, n=None):
    """L_j^T(s) for j = 1..n, replaying events in [s, T] backward."""
    _check_times(s, T)
    n = log.n if n is None else n

    if not 1 <= n <= log.n:
        _argument_error(f'n must lie in 1..{log.n}, got {n}')

    levels = np.arange(1, n + 1)

    for event in reversed(log.events):
        if event.time > T:
            continue
        if event.time < s:
            break

        levels = _ancestor_step(levels, event.participants)

    return levels


def ancestral_level(log, j, s, T):
    """Level at time s of the ancestor of the level-j particle at T."""
    if not 1 <= j <= log.n:
        _argument_error(f'Level {j} is outside 1..{log.n}')

    return int(ancestral_levels(log, s, T, j)[j - 1])


class GenealogyQuery(object):

    def __init__(self, T, s, levels, partition):
        self.T = T
        self.s = s
        self.levels = levels
        self.partition = partition


def genealogy_query(log, s, T, n=None):
    levels = ancestral_levels(log, s, T, n)
    groups = {}

    for j, level in enumerate(levels.tolist(), start=1):
        groups.setdefault(level, []).append(j)

    partition = lfv_coalescent.OrderedPartition(groups.values(), len(levels))

    for index, block in enumerate(partition.blocks, start=1):
        if levels[block[0] - 1] != index:
            lfv_common.logit(
                {
                    'level': 'EXCEPTION',
                    'message': f'Block {index} {block} has ancestor level'
                               f' {levels[block[0] - 1]} at time {s!r}'
                },
                exception=lfv_exceptions.InvariantFailed
            )

    return GenealogyQuery(T, s, levels, partition)


def recovered_partition(log, t, T, n=None):
    """Π(t): levels grouped by their ancestor at time T - t."""
    _check_times(t, T)

    return genealogy_query(log, T - t, T, n).partition


def coming_down_times(log, n, m, T):
    """
    T_m^{n'} for every prefix n' = 1..n under one event stream, with a
    censoring flag where n' levels still have more than m ancestors at 0.
    """
    if not 1 <= n <= log.n:
        _argument_error(f'n must lie in 1..{log.n}, got {n}')

    levels = np.arange(1, n + 1)
    times = np.full(n, np.nan)
    times[:m] = 0.0

    for event in reversed(log.events):
        if event.time > T:
            continue

        levels = _ancestor_step(levels, event.participants)
        hit = np.isnan(times) & (levels <= m)
        times[hit] = T - event.time

    censored = np.isnan(times)
    times[censored] = T

    return times, censored


def _increment(rng, dt, count, d, diffusion):
    if dt <= 0.0 or diffusion == 0.0:
        return 0.0

    return rng.normal(0.0, math.sqrt(diffusion * dt), size=(count, d))


def check_measure(measure):
    if measure.atom1 > 0.0:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'{measure.spec()} has an atom at 1; the lookdown'
                           ' system needs Λ({1}) = 0'
            },
            exception=lfv_exceptions.UnsupportedMeasure
        )


def _check_run(n, d, T):
    if n < 1 or d < 1 or not T >= 0.0:
        _argument_error(f'Need n >= 1, d >= 1, T >= 0; got n={n}, d={d},'
                        f' T={T!r}')


def choose_method(measure, n, T, method='auto'):
    if method not in METHODS:
        _argument_error(f'method must be one of {", ".join(METHODS)}')
    if method != 'auto':
        return method
    if n < 2:
        return 'forward'

    rate = lfv_measures.decrease_rates(measure, n)[0]

    return 'forward' if rate * T <= FORWARD_EVENT_LIMIT else 'ancestral'


class Anchor(object):

    """
    Ancestor positions at the first lookback where at most target
    ancestors remain; levels maps time-T level j to its ancestor level.
    """

    def __init__(self, target, lookback, count, levels, positions,
                 censored=False, truncated=False):
        self.target = target
        self.lookback = lookback
        self.count = count
        self.levels = levels
        self.positions = positions
        self.censored = censored
        self.truncated = truncated

    def ancestors(self):
        return self.positions[self.levels - 1]


class AncestryRecord(object):

    def __init__(self, positions, log, T, initial, anchors):
        self.positions = positions
        self.log = log
        self.T = T
        self.initial = initial
        self.anchors = anchors

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def d(self):
        return self.positions.shape[1]

    def anchor(self, target):
        return self.anchors[target]


class LookdownRun(object):

    """One forward replica: final state, event log and snapshots."""

    def __init__(self, state, log, snapshots, initial, replay=None):
        self.state = state
        self.log = log
        self.snapshots = snapshots
        self.initial = initial
        self.replay = replay

    @property
    def positions(self):
        return self.state.positions

    def pre_event_positions(self, indices):
        """
        Positions just before the given events, keyed by event index. The
        run is replayed from its recorded generator state and only the
        requested events are kept.
        """
        keep = set(int(i) for i in indices)

        if not keep:
            return {}
        if self.replay is None:
            _argument_error('Run was not recorded with record_ancestry')

        arguments, bit_generator, state = self.replay
        bits = bit_generator()
        bits.state = state
        *_, kept = _run_forward(*arguments, np.random.Generator(bits),
                                keep=keep)

        return kept

    def ancestry(self, targets=()):
        """Anchors at the events where the ancestor count crosses targets."""
        if self.replay is None and targets:
            _argument_error('Run was not recorded with record_ancestry')

        n = self.state.n
        T = self.state.time
        anchors = {}
        pending = sorted(set(int(t) for t in targets), reverse=True)

        for target in [t for t in pending if t >= n]:
            anchors[target] = Anchor(target, 0.0, n, np.arange(1, n + 1),
                                     self.positions, truncated=True)

        pending = [t for t in pending if t < n]
        levels = np.arange(1, n + 1)
        crossings = {}

        for index in range(len(self.log) - 1, -1, -1):
            if not pending:
                break

            event = self.log[index]
            levels = _ancestor_step(levels, event.participants)
            count = int(levels[-1])

            while pending and count <= pending[0]:
                crossings[pending.pop(0)] = (index, T - event.time, count,
                                             levels.copy())

        stored = self.pre_event_positions(
            index for index, _, _, _ in crossings.values()
        )

        for target, (index, lookback, count, mapped) in crossings.items():
            anchors[target] = Anchor(target, lookback, count, mapped,
                                     stored[index][:count])

        for target in pending:
            anchors[target] = Anchor(
                target, T, int(levels[-1]), levels.copy(), self.initial,
                censored=True
            )

        return AncestryRecord(self.positions, self.log, T, self.initial,
                              anchors)


def _run_forward(measure, n, d, T, initial, snapshot_times, diffusion, rng,
                 keep=()):
    positions = initial_positions(initial, n, d, rng)
    start = positions.copy()
    law = lfv_coalescent.jump_law(measure, n) if n >= 2 else None
    rate = law.total_rate if law is not None else 0.0
    log = EventLog(n)
    snapshots = []
    kept = {}
    pending = sorted(float(s) for s in snapshot_times if 0.0 <= s <= T)
    t = 0.0

    while True:
        t_next = t + rng.exponential(1.0 / rate) if rate > 0.0 else math.inf

        while pending and pending[0] < t_next:
            s = pending.pop(0)
            positions = positions + _increment(rng, s - t, n, d, diffusion)
            t = s
            snapshots.append((s, positions.copy()))

        if t_next > T:
            positions = positions + _increment(rng, T - t, n, d, diffusion)
            break

        positions = positions + _increment(rng, t_next - t, n, d, diffusion)
        t = t_next

        if len(log) in keep:
            kept[len(log)] = positions.copy()

        k = law.sample_size(rng)
        J = tuple(i + 1 for i in lfv_coalescent.sample_subset(n, k, rng))
        log.append(t, J, law.event_source(k, rng))
        positions = positions[relabel_sources(J, n) - 1]

    return positions, start, log, snapshots, kept


def simulate_lookdown(measure, n, d, T, initial=None, rng=None,
                      snapshot_times=(), record_ancestry=False,
                      max_levels=DEFAULT_MAX_LEVELS, diffusion=1.0):
    """
    Forward event-driven simulation of levels 1..n on [0, T]. With
    record_ancestry the generator state is kept so that pre-event
    positions can be replayed later; nothing is stored per event.
    """
    check_measure(measure)
    _check_run(n, d, T)

    if n > max_levels:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'n={n} exceeds the level cap {max_levels}'
            },
            exception=lfv_exceptions.ResourceLimit
        )

    rng = rng if rng is not None else np.random.default_rng()
    arguments = (measure, n, d, T, initial, tuple(snapshot_times), diffusion)
    replay = None

    if record_ancestry:
        replay = (arguments, type(rng.bit_generator), rng.bit_generator.state)

    positions, start, log, snapshots, _ = _run_forward(*arguments, rng)

    return LookdownRun(LookdownState(positions, T), log, snapshots, start,
                       replay)


def sample_ancestry(measure, n, d, T, initial=None, rng=None,
                    block_targets=(), diffusion=1.0):
    """
    Time-T sample of levels 1..n built from its genealogy: the recovered
    coalescent is drawn backward from T on the current ancestor levels,
    then positions run forward from the surviving ancestors at time 0.
    """
    check_measure(measure)
    _check_run(n, d, T)
    rng = rng if rng is not None else np.random.default_rng()
    targets = sorted(set(int(t) for t in block_targets), reverse=True)
    inner = [t for t in targets if t < n]
    levels = np.arange(1, n + 1) if inner else None
    hits = {}
    backward = []
    b = n
    lookback = 0.0

    while b >= 2:
        law = lfv_coalescent.jump_law(measure, b)

        if law.total_rate == 0.0:
            break

        lookback += rng.exponential(1.0 / law.total_rate)

        if lookback > T:
            break

        k = law.sample_size(rng)
        J = tuple(i + 1 for i in lfv_coalescent.sample_subset(b, k, rng))
        backward.append((T - lookback, J, law.event_source(k, rng)))
        b -= k - 1

        if levels is not None:
            levels = _ancestor_step(levels, J)

            for target in inner:
                if target not in hits and b <= target:
                    hits[target] = (len(backward) - 1, lookback, b,
                                    levels.copy())

    survivors = b
    forward = list(reversed(backward))
    wanted = {}

    for target, (index, _, _, _) in hits.items():
        wanted.setdefault(len(backward) - 1 - index, []).append(target)

    positions = initial_positions(initial, survivors, d, rng)
    start = positions.copy()
    stored = {}
    log = EventLog(n)
    count = survivors
    t = 0.0

    for index, (time, J, source) in enumerate(forward):
        positions = positions + _increment(rng, time - t, count, d,
                                           diffusion)
        t = time

        for target in wanted.get(index, ()):
            stored[target] = positions.copy()

        count += len(J) - 1
        positions = positions[relabel_sources(J, count) - 1]
        log.append(time, J, source)

    positions = positions + _increment(rng, T - t, n, d, diffusion)
    anchors = {}

    for target in targets:
        if target >= n:
            anchors[target] = Anchor(target, 0.0, n, np.arange(1, n + 1),
                                     positions, truncated=True)
        elif target in hits:
            _, back, count, mapped = hits[target]
            anchors[target] = Anchor(target, back, count, mapped,
                                     stored[target])
        else:
            anchors[target] = Anchor(target, T, survivors, levels.copy(),
                                     start, censored=True)

    return AncestryRecord(positions, log, T, start, anchors)


def sample_positions(measure, n, d, T, initial=None, rng=None,
                     method='auto', max_levels=DEFAULT_MAX_LEVELS,
                     diffusion=1.0):
    """X_1(T)..X_n(T) by the chosen sampler."""
    method = choose_method(measure, n, T, method)

    if method == 'forward':
        return simulate_lookdown(measure, n, d, T, initial, rng,
                                 max_levels=max_levels,
                                 diffusion=diffusion).positions

    return sample_ancestry(measure, n, d, T, initial, rng,
                           diffusion=diffusion).positions


def sample_record(measure, n, d, T, targets, initial=None, rng=None,
                  method='auto', max_levels=DEFAULT_MAX_LEVELS,
                  diffusion=1.0):
    """AncestryRecord with anchors for targets by the chosen sampler."""
    method = choose_method(measure, n, T, method)

    if method == 'forward':
        run = simulate_lookdown(measure, n, d, T, initial, rng,
                                record_ancestry=True, max_levels=max_levels,
                                diffusion=diffusion)

        return run.ancestry(targets)

    return sample_ancestry(measure, n, d, T, initial, rng, targets,
                           diffusion=diffusion)
