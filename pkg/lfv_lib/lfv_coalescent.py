# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Exact event-driven simulation of the Λ-coalescent and its block counts."""
import bisect
import functools
import math

import numpy as np

import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_measures as lfv_measures

ALIAS_LIMIT = 2048
TRUNCATION_TARGET = 0.01
DEFAULT_MAX_N_START = 8192
EXACT_TAIL_SPAN = 200


class OrderedPartition(object):

    """
    A partition of {1..n} whose blocks are sorted internally and ordered
    by their least elements. Block indices are 0-based, elements 1-based.
    """

    def __init__(self, blocks, n=None):
        blocks = [tuple(sorted(int(e) for e in blk)) for blk in blocks]
        blocks = sorted((blk for blk in blocks if blk), key=lambda b: b[0])
        elements = sorted(e for blk in blocks for e in blk)

        if n is None:
            n = len(elements)

        if elements != list(range(1, n + 1)):
            lfv_common.logit(
                {
                    'level': 'EXCEPTION',
                    'message': f'Blocks {blocks} do not partition 1..{n}'
                },
                exception=lfv_exceptions.ArgumentError
            )

        self.n = n
        self.blocks = tuple(blocks)
        self._block_of = None

    @classmethod
    def _trusted(cls, blocks, n):
        partition = cls.__new__(cls)
        partition.n = n
        partition.blocks = blocks
        partition._block_of = None

        return partition

    @classmethod
    def singletons(cls, n):
        """0_{[n]}: every element in its own block."""
        return cls._trusted(tuple((i,) for i in range(1, n + 1)), n)

    @property
    def block_of(self):
        """Element (1-based) to block index (0-based) map."""
        if self._block_of is None:
            index = np.empty(self.n, dtype=np.int64)

            for i, blk in enumerate(self.blocks):
                index[np.asarray(blk) - 1] = i

            self._block_of = index

        return self._block_of

    def __len__(self):
        return len(self.blocks)

    def __eq__(self, other):
        return isinstance(other, OrderedPartition) and \
            self.n == other.n and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        inner = ','.join(
            '{' + ','.join(str(e) for e in blk) + '}' for blk in self.blocks
        )

        return '{' + inner + '}'

    def minima(self):
        return [blk[0] for blk in self.blocks]

    def to_text(self):
        return '|'.join(','.join(str(e) for e in blk) for blk in self.blocks)

    def merge(self, indices):
        """Merge the blocks at the given indices into one block."""
        indices = sorted(set(indices))

        if len(indices) < 2:
            return self

        chosen = set(indices)
        merged = tuple(sorted(
            e for i in indices for e in self.blocks[i]
        ))
        rest = [blk for i, blk in enumerate(self.blocks) if i not in chosen]
        minima = [blk[0] for blk in rest]
        rest.insert(bisect.bisect_left(minima, merged[0]), merged)

        return OrderedPartition._trusted(tuple(rest), self.n)


def restriction(partition, m):
    """R_m: intersect every block with {1..m}."""
    if not 1 <= m <= partition.n:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'Restriction needs 1 <= m <= {partition.n},'
                           f' got {m}'
            },
            exception=lfv_exceptions.ArgumentError
        )

    blocks = (tuple(e for e in blk if e <= m) for blk in partition.blocks)

    return OrderedPartition._trusted(tuple(b for b in blocks if b), m)


class AliasTable(object):

    """Vose alias table for O(1) draws from a finite law."""

    def __init__(self, weights):
        p = np.asarray(weights, dtype=float)
        size = p.size
        scaled = p * size / p.sum()
        self.prob = np.ones(size)
        self.alias = np.arange(size)
        small = [i for i in range(size) if scaled[i] < 1.0]
        large = [i for i in range(size) if scaled[i] >= 1.0]

        while small and large:
            s = small.pop()
            g = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0

            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)

    def draw(self, rng):
        i = int(rng.integers(self.prob.size))

        if rng.random() < self.prob[i]:
            return i

        return int(self.alias[i])


class JumpLaw(object):

    """Law of the merger size k among b blocks: C(b,k)λ_{b,k}/λ_b."""

    def __init__(self, measure, b):
        terms = lfv_measures.rate_terms(measure, b)
        keep = np.nonzero(terms > 0.0)[0]
        self.b = b
        self.sizes = keep + 2
        self.weights = terms[keep]
        self.total_rate = float(terms.sum())
        self.pairwise_fraction = 0.0
        self._alias = None
        self._cumulative = None

        if terms[0] > 0.0:
            pairwise = measure.atom0 * float(lfv_measures.binomial(b, 2))
            self.pairwise_fraction = min(1.0, pairwise / terms[0])

        if self.sizes.size > 1:
            if b <= ALIAS_LIMIT:
                self._alias = AliasTable(self.weights)
            else:
                cumulative = np.cumsum(self.weights)
                self._cumulative = cumulative / cumulative[-1]

    def sample_size(self, rng):
        if self.sizes.size == 1:
            return int(self.sizes[0])
        if self._alias is not None:
            return int(self.sizes[self._alias.draw(rng)])

        i = int(np.searchsorted(self._cumulative, rng.random(), side='right'))

        return int(self.sizes[min(i, self.sizes.size - 1)])

    def event_source(self, k, rng):
        """pairwise when a two-block event came from the atom at 0."""
        if k != 2 or self.pairwise_fraction <= 0.0:
            return 'multiple'
        if self.pairwise_fraction >= 1.0:
            return 'pairwise'

        return 'pairwise' if rng.random() < self.pairwise_fraction \
            else 'multiple'


@functools.lru_cache(maxsize=4 * ALIAS_LIMIT)
def _small_jump_law(measure, b):
    return JumpLaw(measure, b)


@functools.lru_cache(maxsize=256)
def _large_jump_law(measure, b):
    return JumpLaw(measure, b)


def jump_law(measure, b):
    if b <= ALIAS_LIMIT:
        return _small_jump_law(measure, b)

    return _large_jump_law(measure, b)


def sample_subset(b, k, rng):
    """Uniform k-subset of {0..b-1} by a partial Fisher-Yates shuffle."""
    swapped = {}
    chosen = []

    for i in range(k):
        j = int(rng.integers(i, b))
        chosen.append(swapped.get(j, j))
        swapped[j] = swapped.get(i, i)

    return tuple(sorted(chosen))


def coalescent_step(partition, measure, rng):
    """One jump: (holding time, merged block indices, next partition)."""
    b = len(partition)

    if b < 2:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': 'A one-block partition is absorbing'
            },
            exception=lfv_exceptions.AbsorbingState
        )

    law = jump_law(measure, b)

    if law.total_rate == 0.0:
        return math.inf, (), partition

    holding = rng.exponential(1.0 / law.total_rate)
    k = law.sample_size(rng)
    subset = sample_subset(b, k, rng)

    return holding, subset, partition.merge(subset)


class JumpRecord(object):

    def __init__(self, time, k, minima):
        self.time = time
        self.k = k
        self.minima = minima

    def to_dict(self):
        return {'time': self.time, 'k': self.k, 'minima': list(self.minima)}


class PartitionPath(object):

    def __init__(self, n, horizon, snapshots, jumps, final):
        self.n = n
        self.horizon = horizon
        self.snapshots = snapshots
        self.jumps = jumps
        self.final = final

    def block_count_at(self, time):
        count = self.n

        for jump in self.jumps:
            if jump.time > time:
                break

            count -= jump.k - 1

        return count


def simulate_partition_path(measure, n, horizon, rng, record=()):
    """Jump-chain path of Π_n on [0, horizon] with snapshots at record."""
    if n < 1 or not horizon >= 0.0:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'Need n >= 1 and horizon >= 0, got n={n},'
                           f' horizon={horizon}'
            },
            exception=lfv_exceptions.ArgumentError
        )

    pending = sorted(float(t) for t in record if 0.0 <= t <= horizon)
    partition = OrderedPartition.singletons(n)
    snapshots = []
    jumps = []
    t = 0.0

    while True:
        if len(partition) < 2:
            holding, subset, following = math.inf, (), partition
        else:
            holding, subset, following = coalescent_step(
                partition, measure, rng
            )

        t_next = t + holding

        while pending and pending[0] < t_next:
            snapshots.append((pending.pop(0), partition))

        if math.isinf(t_next) or t_next > horizon:
            break

        jumps.append(JumpRecord(
            t_next, len(subset), tuple(partition.blocks[i][0] for i in subset)
        ))
        partition = following
        t = t_next

    return PartitionPath(n, horizon, snapshots, jumps, partition)


class TmSample(object):

    HEADER = ('replica', 'm', 't_value', 'censored', 'truncation_bound')

    def __init__(self, m_target, n_start, t_value, censored,
                 truncation_bound, path=None, target_met=None):
        self.m_target = m_target
        self.n_start = n_start
        self.t_value = t_value
        self.censored = censored
        self.truncation_bound = truncation_bound
        self.path = path
        self.target_met = target_met

    def row(self, replica):
        return (replica, self.m_target, self.t_value, self.censored,
                self.truncation_bound)


def _power_segment(b0, b1, f0, f1):
    slope = math.log(f1 / f0) / math.log(b1 / b0)

    if abs(slope + 1.0) < 1e-12:
        return f0 * b0 * math.log(b1 / b0), slope

    return f0 * b0 / (slope + 1.0) * ((b1 / b0) ** (slope + 1.0) - 1.0), slope


def _tail_integral(measure, start, decades=2, per_decade=16):
    """∫_start^∞ γ_x^-1 dx, power law between geometric nodes and beyond."""
    nodes = np.unique(np.round(np.geomspace(
        start, start * 10 ** decades, decades * per_decade + 1
    )).astype(np.int64))
    values = [1.0 / lfv_measures.decrease_rates(measure, int(b))[1]
              for b in nodes]
    total = 0.0
    slope = -2.0

    for b0, b1, f0, f1 in zip(nodes, nodes[1:], values, values[1:]):
        part, slope = _power_segment(float(b0), float(b1), f0, f1)
        total += part

    if slope >= -1.0:
        return math.inf

    return total + values[-1] * float(nodes[-1]) / -(slope + 1.0)


@functools.lru_cache(maxsize=1024)
def truncation_bound(measure, n_start):
    """Σ_{b>n_start} γ_b^-1: expected time spent above n_start blocks."""
    if measure.is_kingman:
        return 2.0 / (measure.atom0 * n_start)

    stop = n_start + EXACT_TAIL_SPAN
    _, _, gam, _ = lfv_measures.decrease_table(measure, n_start + 1, stop)

    if np.any(gam <= 0.0):
        return math.inf

    return float(np.sum(1.0 / gam)) + _tail_integral(measure, stop + 0.5)


def plan_n_start(measure, m, n_start='auto', max_n_start=DEFAULT_MAX_N_START):
    """
    Resolve the starting block count for T_m sampling. Returns
    (n_start, truncation bound, whether the 1% target was met).
    """
    if n_start != 'auto':
        n_start = int(n_start)

        if n_start < 1:
            lfv_common.logit(
                {
                    'level': 'EXCEPTION',
                    'message': f'n_start must be positive, got {n_start}'
                },
                exception=lfv_exceptions.ArgumentError
            )

        return n_start, truncation_bound(measure, n_start), None

    report = lfv_measures.classify_cdi(measure, fit=False)

    if report.classification != lfv_measures.COMES_DOWN:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'{measure.spec()} is {report.classification};'
                           ' an automatic start needs a measure that comes'
                           ' down from infinity'
            },
            exception=lfv_exceptions.UnsupportedMeasure
        )

    base = max(int(m), 2)
    scale = lfv_measures.tail_table(
        measure, [base], max(lfv_measures.DEFAULT_B_CAP, 20 * base)
    )[base].extrapolated('gamma_bm')
    target = TRUNCATION_TARGET * scale

    if measure.is_kingman:
        n = max(base + 1, math.ceil(2.0 / (measure.atom0 * target)))

        if n <= max_n_start:
            return n, truncation_bound(measure, n), True

        return max_n_start, truncation_bound(measure, max_n_start), False

    hi = base + 1

    while truncation_bound(measure, hi) > target:
        if hi >= max_n_start:
            lfv_common.logit({
                'level': 'WARNING',
                'message': f'Truncation target {target:.3g} not met by'
                           f' n_start={max_n_start}'
            })

            return max_n_start, truncation_bound(measure, max_n_start), \
                False

        hi = min(2 * hi, max_n_start)

    lo = max(base + 1, hi // 2)

    while lo < hi:
        mid = (lo + hi) // 2

        if truncation_bound(measure, mid) <= target:
            hi = mid
        else:
            lo = mid + 1

    return hi, truncation_bound(measure, hi), True


def sample_Tm(measure, m, n_start='auto', horizon=math.inf, rng=None,
              record_path=False, plan=None,
              max_n_start=DEFAULT_MAX_N_START):
    """
    First time the block-counting chain started at n_start reaches m or
    fewer blocks. Censored at the horizon, following inf ∅ = horizon.
    """
    if m < 1:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'm must be at least 1, got {m}'
            },
            exception=lfv_exceptions.ArgumentError
        )

    if plan is None:
        plan = plan_n_start(measure, m, n_start, max_n_start)

    start, bound, met = plan
    rng = rng if rng is not None else np.random.default_rng()
    t_value, censored, path = _block_count_path(
        measure, m, start, horizon, rng, record_path
    )

    return TmSample(m, start, t_value, censored, bound, path, met)


def _block_count_path(measure, m, n_start, horizon, rng, record_path):
    path = [(0.0, n_start)] if record_path else None

    if n_start <= m:
        return 0.0, False, path

    if measure.is_kingman:
        counts = np.arange(n_start, m, -1)
        rates = measure.atom0 * counts * (counts - 1) / 2.0
        times = np.cumsum(rng.exponential(size=counts.size) / rates)
        censored = bool(times[-1] > horizon)

        if record_path:
            reached = times <= horizon
            path.extend(zip(times[reached].tolist(),
                            (counts[reached] - 1).tolist()))

        return (horizon if censored else float(times[-1])), censored, path

    b = n_start
    t = 0.0

    while b > m:
        law = jump_law(measure, b)

        if law.total_rate == 0.0:
            return horizon, True, path

        t += rng.exponential(1.0 / law.total_rate)

        if t > horizon:
            return horizon, True, path

        b -= law.sample_size(rng) - 1

        if record_path:
            path.append((t, b))

    return t, False, path
