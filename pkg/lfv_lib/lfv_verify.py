# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Invariant suite: every documented property, checked and reported."""
import collections
import itertools
import math
import os
import tempfile

import numpy as np
from scipy import stats

import lfv_lib.lfv as lfv
import lfv_lib.lfv_coalescent as lfv_coalescent
import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_estimators as lfv_estimators
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_json as lfv_json
import lfv_lib.lfv_lookdown as lfv_lookdown
import lfv_lib.lfv_measures as lfv_measures

PASSED = 'passed'
FAILED = 'failed'
SKIPPED = 'skipped'
P_FLOOR = 1e-3

BUILTIN_MEASURES = ('delta0:1', 'delta1:1', 'beta:1.5', 'beta:0.8',
                    'powerlaw:c=1,gamma=0.5,eps=0.5')
RATE_MEASURES = ('delta0:1', 'delta1:1', 'beta:1.5',
                 'powerlaw:c=1,gamma=0.5,eps=0.5')
COMES_DOWN_MEASURES = ('delta0:1', 'beta:1.5',
                       'powerlaw:c=1,gamma=0.5,eps=0.5')
LOOKDOWN_MEASURES = ('zero', 'delta0:1', 'beta:1.5', 'beta:0.8')

# quick, full
PROFILE = {
    'consistency_b': (20, 30),
    'monotone_b': (40, 100),
    'oracle_b': (20, 50),
    'jump_draws': (20000, 100000),
    'jump_b': (5, 6),
    'tm_replicas': (500, 10000),
    'tm_n_start': (200, 1000),
    'tm_m': ((5, 10), (5, 10, 20)),
    'genealogy_replicas': (3000, 100000),
    'lookdown_replicas': (300, 5000),
    'triangle_replicas': (5, 50),
    'triangle_n': (256, 4096),
    'sup_paths': (5000, 100000),
    'sup_steps': (200, 1000),
    'box_n': (1024, 16384),
    'moment_n': (256, 2048),
    'moment_replicas': (60, 200),
    'compact_replicas': (0, 50)
}


class InvariantResult(object):

    def __init__(self, module, name, status, detail=''):
        self.module = module
        self.name = name
        self.status = status
        self.detail = detail

    def row(self):
        return (self.module, self.name, self.status, self.detail)


def _p_ok(p):
    return bool(np.isnan(p) or p > P_FLOOR)


def _chisquare_counts(observed, expected):
    """Chi-square of observed against positive expected counts."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    support = expected > 0.0

    if np.any(observed[~support] > 0):
        return 0.0

    observed, expected = observed[support], expected[support]

    if observed.size < 2:
        return 1.0

    expected = expected * observed.sum() / expected.sum()

    return float(stats.chisquare(observed, expected).pvalue)


def _contingency(first, second):
    values = sorted(set(first) | set(second))
    table = np.array([
        [collections.Counter(sample)[v] for v in values]
        for sample in (first, second)
    ])
    table = table[:, table.sum(axis=0) > 0]

    if table.shape[1] < 2:
        return 1.0

    return float(stats.chi2_contingency(table)[1])


class LFVVerify(object):

    """Run the invariant checks of every module and collect a report."""

    CHECKS = (
        ('measures', 'consistency recursion', '_consistency'),
        ('measures', 'beta closed form against quadrature', '_beta_oracle'),
        ('measures', 'decrease rates against integral identities',
         '_identity_oracle'),
        ('measures', 'monotone gamma_bm and rate sandwich', '_monotone'),
        ('measures', 'mu targets sum to lambda_b', '_mu_sums'),
        ('measures', 'pascal identity of binomial weights', '_pascal'),
        ('measures', 'Kingman tail sums and alpha', '_kingman_tail'),
        ('measures', 'classification of built-in families', '_classify'),
        ('measures', 'powerlaw lower bound on lambda_n', '_cg_bound'),
        ('coalescent', 'jump chain law', '_jump_chain'),
        ('coalescent', 'block counts decrease and partitions stay valid',
         '_partition_paths'),
        ('coalescent', 'sampling consistency of restrictions',
         '_restriction_law'),
        ('coalescent', 'T_m monotone in n under a shared stream',
         '_tm_monotone'),
        ('coalescent', 'mean T_m below the tail sum', '_tm_bound'),
        ('lookdown', 'relabeling agrees with ancestral levels',
         '_relabel_agreement'),
        ('lookdown', 'block index equals ancestor level', '_level_identity'),
        ('lookdown', 'recovered partition has the coalescent law',
         '_genealogy_law'),
        ('lookdown', 'level one never jumps and diffuses',
         '_level_one'),
        ('lookdown', 'exchangeable levels', '_exchangeable'),
        ('lookdown', 'event rate lambda_n', '_event_rate'),
        ('lookdown', 'seeded runs are identical', '_lookdown_determinism'),
        ('lookdown', 'ancestral sampler matches forward sampler',
         '_sampler_agreement'),
        ('estimators', 'triangle chain and observed counts',
         '_triangle_chain'),
        ('estimators', 'Brownian sup bound dominates Monte Carlo',
         '_sup_bound'),
        ('estimators', 'box-count slope at most d + 0.2', '_box_slope'),
        ('estimators', 'second moment duality', '_second_moment'),
        ('estimators', 'compactness contrast in beta', '_compactness'),
        ('cli', 'outputs reproducible across runs and workers',
         '_cli_determinism')
    )

    def __init__(self, seed=0, quick=True, modules=None, workers=1,
                 callback=None, silent=False):
        self.seed = seed
        self.quick = quick
        self.modules = modules
        self.workers = workers
        self.callback = callback
        self.silent = silent
        self.results = []

    def _size(self, key):
        return PROFILE[key][0 if self.quick else 1]

    def _rng(self, name):
        return lfv_common.replica_rng(self.seed, sum(map(ord, name)))

    def _log(self, level, message):
        lfv_common.logit(
            {
                'level': level,
                'message': message
            },
            _callback=self.callback,
            silent=self.silent
        )

    def run(self):
        self.results = []

        for module, name, method in self.CHECKS:
            if self.modules and module not in self.modules:
                continue

            try:
                with lfv_common.raising():
                    outcome = getattr(self, method)()
            except lfv_exceptions.LFVError as err:
                outcome = (False, f'{type(err).__name__}: {err}')

            if outcome is None:
                result = InvariantResult(module, name, SKIPPED, 'quick mode')
            else:
                passed, detail = outcome
                result = InvariantResult(
                    module, name, PASSED if passed else FAILED, detail
                )

            level = 'ERROR' if result.status == FAILED else 'VERBOSE'
            self._log(level, f'[{module}] {name}: {result.status}'
                             f' {result.detail}')
            self.results.append(result)

        return self.results

    def failures(self):
        return [r for r in self.results if r.status == FAILED]

    # measures

    def _consistency(self):
        b_max = self._size('consistency_b')
        worst = 0.0

        for spec in RATE_MEASURES:
            report = lfv_measures.check_consistency(
                lfv_measures.parse_measure(spec), b_max
            )
            worst = max(worst, report.max_residual)

        return worst <= lfv_measures.CONSISTENCY_TOL, \
            f'max residual {worst:.3g}'

    def _beta_oracle(self):
        worst = 0.0
        b_max = self._size('oracle_b')

        for beta in (0.8, 1.5):
            density = lfv_measures.BetaDensity(beta)

            for b in range(2, b_max + 1):
                for k in range(2, b + 1):
                    closed = density.lambda_bk(b, k)
                    quad, _ = density.integrate(
                        lfv_measures._kernel(b, k), (k - 1.0) / b
                    )
                    worst = max(worst, abs(closed - quad) / max(closed,
                                                                 1e-300))

        return worst <= 1e-8, f'max relative gap {worst:.3g}'

    def _identity_oracle(self):
        worst = 0.0

        for spec in RATE_MEASURES:
            measure = lfv_measures.parse_measure(spec)

            for b in (3, 7, 15, 30):
                ms = [m for m in (2, 3, 5) if m < b]
                direct = lfv_measures.decrease_rates(measure, b, ms)
                oracle = lfv_measures.decrease_rates_by_quadrature(
                    measure, b, ms
                )
                pairs = [(direct[0], oracle[0]), (direct[1], oracle[1])] + [
                    (direct[2][m], oracle[2][m]) for m in ms
                ]

                for a, o in pairs:
                    worst = max(worst, abs(a - o) / max(abs(o), 1.0))

        return worst <= 1e-7, f'max relative gap {worst:.3g}'

    def _monotone(self):
        b_max = self._size('monotone_b')
        failures = []

        for spec in RATE_MEASURES:
            measure = lfv_measures.parse_measure(spec)
            ms = list(range(2, b_max))
            _, lam, gam, capped = lfv_measures.decrease_table(
                measure, 3, b_max, ms
            )
            tol = 1e-9

            for m in ms:
                values = capped[m]
                seen = values[~np.isnan(values)]

                if np.any(np.diff(seen) < -tol * np.abs(seen[1:])):
                    failures.append(f'{spec}: γ_(b,{m}) decreases')

                rows = ~np.isnan(values)

                if np.any(lam[rows] > values[rows] * (1 + tol)) or np.any(
                        values[rows] > gam[rows] * (1 + tol)):
                    failures.append(f'{spec}: sandwich fails at m={m}')

        detail = '; '.join(failures[:3]) or f'all b <= {b_max}'

        return not failures, detail

    def _mu_sums(self):
        worst = 0.0

        for spec in RATE_MEASURES:
            measure = lfv_measures.parse_measure(spec)

            for b, m in ((4, 2), (10, 3), (25, 7)):
                table = lfv_measures.rate_summary(measure, b, m)
                total = sum(table.mu(j) for j in range(m, b))
                worst = max(worst, abs(total - table.lambda_b)
                            / max(table.lambda_b, 1.0))

        return worst <= 1e-12, f'max relative gap {worst:.3g}'

    def _pascal(self):
        worst = 0.0

        for n in (10, 60, 61, 200, 1000):
            k = np.arange(1, n)
            lhs = lfv_measures.log_binomial(n + 1, k)
            rhs = np.logaddexp(lfv_measures.log_binomial(n, k),
                               lfv_measures.log_binomial(n, k - 1))
            gap = np.abs(lhs - rhs) / np.maximum(1.0, lhs)
            worst = max(worst, float(gap.max()))

        exact = all(
            lfv_measures.binomial(n + 1, k) == lfv_measures.binomial(n, k)
            + lfv_measures.binomial(n, k - 1)
            for n in range(2, 61) for k in range(1, n + 1)
        )

        return exact and worst <= 1e-12, f'log-space gap {worst:.3g}'

    def _kingman_tail(self):
        measure = lfv_measures.parse_measure('delta0:1')
        gaps = []

        for m in (5, 10, 50):
            tail = lfv_measures.tail_sums(measure, m, 2000)
            gaps.append(abs(tail.extrapolated('lambda_b') - 2.0 / m))

        fit = lfv_measures.fit_alpha(measure, lfv_measures.DEFAULT_M_GRID)
        ok = max(gaps) <= 1e-9 and fit.fitted and abs(fit.alpha - 1.0) <= 0.05

        return ok, f'max gap {max(gaps):.3g}, α̂ = {fit.alpha}'

    def _classify(self):
        expected = {
            'delta0:1': lfv_measures.COMES_DOWN,
            'delta1:1': lfv_measures.NEITHER,
            'beta:1.5': lfv_measures.COMES_DOWN,
            'beta:0.8': lfv_measures.STAYS_INFINITE,
            'powerlaw:c=1,gamma=0.5,eps=0.5': lfv_measures.COMES_DOWN,
            'mix:delta1=1+beta=0.8': lfv_measures.NEITHER
        }
        wrong = []

        for spec, label in expected.items():
            got = lfv_measures.classify_cdi(
                lfv_measures.parse_measure(spec), fit=False
            ).classification

            if got != label:
                wrong.append(f'{spec}: {got}')

        return not wrong, '; '.join(wrong) or f'{len(expected)} measures'

    def _cg_bound(self):
        report = lfv_measures.cg_lower_bound_check(1.0, 0.5, 0.5, 200)
        tails_ok = all(tail <= bound for bound, tail in report.tails.values())

        return report.passed and tails_ok, \
            f'C = {report.constant:.4f}, min ratio {report.min_ratio:.4f}'

    # coalescent

    def _jump_chain(self):
        rng = self._rng('jump_chain')
        draws = self._size('jump_draws')
        worst = 1.0

        for spec in RATE_MEASURES:
            measure = lfv_measures.parse_measure(spec)

            for b in range(2, self._size('jump_b') + 1):
                law = lfv_coalescent.jump_law(measure, b)
                subsets = [
                    s for size in range(2, b + 1)
                    for s in _subsets(b, size)
                ]
                index = {s: i for i, s in enumerate(subsets)}
                observed = np.zeros(len(subsets))

                for _ in range(draws):
                    k = law.sample_size(rng)
                    observed[index[lfv_coalescent.sample_subset(b, k,
                                                                rng)]] += 1

                expected = np.array([
                    lfv_measures.lambda_bk(measure, b, len(s))
                    for s in subsets
                ]) * draws / law.total_rate
                worst = min(worst, _chisquare_counts(observed, expected))

        return worst > P_FLOOR, f'min p-value {worst:.3g}'

    def _partition_paths(self):
        rng = self._rng('partition_paths')
        broken = 0

        for spec in BUILTIN_MEASURES:
            measure = lfv_measures.parse_measure(spec)

            for _ in range(20):
                path = lfv_coalescent.simulate_partition_path(
                    measure, 12, 5.0, rng, record=(0.5, 1.0, 2.0)
                )
                counts = [12]

                for jump in path.jumps:
                    counts.append(counts[-1] - (jump.k - 1))

                if any(a <= b for a, b in zip(counts, counts[1:])):
                    broken += 1

                for _, partition in path.snapshots + [(None, path.final)]:
                    rebuilt = lfv_coalescent.OrderedPartition(
                        partition.blocks, partition.n
                    )

                    if rebuilt != partition:
                        broken += 1

        return broken == 0, f'{broken} broken paths'

    def _restriction_law(self):
        rng = self._rng('restriction_law')
        measure = lfv_measures.parse_measure('delta0:1')
        replicas = self._size('genealogy_replicas')
        restricted = []
        direct = []

        for _ in range(replicas):
            six = lfv_coalescent.simulate_partition_path(
                measure, 6, 0.5, rng
            ).final
            restricted.append(len(lfv_coalescent.restriction(six, 3)))
            direct.append(len(lfv_coalescent.simulate_partition_path(
                measure, 3, 0.5, rng
            ).final))

        p = _contingency(restricted, direct)

        return p > 0.01, f'p = {p:.3g}'

    def _tm_monotone(self):
        rng = self._rng('tm_monotone')
        broken = 0

        for spec in ('delta0:1', 'beta:1.5', 'beta:0.8'):
            measure = lfv_measures.parse_measure(spec)

            for _ in range(10):
                run = lfv_lookdown.simulate_lookdown(measure, 64, 1, 2.0,
                                                     rng=rng)

                for m in (1, 3, 8):
                    times, _ = lfv_lookdown.coming_down_times(run.log, 64, m,
                                                              2.0)

                    if np.any(np.diff(times) < 0.0):
                        broken += 1

        return broken == 0, f'{broken} non-monotone sequences'

    def _tm_bound(self):
        replicas = self._size('tm_replicas')
        n_start = self._size('tm_n_start')
        notes = []
        ok = True

        for spec in COMES_DOWN_MEASURES:
            measure = lfv_measures.parse_measure(spec)

            for m in self._size('tm_m'):
                plan = lfv_coalescent.plan_n_start(measure, m, n_start)
                values = [
                    row[2] for row in lfv_common.run_replicas(
                        lfv._tm_replica, (measure, m, plan, math.inf),
                        self.seed, replicas, self.workers
                    )
                ]
                mean, se = lfv_common.mean_and_se(values)
                bound = lfv_measures.tail_table(
                    measure, [m], max(2000, n_start)
                )[m].truncated('gamma_bm')

                if mean > bound + 3.0 * se:
                    ok = False
                    notes.append(f'{spec} m={m}: {mean:.4g} > {bound:.4g}')

        return ok, '; '.join(notes) or 'all means below their tail sums'

    # lookdown

    def _relabel_agreement(self):
        rng = self._rng('relabel_agreement')
        broken = 0

        for spec in ('delta0:1', 'beta:1.5', 'beta:0.8'):
            measure = lfv_measures.parse_measure(spec)

            for _ in range(10):
                run = lfv_lookdown.simulate_lookdown(
                    measure, 16, 1, 1.0, initial='levels', rng=rng,
                    diffusion=0.0
                )
                labels = run.positions[:, 0].astype(np.int64)
                levels = lfv_lookdown.ancestral_levels(run.log, 0.0, 1.0)

                if not np.array_equal(labels, levels):
                    broken += 1

        return broken == 0, f'{broken} mismatched replicas'

    def _level_identity(self):
        rng = self._rng('level_identity')
        checked = 0

        for spec in ('delta0:1', 'beta:1.5', 'beta:0.8'):
            measure = lfv_measures.parse_measure(spec)

            for _ in range(20):
                run = lfv_lookdown.simulate_lookdown(measure, 32, 1, 1.0,
                                                     rng=rng)

                for t in (0.0, 0.1, 0.3, 0.8, 1.0):
                    lfv_lookdown.recovered_partition(run.log, t, 1.0)
                    checked += 1

        return True, f'{checked} partitions'

    def _genealogy_law(self):
        replicas = self._size('genealogy_replicas')
        rng = self._rng('genealogy_law')
        worst = 1.0

        for spec in ('delta0:1', 'beta:1.5'):
            measure = lfv_measures.parse_measure(spec)

            for t in (0.3, 0.8):
                recovered = []
                direct = []

                for _ in range(replicas):
                    run = lfv_lookdown.simulate_lookdown(measure, 4, 1, t,
                                                         rng=rng)
                    recovered.append(len(lfv_lookdown.recovered_partition(
                        run.log, t, t
                    )))
                    direct.append(len(lfv_coalescent.simulate_partition_path(
                        measure, 4, t, rng
                    ).final))

                worst = min(worst, _contingency(recovered, direct))

        return worst > P_FLOOR, f'min p-value {worst:.3g}'

    def _level_one(self):
        rng = self._rng('level_one')
        replicas = self._size('lookdown_replicas')
        notes = []
        ok = True

        for spec in LOOKDOWN_MEASURES:
            measure = lfv_measures.parse_measure(spec)
            squares = []

            for _ in range(replicas):
                run = lfv_lookdown.simulate_lookdown(
                    measure, 8, 2, 1.0, rng=rng, record_ancestry=True
                )
                squares.append(float((run.positions[0] ** 2).sum()) / 2.0)

                before = run.pre_event_positions(range(len(run.log)))

                for index, event in enumerate(run.log):
                    state = lfv_lookdown.LookdownState(before[index])
                    after = lfv_lookdown.apply_event(state, event.participants)

                    if not np.array_equal(after.positions[0],
                                          state.positions[0]):
                        ok = False

            mean, se = lfv_common.mean_and_se(squares)

            if abs(mean - 1.0) > 3.0 * se:
                ok = False
                notes.append(f'{spec}: variance ratio {mean:.3f} ± {se:.3f}')

        return ok, '; '.join(notes) or 'level one is Brownian'

    def _exchangeable(self):
        rng = self._rng('exchangeable')
        replicas = self._size('lookdown_replicas')
        worst = 1.0

        for spec in ('delta0:1', 'beta:1.5'):
            measure = lfv_measures.parse_measure(spec)
            lower = []
            upper = []

            for _ in range(replicas):
                x = lfv_lookdown.simulate_lookdown(
                    measure, 8, 1, 0.5, initial={'kind': 'normal',
                                                 'scale': 1.0}, rng=rng
                ).positions[:, 0]
                lower.extend(x[:4].tolist())
                upper.extend(x[4:].tolist())

            worst = min(worst, float(stats.ks_2samp(lower, upper).pvalue))

        return worst > P_FLOOR, f'min p-value {worst:.3g}'

    def _event_rate(self):
        rng = self._rng('event_rate')
        replicas = self._size('lookdown_replicas')
        notes = []

        for spec in LOOKDOWN_MEASURES:
            measure = lfv_measures.parse_measure(spec)
            counts = [
                len(lfv_lookdown.simulate_lookdown(measure, 6, 1, 1.0,
                                                   rng=rng).log)
                for _ in range(replicas)
            ]
            mean, se = lfv_common.mean_and_se(counts)
            expected = lfv_measures.decrease_rates(measure, 6)[0]

            if abs(mean - expected) > 3.0 * se + 1e-12:
                notes.append(f'{spec}: {mean:.3f} vs {expected:.3f}')

        return not notes, '; '.join(notes) or 'all within 3 SE'

    def _lookdown_determinism(self):
        measure = lfv_measures.parse_measure('beta:1.5')
        runs = [
            lfv_lookdown.simulate_lookdown(
                measure, 32, 2, 1.0, rng=lfv_common.replica_rng(self.seed, 7)
            ) for _ in range(2)
        ]
        same_log = runs[0].log.records() == runs[1].log.records()
        same_positions = np.array_equal(runs[0].positions, runs[1].positions)

        return same_log and same_positions, 'bit-for-bit'

    def _sampler_agreement(self):
        rng = self._rng('sampler_agreement')
        replicas = self._size('lookdown_replicas')
        measure = lfv_measures.parse_measure('beta:1.5')
        forward = []
        backward = []

        for _ in range(replicas):
            forward.append(lfv_lookdown.simulate_lookdown(
                measure, 8, 1, 1.0, rng=rng).positions[-1, 0])
            backward.append(lfv_lookdown.sample_ancestry(
                measure, 8, 1, 1.0, rng=rng).positions[-1, 0])

        p = float(stats.ks_2samp(forward, backward).pvalue)

        return p > P_FLOOR, f'p = {p:.3g}'

    # estimators

    def _triangle_chain(self):
        rng = self._rng('triangle_chain')
        n = self._size('triangle_n')
        measure = lfv_measures.parse_measure('delta0:1')
        schedule = lfv_estimators.ClusterSchedule.for_levels(1.0, n)
        reports = [
            lfv_estimators.support_metrics(
                lfv_lookdown.sample_ancestry(measure, n, 2, 1.0, rng=rng,
                                             block_targets=schedule.sizes),
                schedule
            ) for _ in range(self._size('triangle_replicas'))
        ]
        chain_ok = all(r.triangle_ok for r in reports)
        ordered = all(
            all(a >= b for a, b in zip(r.lookbacks, r.lookbacks[1:]))
            for r in reports
        )
        realized = [
            i for i in range(len(schedule))
            if all(r.realized[i] for r in reports)
        ]
        exceeded = 0

        if realized:
            exceeded = sum(1 for r in reports
                           if realized[-1] in r.count_exceeded())

        rare = exceeded <= 0.05 * len(reports)

        return chain_ok and ordered and rare, \
            f'{exceeded} of {len(reports)} replicas exceed N_k'

    def _sup_bound(self):
        rng = self._rng('sup_bound')
        paths = self._size('sup_paths')
        steps = self._size('sup_steps')
        notes = []

        for d in (1, 2, 3):
            bound = lfv_estimators.brownian_sup_bound(d, 1.0, 1.0)

            if bound.c1 != math.sqrt(8.0 * d ** 3 / math.pi) or \
                    bound.c2 != 1.0 / (2.0 * d):
                notes.append(f'constants wrong for d={d}')

            for x in (2.0, 3.0, 4.0):
                limit = lfv_estimators.brownian_sup_bound(d, 1.0, x)
                p, _ = lfv_estimators.brownian_sup_probability(
                    d, 1.0, x, paths, steps, rng
                )

                if p > limit.probability:
                    notes.append(f'd={d} x={x}: {p:.4g} > {limit.bound:.4g}')

        return not notes, '; '.join(notes) or 'bound holds on the grid'

    def _box_slope(self):
        rng = self._rng('box_slope')
        n = self._size('box_n')
        notes = []

        for spec in ('delta0:1', 'beta:1.5'):
            points = lfv_lookdown.sample_ancestry(
                lfv_measures.parse_measure(spec), n, 2, 1.0, rng=rng
            ).positions
            box = lfv_estimators.box_counting_dim(
                points, lfv_estimators.default_scales(points)
            )

            if box.slope > 2.2:
                notes.append(f'{spec}: slope {box.slope:.3f}')

        return not notes, '; '.join(notes) or 'slopes within d + 0.2'

    def _second_moment(self):
        notes = []
        phi = {'center': None, 'width': 1.0}

        for spec in COMES_DOWN_MEASURES:
            check = lfv_estimators.second_moment_check(
                lfv_measures.parse_measure(spec), 0.5, phi, phi,
                self._size('moment_replicas'), self.seed,
                self._size('moment_n'), 2, self.workers
            )

            if abs(check.z_score) > 3.0:
                notes.append(f'{spec}: z = {check.z_score:.2f}')

        return not notes, '; '.join(notes) or '|z| <= 3'

    def _compactness(self):
        replicas = self._size('compact_replicas')

        if not replicas:
            return None

        slopes = {}
        sizes = (2 ** 10, 2 ** 12, 2 ** 14)

        for spec in ('beta:1.5', 'beta:0.8'):
            measure = lfv_measures.parse_measure(spec)
            medians = []

            for n in sizes:
                diameters = lfv_common.run_replicas(
                    _diameter_replica, (measure, n), self.seed, replicas,
                    self.workers
                )
                medians.append(float(np.median(diameters)))

            slopes[spec] = (
                float(np.polyfit(np.log2(sizes), medians, 1)[0]), medians
            )

        flat = abs(slopes['beta:1.5'][0]) <= 0.1
        growing = all(a < b for a, b in zip(slopes['beta:0.8'][1],
                                            slopes['beta:0.8'][1][1:]))

        return flat and growing, f'slopes {slopes}'

    # cli

    def _cli_determinism(self):
        digests = []

        for workers in (1, 2, 1):
            with tempfile.TemporaryDirectory() as directory:
                config = lfv_json.load_config(overrides={
                    'measure': 'beta:1.5', 'seed': self.seed, 'm': [5],
                    'replicas': 20, 'n_start': 100, 'workers': workers,
                    'output_dir': directory
                })
                driver = lfv.LFV(config, silent=True)
                manifest = driver.write(driver.tm())
                digests.append(manifest.files)

                if not os.path.exists(manifest.path):
                    return False, 'manifest missing'

        same = all(d == digests[0] for d in digests)

        return same, 'identical checksums' if same else f'{digests}'


def _diameter_replica(payload, rng, index):
    measure, n = payload

    return lfv_estimators.support_diameter(
        lfv_lookdown.sample_ancestry(measure, n, 2, 1.0, rng=rng).positions
    )


def _subsets(b, size):
    return list(itertools.combinations(range(b), size))
