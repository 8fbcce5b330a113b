# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Experiment driver: one method per command, artifacts in, results out."""
import math
import time

import numpy as np

import lfv_lib.lfv_coalescent as lfv_coalescent
import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_estimators as lfv_estimators
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_json as lfv_json
import lfv_lib.lfv_lookdown as lfv_lookdown
import lfv_lib.lfv_measures as lfv_measures


class RunResult(object):

    """Artifacts to write plus a short table for the console."""

    def __init__(self, artifacts, header, rows, started=None):
        self.artifacts = artifacts
        self.header = header
        self.rows = rows
        self.started = started


def _partition_replica(payload, rng, index):
    measure, n, horizon, record = payload
    path = lfv_coalescent.simulate_partition_path(measure, n, horizon, rng,
                                                  record)
    jumps = [dict(replica=index, **j.to_dict()) for j in path.jumps]
    snapshots = [
        (index, t, len(p), p.to_text()) for t, p in path.snapshots
    ] + [(index, horizon, len(path.final), path.final.to_text())]

    return jumps, snapshots


def _tm_replica(payload, rng, index):
    measure, m, plan, horizon = payload

    return lfv_coalescent.sample_Tm(measure, m, horizon=horizon, rng=rng,
                                    plan=plan).row(index)


def _position_rows(index, time_value, positions):
    return [
        (index, time_value, level) + tuple(row)
        for level, row in enumerate(positions.tolist(), start=1)
    ]


def _lookdown_replica(payload, rng, index):
    measure, n, d, T, initial, snapshot_times, method, max_levels = payload
    method = lfv_lookdown.choose_method(measure, n, T, method)

    if method == 'forward':
        run = lfv_lookdown.simulate_lookdown(
            measure, n, d, T, initial, rng, snapshot_times,
            max_levels=max_levels
        )
        log, snapshots, final = run.log, run.snapshots, run.positions
    else:
        record = lfv_lookdown.sample_ancestry(measure, n, d, T, initial, rng)
        log, snapshots, final = record.log, [], record.positions

    rows = []

    for t, positions in snapshots:
        rows.extend(_position_rows(index, t, positions))

    rows.extend(_position_rows(index, T, final))
    events = [dict(replica=index, **e.to_dict()) for e in log]

    return rows, events


def _point_set_metrics(points, scales, exponents, rng):
    box = lfv_estimators.box_counting_dim(
        points, scales or lfv_estimators.default_scales(points)
    )
    energies = {
        a: lfv_estimators.energy_integral(points, a, rng) for a in exponents
    }

    return box, energies


def _support_replica(payload, rng, index):
    (measure, n, d, T, initial, schedule, scales, exponents, method,
     max_levels) = payload
    targets = schedule.sizes if schedule is not None else ()
    record = lfv_lookdown.sample_record(
        measure, n, d, T, targets, initial, rng, method, max_levels
    )

    if schedule is None:
        report = None
        diameter = lfv_estimators.support_diameter(record.positions)
    else:
        report = lfv_estimators.support_metrics(record, schedule)
        diameter = report.diameter

    box, energies = _point_set_metrics(record.positions, scales, exponents,
                                       rng)

    return report, diameter, box, energies


def _positions_replica(payload, rng, index):
    measure, n, d, T, initial, method, max_levels = payload

    return lfv_lookdown.sample_positions(measure, n, d, T, initial, rng,
                                         method, max_levels)


def _median_slope(ks, values):
    usable = [(k, v) for k, v in zip(ks, values) if v > 0.0
              and math.isfinite(v)]

    if len(usable) < 2:
        return None

    x, y = zip(*usable)

    return float(np.polyfit(x, np.log2(y), 1)[0])


class LFV(object):

    """Run the experiments described by a RunConfig."""

    def __init__(self, config, callback=None, silent=False):
        self.config = config
        self.callback = callback
        self.silent = silent

    def _log(self, level, message):
        lfv_common.logit(
            {
                'level': level,
                'message': message
            },
            _callback=self.callback,
            silent=self.silent
        )

    def _replicas(self, func, payload):
        config = self.config
        self._log('VERBOSE', f'{config["replicas"]} replicas, seed'
                             f' {config["seed"]}, {config["workers"]}'
                             ' worker(s)')

        return lfv_common.run_replicas(
            func, payload, config['seed'], config['replicas'],
            config['workers']
        )

    def _alpha(self, measure):
        alpha = self.config['alpha']

        if alpha is not None:
            return alpha

        fit = lfv_measures.fit_alpha(measure, self.config['m_grid'])

        if fit.fitted:
            self._log('VERBOSE', f'Using fitted α = {fit.alpha:.4f}')

            return fit.alpha

        self._log('WARNING', f'{measure.spec()}: no α fit ({fit.hint}),'
                             ' the cluster schedule is skipped')

        return None

    def rates(self):
        started = time.monotonic()
        measure = self.config.measure()
        b = self.config['b']
        tables = [
            lfv_measures.rate_summary(measure, b, m) for m in self.config['m']
        ]
        consistency = lfv_measures.check_consistency(
            measure, self.config['b_max']
        )
        rows = [row for table in tables for row in table.rows()]
        mu_rows = [
            (table.b, table.m, j, table.mu(j))
            for table in tables for j in range(table.m, table.b)
        ]
        summary = {
            'measure': measure.spec(),
            'tables': [table.to_dict() for table in tables],
            'consistency': consistency.to_dict()
        }

        if not consistency.passed:
            self._log('WARNING', 'Consistency residual'
                                 f' {consistency.max_residual:.3g} at (b, k) ='
                                 f' {consistency.worst}')

        return RunResult(
            [
                lfv_json.Artifact.csv('rates.csv',
                                      lfv_measures.RateTable.HEADER, rows),
                lfv_json.Artifact.csv('mu.csv', ('b', 'm', 'target', 'mu'),
                                      mu_rows),
                lfv_json.Artifact.json('rates.json', summary)
            ],
            ('b', 'm', 'lambda_b', 'gamma_b', 'gamma_bm'),
            [(t.b, t.m, t.lambda_b, t.gamma_b, t.gamma_bm) for t in tables],
            started
        )

    def cdi(self):
        started = time.monotonic()
        measure = self.config.measure()
        b_cap = self.config['b_cap']
        report = lfv_measures.classify_cdi(measure, self.config['m_grid'])
        payload = report.to_dict()
        payload['measure'] = measure.spec()
        payload['tail_sums'] = {
            str(m): lfv_measures.tail_sums(measure, m, b_cap).to_dict()
            for m in self.config['m'] if 2 <= m < b_cap
        }

        if report.classification == lfv_measures.COMES_DOWN:
            payload['lambda_fit'] = lfv_measures.fit_alpha(
                measure, self.config['m_grid'], rates='lambda_b'
            ).to_dict()

        payload['cg_bound'] = self._cg_bound(measure)

        return RunResult(
            [lfv_json.Artifact.json('cdi.json', payload)],
            ('measure', 'classification', 'alpha', 'constant', 'method'),
            [(measure.spec(), report.classification, report.alpha,
              report.constant, report.method)],
            started
        )

    def _cg_bound(self, measure):
        density = measure.density

        if density is None:
            return None
        if density.kind == 'powerlaw' and measure.atom0 == 0.0:
            params = (density.c, density.gamma, density.eps)
        elif density.kind == 'beta' and 1.0 < density.beta < 2.0 \
                and density.mass_value == 1.0:
            params = lfv_measures.beta_cg_parameters(density.beta)
        else:
            return None

        return lfv_measures.cg_lower_bound_check(
            *params, self.config['b_max'], measure=measure
        ).to_dict()

    def coalescent(self):
        started = time.monotonic()
        measure = self.config.measure()
        n = self.config['n']
        horizon = self.config.get('horizon', self.config['T'])
        results = self._replicas(
            _partition_replica,
            (measure, n, horizon, tuple(self.config['record_times']))
        )
        jumps = [j for replica_jumps, _ in results for j in replica_jumps]
        snapshots = [s for _, replica in results for s in replica]
        finals = [replica[-1][2] for _, replica in results]
        jump_counts = [len(replica_jumps) for replica_jumps, _ in results]

        return RunResult(
            [
                lfv_json.Artifact.jsonl('jumps.jsonl', jumps),
                lfv_json.Artifact.csv(
                    'partitions.csv',
                    ('replica', 'time', 'block_count', 'blocks'), snapshots
                )
            ],
            ('replicas', 'mean_jumps', 'mean_final_blocks'),
            [(len(results), float(np.mean(jump_counts)),
              float(np.mean(finals)))],
            started
        )

    def tm(self):
        started = time.monotonic()
        config = self.config
        measure = config.measure()
        horizon = config.get('horizon', math.inf)
        rows = []
        summary = {}
        table = []

        for m in config['m']:
            plan = lfv_coalescent.plan_n_start(
                measure, m, config['n_start'], config['max_n_start']
            )
            samples = self._replicas(_tm_replica, (measure, m, plan, horizon))
            rows.extend(samples)
            values = [row[2] for row in samples]
            censored = sum(1 for row in samples if row[3])
            mean, se = lfv_common.mean_and_se(values)
            b_cap = max(config['b_cap'], plan[0])
            tail = lfv_measures.tail_table(measure, [m], b_cap)[m]
            bound = tail.truncated('gamma_bm')
            summary[str(m)] = {
                'n_start': plan[0],
                'truncation_bound': plan[1],
                'truncation_target_met': plan[2],
                'mean': mean,
                'standard_error': se,
                'censored': censored,
                'tail_sum': tail.to_dict()['sums']['gamma_bm'],
                'bound_holds': bool(mean <= bound + 3.0 * se)
            }
            table.append((m, plan[0], mean, se, bound, censored))

        return RunResult(
            [
                lfv_json.Artifact.csv('tm.csv', lfv_coalescent.TmSample.HEADER,
                                      rows),
                lfv_json.Artifact.json('tm.json', {
                    'measure': measure.spec(), 'm': summary
                })
            ],
            ('m', 'n_start', 'mean', 'se', 'tail_sum', 'censored'),
            table,
            started
        )

    def lookdown(self):
        started = time.monotonic()
        config = self.config
        measure = config.measure()
        d = config['d']
        results = self._replicas(_lookdown_replica, (
            measure, config['n'], d, config['T'], config['initial'],
            tuple(config['snapshot_times']), config['method'],
            config['max_levels']
        ))
        header = ('replica', 'time', 'level') + tuple(
            f'x_{i}' for i in range(1, d + 1)
        )
        rows = [row for replica_rows, _ in results for row in replica_rows]
        events = [e for _, replica_events in results for e in replica_events]
        counts = [len(replica_events) for _, replica_events in results]
        mean, se = lfv_common.mean_and_se(counts)

        return RunResult(
            [
                lfv_json.Artifact.csv('snapshots.csv', header, rows),
                lfv_json.Artifact.jsonl('events.jsonl', events)
            ],
            ('replicas', 'mean_events', 'se'),
            [(len(results), mean, se)],
            started
        )

    def support(self):
        started = time.monotonic()
        config = self.config
        measure = config.measure()
        lfv_lookdown.check_measure(measure)
        n, d = config['n'], config['d']
        alpha = self._alpha(measure)
        schedule = lfv_estimators.ClusterSchedule.for_levels(alpha, n) \
            if alpha is not None else None
        results = self._replicas(_support_replica, (
            measure, n, d, config['T'], config['initial'], schedule,
            config['scales'], tuple(config['exponents']), config['method'],
            config['max_levels']
        ))
        radius_rows = []
        box_rows = []
        replicas = []

        for index, (report, diameter, box, energies) in enumerate(results):
            entry = report.to_dict() if report is not None else {
                'diameter': diameter
            }
            entry['box_counting'] = box.to_dict()
            entry['energies'] = {
                str(a): e.to_dict() for a, e in energies.items()
            }
            replicas.append(entry)
            box_rows.extend((index, s, c) for s, c in box.rows())

            if report is None:
                continue

            for k, value in zip(schedule.ks, report.radii):
                radius_rows.append((index, 'R', k, value))
            for k, value in zip(schedule.ks, report.dislocations):
                radius_rows.append((index, 'D', k, value))

        diameters = [diameter for _, diameter, _, _ in results]
        aggregate = {
            'median_diameter': float(np.median(diameters)),
            'dimension_bounds': lfv_estimators.dimension_bounds(
                alpha, d).to_dict(),
            'median_box_slope': float(np.median(
                [box.slope for _, _, box, _ in results]
            ))
        }
        table = [('diameter', aggregate['median_diameter'])]

        if schedule is not None:
            reports = [report for report, _, _, _ in results]
            medians = [
                float(np.median([r.radii[i] for r in reports]))
                for i in range(len(schedule))
            ]
            realized = [
                k for i, k in enumerate(schedule.ks)
                if all(r.realized[i] for r in reports)
            ]
            realized_medians = [
                medians[schedule.ks.index(k)] for k in realized
            ]
            exceeded = 0
            last = None

            if realized:
                last = schedule.ks.index(realized[-1])
                exceeded = sum(
                    1 for r in reports if last in r.count_exceeded()
                )

            aggregate.update({
                'schedule': schedule.to_dict(),
                'median_radii': medians,
                'radius_slope_log2': _median_slope(realized,
                                                   realized_medians),
                'radius_bounds': [
                    lfv_estimators.radius_bound(k, config['delta'])
                    for k in schedule.ks
                ],
                'dislocation_bound_terms':
                    lfv_estimators.dislocation_bound_terms(
                        schedule, config['delta'], d),
                'triangle_ok': all(r.triangle_ok for r in reports),
                'count_exceeded_fraction': exceeded / len(reports)
            })
            table.append(('radius_slope_log2',
                          aggregate['radius_slope_log2']))
            table.append(('triangle_ok', aggregate['triangle_ok']))

        return RunResult(
            [
                lfv_json.Artifact.json('support.json', {
                    'measure': measure.spec(),
                    'aggregate': aggregate,
                    'replicas': replicas
                }),
                lfv_json.Artifact.csv('radii.csv',
                                      ('replica', 'kind', 'm_or_k', 'value'),
                                      radius_rows),
                lfv_json.Artifact.csv('boxcount.csv',
                                      ('replica', 'scale', 'count'), box_rows)
            ],
            ('quantity', 'value'),
            table,
            started
        )

    def _point_sets(self):
        config = self.config
        path = config['points_file']

        if path is not None:
            return [_load_points(path)], None

        measure = config.measure()
        lfv_lookdown.check_measure(measure)

        return self._replicas(_positions_replica, (
            measure, config['n'], config['d'], config['T'],
            config['initial'], config['method'], config['max_levels']
        )), measure

    def dimension(self):
        started = time.monotonic()
        config = self.config
        point_sets, measure = self._point_sets()
        d = point_sets[0].shape[1]
        alpha = config['alpha']

        if alpha is None and measure is not None:
            alpha = self._alpha(measure)

        bounds = lfv_estimators.dimension_bounds(alpha, d)
        rng = lfv_common.replica_rng(config['seed'], len(point_sets))
        box_rows = []
        replicas = []

        for index, points in enumerate(point_sets):
            box, energies = _point_set_metrics(
                points, config['scales'], config['exponents'], rng
            )
            box_rows.extend((index, s, c) for s, c in box.rows())
            replicas.append({
                'box_counting': box.to_dict(),
                'in_bounds': bounds.contains(box.slope, tolerance=0.3),
                'energies': {str(a): e.to_dict() for a, e in energies.items()}
            })

        slopes = [r['box_counting']['slope'] for r in replicas]

        return RunResult(
            [
                lfv_json.Artifact.csv('boxcount.csv',
                                      ('replica', 'scale', 'count'), box_rows),
                lfv_json.Artifact.json('dimension.json', {
                    'measure': measure.spec() if measure else None,
                    'bounds': bounds.to_dict(),
                    'median_slope': float(np.median(slopes)),
                    'replicas': replicas
                })
            ],
            ('replicas', 'median_slope', 'lower', 'upper'),
            [(len(replicas), float(np.median(slopes)), bounds.lower,
              bounds.upper)],
            started
        )

    def moment2(self):
        started = time.monotonic()
        config = self.config
        measure = config.measure()
        check = lfv_estimators.second_moment_check(
            measure, config['T'], config['phi1'], config['phi2'],
            config['replicas'], config['seed'], config['n'], config['d'],
            config['workers'], config['method']
        )
        payload = check.to_dict()
        payload['measure'] = measure.spec()

        return RunResult(
            [lfv_json.Artifact.json('moment2.json', payload)],
            ('analytic', 'mc_estimate', 'se', 'z_score'),
            [(check.analytic, check.estimate, check.standard_error,
              check.z_score)],
            started
        )

    def write(self, result):
        """Write a result's artifacts under the configured directory."""
        return lfv_json.write_outputs(
            self.config['output_dir'], result.artifacts, self.config,
            result.started
        )


def _load_points(path):
    """One point per CSV row; a non-numeric first row is a header."""
    points = None

    try:
        for skip in (0, 1):
            try:
                points = np.loadtxt(path, delimiter=',', ndmin=2,
                                    skiprows=skip)
                break
            except ValueError as err:
                problem = err
    except OSError as err:
        problem = err

    if points is None or points.size == 0:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'{path}: '
                           f'{problem if points is None else "no points"}'
            },
            exception=lfv_exceptions.ConfigError
        )

    return points
