# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Support, radius, dimension and moment diagnostics of lookdown samples."""
import math

import numpy as np
from scipy import integrate, spatial, stats

import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_lookdown as lfv_lookdown

TRIANGLE_RTOL = 1e-12
ENERGY_MAX_POINTS = 10000
ENERGY_GROUPS = 5
ENERGY_CHUNK = 1024
BOX_FILL = 0.1
BOX_MAX_LEVELS = 24
MOMENT_RTOL = 1e-8
SCHEDULE_K_MAX = 64


def _argument_error(message):
    lfv_common.logit(
        {
            'level': 'EXCEPTION',
            'message': message
        },
        exception=lfv_exceptions.ArgumentError
    )


def cluster_size(alpha, k):
    """N_k = 2^{k/α} k^{2/α}, rounded up."""
    return math.ceil(2.0 ** (k / alpha) * k ** (2.0 / alpha) - 1e-9)


class ClusterSchedule(object):

    def __init__(self, alpha, ks):
        if not (alpha > 0.0 and math.isfinite(alpha)):
            _argument_error(f'α must be positive, got {alpha!r}')

        ks = [int(k) for k in ks]

        if not ks or ks[0] < 1 or any(a >= b for a, b in zip(ks, ks[1:])):
            _argument_error(f'k values must increase from 1 or more: {ks}')

        self.alpha = float(alpha)
        self.ks = ks
        self.sizes = [cluster_size(self.alpha, k) for k in ks]

    @classmethod
    def for_levels(cls, alpha, n, k_min=1):
        """Every k >= k_min with N_k < n, plus the first N_k >= n."""
        ks = []
        k = k_min

        while k <= SCHEDULE_K_MAX:
            ks.append(k)

            if cluster_size(alpha, k) >= n:
                break

            k += 1

        return cls(alpha, ks)

    def __len__(self):
        return len(self.ks)

    def to_dict(self):
        return {'alpha': self.alpha, 'k': self.ks, 'N': self.sizes}


class SupportReport(object):

    def __init__(self, schedule, lookbacks, counts, radii, dislocations,
                 truncated, censored, triangle_ok, diameter):
        self.schedule = schedule
        self.lookbacks = lookbacks
        self.counts = counts
        self.radii = radii
        self.dislocations = dislocations
        self.truncated = truncated
        self.censored = censored
        self.triangle_ok = triangle_ok
        self.diameter = diameter
        self.box = None
        self.energies = {}

    @property
    def intervals(self):
        """|J_k| = T_{N_k} - T_{N_{k+1}}."""
        return [a - b for a, b in zip(self.lookbacks, self.lookbacks[1:])]

    @property
    def realized(self):
        return [not (t or c) for t, c in zip(self.truncated, self.censored)]

    def count_exceeded(self):
        """Realized indices whose observed count N_k^* exceeds N_k."""
        return [
            i for i, (ok, count, size) in enumerate(
                zip(self.realized, self.counts, self.schedule.sizes)
            ) if ok and count > size
        ]

    def to_dict(self):
        report = {
            'schedule': self.schedule.to_dict(),
            'lookbacks': self.lookbacks,
            'observed_counts': self.counts,
            'intervals': self.intervals,
            'radii': self.radii,
            'dislocations': self.dislocations,
            'truncated': self.truncated,
            'censored': self.censored,
            'triangle_ok': self.triangle_ok,
            'diameter': self.diameter,
            'energies': {
                str(a): e.to_dict() for a, e in self.energies.items()
            }
        }

        if self.box is not None:
            report['box_counting'] = self.box.to_dict()

        return report


def _max_distance(a, b):
    if a.size == 0:
        return 0.0

    return float(np.sqrt(((a - b) ** 2).sum(axis=1)).max())


def support_metrics(record, schedule):
    """R_m and D_k of one replica along the schedule's lookback times."""
    final = record.positions
    anchors = [record.anchor(size) for size in schedule.sizes]
    ancestors = [anchor.ancestors() for anchor in anchors]
    radii = [_max_distance(final, a) for a in ancestors]
    dislocations = [
        _max_distance(a, b) for a, b in zip(ancestors, ancestors[1:])
    ]
    triangle_ok = True

    for i in range(len(radii) - 1):
        chain = sum(dislocations[i:]) + radii[-1]

        if radii[i] > chain * (1.0 + TRIANGLE_RTOL) + 1e-15:
            triangle_ok = False
            lfv_common.logit({
                'level': 'WARNING',
                'message': f'R at k={schedule.ks[i]} is {radii[i]!r}, above'
                           f' its dislocation chain {chain!r}'
            })

    return SupportReport(
        schedule,
        [a.lookback for a in anchors],
        [a.count for a in anchors],
        radii,
        dislocations,
        [a.truncated for a in anchors],
        [a.censored for a in anchors],
        triangle_ok,
        support_diameter(final)
    )


def support_diameter(points):
    """Largest pairwise distance, taken over convex hull vertices."""
    points = np.unique(np.asarray(points, dtype=float), axis=0)

    if points.shape[0] < 2:
        return 0.0
    if points.shape[1] == 1:
        return float(np.ptp(points[:, 0]))

    candidates = points

    if points.shape[0] > points.shape[1] + 1:
        try:
            hull = spatial.ConvexHull(points, qhull_options='QJ')
            candidates = points[hull.vertices]
        except spatial.QhullError:
            candidates = points

    return float(spatial.distance.pdist(candidates).max())


def c_delta(delta):
    """C(δ) = 1/(1 - 2^{-(1/2 - δ)})."""
    if not 0.0 < delta < 0.5:
        _argument_error(f'δ must lie in (0, 1/2), got {delta!r}')

    return 1.0 / (1.0 - 2.0 ** -(0.5 - delta))


def radius_bound(m, delta):
    return c_delta(delta) * 2.0 ** (-m * (0.5 - delta))


class SupBound(object):

    def __init__(self, c1, c2, bound):
        self.c1 = c1
        self.c2 = c2
        self.bound = bound

    @property
    def probability(self):
        return min(1.0, self.bound)

    def to_dict(self):
        return {'C1': self.c1, 'C2': self.c2, 'bound': self.bound,
                'probability_bound': self.probability}


def brownian_sup_bound(d, t, x):
    """Reflection-principle bound on P(sup_{s<=t} |B(s)| > x) in R^d."""
    if d < 1 or not t > 0.0 or not x > 0.0:
        _argument_error(f'Need d >= 1, t > 0, x > 0; got d={d}, t={t!r},'
                        f' x={x!r}')

    c1 = math.sqrt(8.0 * d ** 3 / math.pi)
    c2 = 1.0 / (2.0 * d)

    return SupBound(c1, c2, c1 * math.sqrt(t) / x * math.exp(-c2 * x * x / t))


def brownian_sup_probability(d, t, x, paths, steps, rng, chunk=1000):
    """Discrete-time Monte Carlo estimate of the same probability and SE."""
    dt = t / steps
    exceed = 0

    for first in range(0, paths, chunk):
        size = min(chunk, paths - first)
        walk = np.cumsum(
            rng.normal(0.0, math.sqrt(dt), size=(size, steps, d)), axis=1
        )
        top = np.sqrt((walk ** 2).sum(axis=2)).max(axis=1)
        exceed += int(np.count_nonzero(top > x))

    p = exceed / paths

    return p, math.sqrt(p * (1.0 - p) / paths)


def dislocation_bound_terms(schedule, delta, d):
    """N_{k+1} C1 2^{-kδ} exp(-C2 2^{2δk}) for each k of the schedule."""
    bound = brownian_sup_bound(d, 1.0, 1.0)
    terms = []

    for k in schedule.ks:
        upper = cluster_size(schedule.alpha, k + 1)
        terms.append(upper * bound.c1 * 2.0 ** (-k * delta)
                     * math.exp(-bound.c2 * 2.0 ** (2.0 * delta * k)))

    return terms


class DimensionBounds(object):

    def __init__(self, lower, upper):
        self.lower = lower
        self.upper = upper

    def contains(self, value, tolerance=0.0):
        low = -math.inf if self.lower is None else self.lower - tolerance

        return low <= value <= self.upper + tolerance

    def to_dict(self):
        return {'lower': self.lower, 'upper': self.upper}


def dimension_bounds(alpha, d):
    """[2, min(2/α, d)] for d >= 2; only the upper bound below that."""
    upper = float(d) if alpha is None else min(2.0 / alpha, float(d))

    return DimensionBounds(2.0 if d >= 2 else None, upper)


class BoxCount(object):

    def __init__(self, scales, counts, slope, intercept, stderr, residual):
        self.scales = scales
        self.counts = counts
        self.slope = slope
        self.intercept = intercept
        self.stderr = stderr
        self.residual = residual

    @property
    def band(self):
        return (self.slope - 2.0 * self.stderr, self.slope + 2.0 * self.stderr)

    def rows(self):
        return list(zip(self.scales, self.counts))

    def to_dict(self):
        return {
            'scales': self.scales,
            'counts': self.counts,
            'slope': self.slope,
            'band': list(self.band),
            'residual': self.residual
        }


def _box_count(points, corner, scale):
    cells = np.floor((points - corner) / scale).astype(np.int64)

    return int(np.unique(cells, axis=0).shape[0])


def default_scales(points, fill=BOX_FILL, max_levels=BOX_MAX_LEVELS):
    """
    Halving scales from the bounding box down to the finest scale whose
    occupied-box count stays at most fill · N; never fewer than two.
    """
    points = np.asarray(points, dtype=float)

    if points.ndim == 1:
        points = points.reshape(-1, 1)

    side = float(np.max(np.ptp(points, axis=0))) if len(points) else 0.0
    # The far edge falls inside the last box.
    side = side * (1.0 + 1e-9) if side > 0.0 else 1.0
    corner = points.min(axis=0) if len(points) else 0.0
    limit = fill * len(points)
    scales = []

    for level in range(1, max_levels + 1):
        scale = side * 2.0 ** -level

        if len(scales) >= 2 and _box_count(points, corner, scale) > limit:
            break

        scales.append(scale)

    return scales


def box_counting_dim(points, scales):
    """Slope of log occupied-box count against log(1/scale)."""
    scales = [float(s) for s in scales]

    if len(scales) < 2 or any(s <= 0.0 for s in scales) or any(
            a <= b for a, b in zip(scales, scales[1:])):
        _argument_error('Box counting needs two or more positive, strictly'
                        f' decreasing scales: {scales}')

    points = np.asarray(points, dtype=float)

    if points.ndim == 1:
        points = points.reshape(-1, 1)

    corner = points.min(axis=0)
    counts = []

    for scale in scales:
        counts.append(_box_count(points, corner, scale))

    x = np.log(1.0 / np.asarray(scales))
    y = np.log(np.asarray(counts, dtype=float))

    if np.all(y == y[0]):
        return BoxCount(scales, counts, 0.0, float(y[0]), 0.0, 0.0)

    fit = stats.linregress(x, y)
    residual = float(np.max(np.abs(y - (fit.slope * x + fit.intercept))))

    return BoxCount(scales, counts, float(fit.slope), float(fit.intercept),
                    float(fit.stderr), residual)


class EnergyResult(object):

    def __init__(self, exponent, value, coincident, pairs,
                 sampling_error=0.0, subsampled=False):
        self.exponent = exponent
        self.value = value
        self.coincident = coincident
        self.pairs = pairs
        self.sampling_error = sampling_error
        self.subsampled = subsampled

    @property
    def infinite(self):
        return math.isinf(self.value)

    def to_dict(self):
        return {
            'a': self.exponent,
            'value': self.value,
            'coincidence_fraction': self.coincident,
            'pairs': self.pairs,
            'sampling_error': self.sampling_error,
            'subsampled': self.subsampled,
            'infinite': self.infinite
        }


def _pair_energy(points, a):
    total = 0.0
    distinct = 0
    coincident = 0
    count = points.shape[0]

    for first in range(0, count, ENERGY_CHUNK):
        block = points[first:first + ENERGY_CHUNK]
        dist = spatial.distance.cdist(block, points[first:])
        rows = np.arange(block.shape[0])[:, None]
        cols = np.arange(dist.shape[1])[None, :]
        upper = cols > rows
        values = dist[upper]
        zero = values == 0.0
        coincident += int(np.count_nonzero(zero))
        distinct += int(values.size - np.count_nonzero(zero))
        total += float(np.sum(values[~zero] ** -a))

    return total, distinct, coincident


def energy_integral(points, a, rng=None, max_points=ENERGY_MAX_POINTS):
    """Mean of |x - y|^{-a} over distinct unordered pairs at distinct sites."""
    if not a > 0.0:
        _argument_error(f'Energy exponent must be positive, got {a!r}')

    points = np.asarray(points, dtype=float)

    if points.ndim == 1:
        points = points.reshape(-1, 1)

    subsampled = points.shape[0] > max_points
    error = 0.0

    if subsampled:
        rng = rng if rng is not None else np.random.default_rng(0)
        chosen = rng.choice(points.shape[0], size=max_points, replace=False)
        points = points[chosen]
        groups = np.array_split(points, ENERGY_GROUPS)
        means = []

        for group in groups:
            total, distinct, _ = _pair_energy(group, a)

            if distinct:
                means.append(total / distinct)

        if len(means) > 1:
            error = float(np.std(means, ddof=1) / math.sqrt(len(means)))

    total, distinct, coincident = _pair_energy(points, a)
    pairs = distinct + coincident
    fraction = coincident / pairs if pairs else 0.0

    if distinct == 0:
        return EnergyResult(a, math.inf, fraction, 0, error, subsampled)

    return EnergyResult(a, total / distinct, fraction, distinct, error,
                        subsampled)


class GaussianTest(object):

    """φ(x) = amplitude · exp(-|x - center|^2 / (2 variance))."""

    def __init__(self, center, variance, amplitude=1.0):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.variance = float(variance)
        self.amplitude = float(amplitude)

    @classmethod
    def from_spec(cls, spec, d):
        if isinstance(spec, GaussianTest):
            return spec
        if not isinstance(spec, dict) or set(spec) - {'center', 'width'}:
            lfv_common.logit(
                {
                    'level': 'EXCEPTION',
                    'message': f'Unsupported test function {spec!r}: only'
                               ' Gaussian {center, width} specs'
                },
                exception=lfv_exceptions.UnsupportedMeasure
            )

        width = float(spec.get('width', 1.0))
        center = spec.get('center')
        center = np.zeros(d) if center is None else np.asarray(center, float)

        if width <= 0.0 or center.shape != (d,):
            _argument_error(f'Gaussian test function needs width > 0 and a'
                            f' center in R^{d}, got {spec!r}')

        return cls(center, width ** 2)

    @property
    def d(self):
        return self.center.size

    def __call__(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.d)
        sq = ((points - self.center) ** 2).sum(axis=1)

        return self.amplitude * np.exp(-sq / (2.0 * self.variance))

    def heat(self, s):
        """P_s φ, still Gaussian."""
        variance = self.variance + s

        return GaussianTest(
            self.center, variance,
            self.amplitude * (self.variance / variance) ** (self.d / 2.0)
        )

    def times(self, other):
        variance = 1.0 / (1.0 / self.variance + 1.0 / other.variance)
        center = variance * (self.center / self.variance
                             + other.center / other.variance)
        gap = float(((self.center - other.center) ** 2).sum())
        amplitude = self.amplitude * other.amplitude * math.exp(
            -gap / (2.0 * (self.variance + other.variance))
        )

        return GaussianTest(center, variance, amplitude)

    def at_origin(self):
        return float(self(np.zeros(self.d))[0])


def second_moment_analytic(measure, T, phi1, phi2):
    """
    E<X_T,φ1><X_T,φ2> from X_0 = δ_0: e^{-rT} P_Tφ1(0) P_Tφ2(0) plus
    ∫_0^T r e^{-rs} P_{T-s}(P_sφ1 · P_sφ2)(0) ds with r = Λ([0, 1]).
    """
    r = measure.total_mass
    value = math.exp(-r * T) * phi1.heat(T).at_origin() \
        * phi2.heat(T).at_origin()

    if r == 0.0 or T == 0.0:
        return value

    def integrand(s):
        joint = phi1.heat(s).times(phi2.heat(s)).heat(T - s)

        return r * math.exp(-r * s) * joint.at_origin()

    part, _ = integrate.quad(integrand, 0.0, T, epsrel=MOMENT_RTOL,
                             epsabs=0.0)

    return value + part


class MomentCheck(object):

    def __init__(self, analytic, estimate, standard_error, replicas, n):
        self.analytic = analytic
        self.estimate = estimate
        self.standard_error = standard_error
        self.replicas = replicas
        self.n = n

    @property
    def z_score(self):
        if self.standard_error == 0.0:
            return 0.0 if self.estimate == self.analytic else math.inf

        return (self.estimate - self.analytic) / self.standard_error

    def to_dict(self):
        return {
            'analytic': self.analytic,
            'mc_estimate': self.estimate,
            'standard_error': self.standard_error,
            'z_score': self.z_score,
            'replicas': self.replicas,
            'n': self.n
        }


def _moment_replica(payload, rng, index):
    measure, n, d, T, phi1, phi2, method = payload
    positions = lfv_lookdown.sample_positions(measure, n, d, T, None, rng,
                                              method)

    return float(phi1(positions).mean() * phi2(positions).mean())


def second_moment_check(measure, T, phi1, phi2, replicas, seed, n, d,
                        workers=1, method='auto'):
    """Monte Carlo of <X̂_n(T),φ1><X̂_n(T),φ2> against the analytic value."""
    lfv_lookdown.check_measure(measure)

    if replicas < 2:
        _argument_error(f'Need at least two replicas, got {replicas}')

    phi1 = GaussianTest.from_spec(phi1, d)
    phi2 = GaussianTest.from_spec(phi2, d)
    analytic = second_moment_analytic(measure, T, phi1, phi2)
    values = lfv_common.run_replicas(
        _moment_replica, (measure, n, d, T, phi1, phi2, method), seed,
        replicas, workers
    )
    mean, se = lfv_common.mean_and_se(values)

    return MomentCheck(analytic, mean, se, replicas, n)


def nested_convergence(positions, phi, levels=None):
    """<X̂_{n'},φ> over the nested prefixes n' = n, n/2, n/4, ..."""
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]

    if levels is None:
        levels = []
        size = n

        while size >= 1:
            levels.append(size)
            size //= 2

    values = phi(positions)

    return {int(m): float(values[:m].mean()) for m in levels if 1 <= m <= n}
