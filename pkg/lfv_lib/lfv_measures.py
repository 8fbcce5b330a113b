# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Finite measures on [0, 1] and the coalescence-rate families they induce."""
import functools
import math

import numpy as np
from scipy import integrate, special

import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions

QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-15
QUAD_ACCEPT_RTOL = 1e-8
QUAD_ROW_LIMIT = 100
EXACT_BINOMIAL_LIMIT = 60
SERIES_SWITCH = 1e-2
CONSISTENCY_TOL = 1e-8
FIT_RESIDUAL_MAX = 0.1
DEFAULT_M_GRID = (4, 8, 16, 32, 64, 128)
DEFAULT_B_CAP = 2000
PARTIAL_SUM_GRID = (10, 100, 500, 1000, 2000)

COMES_DOWN = 'comes_down'
STAYS_INFINITE = 'stays_infinite'
NEITHER = 'neither'
INCONCLUSIVE = 'inconclusive'


def _argument_error(message):
    lfv_common.logit(
        {
            'level': 'EXCEPTION',
            'message': message
        },
        exception=lfv_exceptions.ArgumentError
    )


def _quad(func, lo, hi, points=None, weight=None, wvar=None,
          epsabs=QUAD_ATOL):
    """Adaptive quadrature that refuses to return an unconverged value."""
    if hi <= lo:
        return 0.0, 0.0

    kwargs = {}

    if weight is not None:
        kwargs['weight'] = weight
        kwargs['wvar'] = wvar
    elif points is not None:
        inner = [p for p in points if lo < p < hi]

        if inner:
            kwargs['points'] = inner

    result = integrate.quad(
        func, lo, hi, epsabs=epsabs, epsrel=QUAD_RTOL, limit=500,
        full_output=1, **kwargs
    )
    value, abserr = result[0], result[1]

    if len(result) > 3 and abserr > max(QUAD_ACCEPT_RTOL * abs(value),
                                        epsabs):
        achieved = abserr / abs(value) if value else math.inf
        raise lfv_exceptions.NumericError(
            f'Quadrature on [{lo!r}, {hi!r}] did not converge: achieved'
            f' relative tolerance {achieved:.3g}',
            achieved=achieved
        )

    return value, abserr


def binomial(n, k):
    """Exact C(n, k) as a Python integer."""
    return special.comb(n, k, exact=True)


def log_binomial(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)

    return (special.gammaln(n + 1.0) - special.gammaln(k + 1.0)
            - special.gammaln(n - k + 1.0))


def _kernel(b, k):
    """x^{k-2}(1-x)^{b-k}, the integrand of λ_{b,k}."""
    def func(x):
        if x <= 0.0:
            return 1.0 if k == 2 else 0.0
        if x >= 1.0:
            return 1.0 if k == b else 0.0

        return math.exp((k - 2) * math.log(x) + (b - k) * math.log1p(-x))

    return func


def _binomial_series(b, x, weighted):
    # sum_{k>=2} (-1)^k w_k C(b,k) x^{k-2} with w_k = k-1 or 1; bx is small
    term = b * (b - 1) / 2.0
    total = term

    for k in range(2, min(b, 24)):
        term *= -(b - k) * x / (k + 1.0)
        total += term * (k if weighted else 1.0)

    return total


def _pair_kernel(b):
    """P(K >= 2)/x^2 for K ~ Bin(b, x)."""
    def func(x):
        if x <= 0.0:
            return b * (b - 1) / 2.0
        if x >= 1.0:
            return 1.0
        if b * x < SERIES_SWITCH:
            return _binomial_series(b, x, True)

        y = b * math.log1p(-x)
        below = b * x * math.exp(y - math.log1p(-x))

        return (-math.expm1(y) - below) / (x * x)

    return func


def _decrease_kernel(b):
    """E[(K - 1)^+]/x^2 for K ~ Bin(b, x)."""
    def func(x):
        if x <= 0.0:
            return b * (b - 1) / 2.0
        if x >= 1.0:
            return float(b - 1)
        if b * x < SERIES_SWITCH:
            return _binomial_series(b, x, False)

        return (b * x + math.expm1(b * math.log1p(-x))) / (x * x)

    return func


def _excess_kernel(b, m):
    """E[(K - 1 - (b - m))^+]/x^2, the part of γ_b that γ_{b,m} caps."""
    j = np.arange(1, m)
    k = b - m + 1 + j
    log_c = log_binomial(b, k)

    def func(x):
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return float(m - 1)

        logp = log_c + (k - 2) * math.log(x) + (b - k) * math.log1p(-x)

        return float(np.dot(j, np.exp(logp)))

    return func


@functools.lru_cache(maxsize=1 << 16)
def _quadrature_lambda_bk(density, b, k):
    scale = min(max((k - 1.0) / b, 1.0 / b), 1.0)
    value, _ = density.integrate(_kernel(b, k), scale)

    return max(value, 0.0)


class _Density(object):

    kind = None

    def key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.key() == other.key()

    def __hash__(self):
        return hash((self.kind,) + self.key())

    def __repr__(self):
        return f'{type(self).__name__}{self.key()}'

    def lambda_bk(self, b, k):
        return _quadrature_lambda_bk(self, b, k)

    def lambda_row(self, b):
        if b <= QUAD_ROW_LIMIT:
            return np.array(
                [self.lambda_bk(b, k) for k in range(2, b + 1)]
            )

        return self.closed_row(b)


class BetaDensity(_Density):

    """mass · x^{1-β}(1-x)^{β-1} / B(2-β, β) on (0, 1)."""

    kind = 'beta'

    def __init__(self, beta, mass=1.0):
        if not 0.0 < beta < 2.0:
            _argument_error(f'beta requires 0 < β < 2, got {beta!r}')
        if not (math.isfinite(mass) and mass > 0.0):
            _argument_error(f'beta mass must be positive, got {mass!r}')

        self.beta = float(beta)
        self.mass_value = float(mass)
        self._log_norm = special.betaln(2.0 - self.beta, self.beta)

    def key(self):
        return (self.beta, self.mass_value)

    def mass(self):
        return self.mass_value

    def spec(self, in_mix=False):
        if in_mix:
            if self.mass_value == 1.0:
                return f'beta={self.beta!r}'

            return f'beta={self.beta!r}/{self.mass_value!r}'
        if self.mass_value == 1.0:
            return f'beta:{self.beta!r}'

        return f'beta:{self.beta!r},mass={self.mass_value!r}'

    def lambda_bk(self, b, k):
        return self.mass_value * math.exp(
            special.betaln(k - self.beta, b - k + self.beta) - self._log_norm
        )

    def lambda_row(self, b):
        return self.closed_row(b)

    def closed_row(self, b):
        k = np.arange(2, b + 1, dtype=float)

        return self.mass_value * np.exp(
            special.betaln(k - self.beta, b - k + self.beta) - self._log_norm
        )

    def integrate(self, func, scale=None):
        """∫ func dΛ with both endpoint singularities taken as weights."""
        split = min(max(scale or 0.5, 1e-8), 0.5)
        beta = self.beta
        lo, err_lo = _quad(
            lambda x: func(x) * (1.0 - x) ** (beta - 1.0), 0.0, split,
            weight='alg', wvar=(1.0 - beta, 0.0)
        )
        hi, err_hi = _quad(
            lambda x: func(x) * x ** (1.0 - beta), split, 1.0,
            weight='alg', wvar=(0.0, beta - 1.0)
        )
        norm = self.mass_value / math.exp(self._log_norm)

        return norm * (lo + hi), norm * (err_lo + err_hi)


class PowerLawDensity(_Density):

    """c · x^{-γ} on [0, ε] and zero elsewhere."""

    kind = 'powerlaw'

    def __init__(self, c, gamma, eps):
        if not (math.isfinite(c) and c > 0.0):
            _argument_error(f'powerlaw requires c > 0, got {c!r}')
        if not 0.0 < gamma < 1.0:
            _argument_error(f'powerlaw requires 0 < γ < 1, got {gamma!r}')
        if not 0.0 < eps < 1.0:
            _argument_error(f'powerlaw requires 0 < ε < 1, got {eps!r}')

        self.c = float(c)
        self.gamma = float(gamma)
        self.eps = float(eps)

    def key(self):
        return (self.c, self.gamma, self.eps)

    def mass(self):
        return self.c * self.eps ** (1.0 - self.gamma) / (1.0 - self.gamma)

    def spec(self, in_mix=False):
        if in_mix:
            return f'powerlaw={self.c!r}/{self.gamma!r}/{self.eps!r}'

        return (f'powerlaw:c={self.c!r},gamma={self.gamma!r},'
                f'eps={self.eps!r}')

    def closed_row(self, b):
        k = np.arange(2, b + 1, dtype=float)
        a = k - 1.0 - self.gamma
        rest = b - k + 1.0

        with np.errstate(divide='ignore'):
            log_row = (math.log(self.c) + special.betaln(a, rest)
                       + np.log(special.betainc(a, rest, self.eps)))

        return np.exp(log_row)

    def integrate(self, func, scale=None):
        # x = u^{1/(1-γ)} turns c x^{-γ} dx into c/(1-γ) du
        power = 1.0 / (1.0 - self.gamma)
        top = self.eps ** (1.0 - self.gamma)
        points = None

        if scale is not None and scale < self.eps:
            points = [scale ** (1.0 - self.gamma)]

        value, abserr = _quad(
            lambda u: func(u ** power), 0.0, top, points=points
        )

        return self.c * power * value, self.c * power * abserr


class TableDensity(_Density):

    """Piecewise-constant density: values[i] on [edges[i], edges[i+1])."""

    kind = 'table'

    def __init__(self, edges, values):
        edges = tuple(float(e) for e in edges)
        values = tuple(float(v) for v in values)

        if len(edges) < 2 or len(values) != len(edges) - 1:
            _argument_error(
                'table needs n+1 edges for n values,'
                f' got {len(edges)} edges and {len(values)} values'
            )
        if edges[0] < 0.0 or edges[-1] > 1.0 or any(
                lo >= hi for lo, hi in zip(edges, edges[1:])):
            _argument_error(
                f'table edges must increase strictly inside [0, 1]: {edges}'
            )
        if any(not (math.isfinite(v) and v >= 0.0) for v in values):
            _argument_error(f'table values must be nonnegative: {values}')

        self.edges = edges
        self.values = values

    def key(self):
        return (self.edges, self.values)

    def mass(self):
        return sum(
            v * (hi - lo)
            for v, lo, hi in zip(self.values, self.edges, self.edges[1:])
        )

    def spec(self, in_mix=False):
        edges = ';'.join(repr(e) for e in self.edges)
        values = ';'.join(repr(v) for v in self.values)

        if in_mix:
            return f'table={edges}/{values}'

        return f'table:edges={edges},values={values}'

    def closed_row(self, b):
        k = np.arange(2, b + 1, dtype=float)
        a = k - 1.0
        rest = b - k + 1.0
        row = np.zeros(b - 1)

        for v, lo, hi in zip(self.values, self.edges, self.edges[1:]):
            if v == 0.0:
                continue

            piece = special.betainc(a, rest, hi) - special.betainc(a, rest, lo)
            row += v * np.maximum(piece, 0.0)

        return row * np.exp(special.betaln(a, rest))

    def integrate(self, func, scale=None):
        value = abserr = 0.0
        points = [scale] if scale is not None else None

        for v, lo, hi in zip(self.values, self.edges, self.edges[1:]):
            if v == 0.0:
                continue

            part, err = _quad(func, lo, hi, points=points)
            value += v * part
            abserr += v * err

        return value, abserr


class LambdaMeasure(object):

    """
    A finite measure Λ on [0, 1]: an atom at 0 (Kingman component), an
    atom at 1 and an optional density on (0, 1).
    """

    def __init__(self, atom0=0.0, atom1=0.0, density=None):
        for name, value in (('atom0', atom0), ('atom1', atom1)):
            if not (isinstance(value, (int, float, np.integer))
                    and math.isfinite(value)
                    and value >= 0.0):
                _argument_error(f'{name} must be a nonnegative number,'
                                f' got {value!r}')

        self.atom0 = float(atom0)
        self.atom1 = float(atom1)
        self.density = density
        self.total_mass = self.atom0 + self.atom1 + (
            density.mass() if density is not None else 0.0
        )

    @property
    def is_zero(self):
        return self.total_mass == 0.0

    @property
    def is_kingman(self):
        """Only pairwise mergers: an atom at 0 and nothing else."""
        return self.density is None and self.atom1 == 0.0 \
            and self.atom0 > 0.0

    def key(self):
        return (
            self.atom0, self.atom1,
            self.density.kind if self.density is not None else None,
            self.density.key() if self.density is not None else None
        )

    def __eq__(self, other):
        return isinstance(other, LambdaMeasure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f'LambdaMeasure({self.spec()})'

    def spec(self):
        if self.is_zero:
            return 'zero'

        atoms = [
            (name, mass) for name, mass in
            (('delta0', self.atom0), ('delta1', self.atom1)) if mass > 0.0
        ]

        if self.density is None and len(atoms) == 1:
            name, mass = atoms[0]

            return f'{name}:{mass!r}'
        if self.density is not None and not atoms:
            return self.density.spec()

        parts = [f'{name}={mass!r}' for name, mass in atoms]

        if self.density is not None:
            parts.append(self.density.spec(in_mix=True))

        return 'mix:' + '+'.join(parts)


def _float(text, name):
    try:
        return float(text)
    except ValueError:
        raise lfv_exceptions.ArgumentError(
            f'{name}: "{text}" is not a number'
        )


def _options(body):
    options = {}

    for item in body.split(','):
        if not item.strip():
            continue

        key, sep, value = item.partition('=')

        if not sep:
            raise lfv_exceptions.ArgumentError(
                f'expected key=value, got "{item}"'
            )

        options[key.strip().lower()] = value.strip()

    return options


def _number_list(text, name):
    return [_float(v, name) for v in text.split(';') if v.strip()]


def _mix_density(name, value):
    fields = value.split('/')

    if name == 'beta':
        mass = _float(fields[1], 'beta mass') if len(fields) > 1 else 1.0

        return BetaDensity(_float(fields[0], 'beta'), mass)
    if name == 'powerlaw':
        if len(fields) != 3:
            raise lfv_exceptions.ArgumentError(
                'powerlaw in a mix is written powerlaw=<c>/<gamma>/<eps>'
            )

        return PowerLawDensity(
            *(_float(f, 'powerlaw') for f in fields)
        )
    if name == 'table':
        if len(fields) != 2:
            raise lfv_exceptions.ArgumentError(
                'table in a mix is written table=<edges>/<values>'
            )

        return TableDensity(
            _number_list(fields[0], 'table edges'),
            _number_list(fields[1], 'table values')
        )

    raise lfv_exceptions.ArgumentError(f'unknown mix component "{name}"')


def parse_measure(text):
    """
    Parse a compact measure string.

    Accepted forms: zero, delta0[:mass], delta1[:mass], beta:<β>[,mass=<m>],
    powerlaw:c=..,gamma=..,eps=.., table:edges=e0;e1;..,values=v0;..
    and mix:<part>+<part> where a part is delta0=<m>, delta1=<m>,
    beta=<β>[/<m>], powerlaw=<c>/<γ>/<ε> or table=<edges>/<values>.
    """
    if isinstance(text, LambdaMeasure):
        return text
    if isinstance(text, dict):
        return measure_from_dict(text)
    if not isinstance(text, str) or not text.strip():
        _argument_error(f'Invalid measure {text!r}')

    kind, _, body = text.strip().partition(':')
    kind = kind.strip().lower()
    body = body.strip()

    try:
        if kind == 'zero':
            return LambdaMeasure()
        if kind == 'delta0':
            return LambdaMeasure(
                atom0=_float(body, 'delta0') if body else 1.0
            )
        if kind == 'delta1':
            return LambdaMeasure(
                atom1=_float(body, 'delta1') if body else 1.0
            )
        if kind == 'beta':
            head, _, rest = body.partition(',')
            options = _options(rest)
            mass = _float(options.pop('mass'), 'mass') \
                if 'mass' in options else 1.0

            if options:
                raise lfv_exceptions.ArgumentError(
                    f'unknown beta options {sorted(options)}'
                )

            return LambdaMeasure(density=BetaDensity(_float(head, 'beta'),
                                                     mass))
        if kind == 'powerlaw':
            options = _options(body)
            missing = {'c', 'gamma', 'eps'} - set(options)
            extra = set(options) - {'c', 'gamma', 'eps'}

            if missing or extra:
                raise lfv_exceptions.ArgumentError(
                    'powerlaw needs exactly c, gamma and eps'
                )

            return LambdaMeasure(density=PowerLawDensity(
                _float(options['c'], 'c'),
                _float(options['gamma'], 'gamma'),
                _float(options['eps'], 'eps')
            ))
        if kind == 'table':
            options = _options(body)

            if set(options) != {'edges', 'values'}:
                raise lfv_exceptions.ArgumentError(
                    'table needs exactly edges and values'
                )

            return LambdaMeasure(density=TableDensity(
                _number_list(options['edges'], 'edges'),
                _number_list(options['values'], 'values')
            ))
        if kind == 'mix':
            atoms = {'delta0': 0.0, 'delta1': 0.0}
            density = None

            for part in body.split('+'):
                name, sep, value = part.partition('=')
                name = name.strip().lower()

                if not sep:
                    raise lfv_exceptions.ArgumentError(
                        f'expected name=value in mix, got "{part}"'
                    )
                if name in atoms:
                    atoms[name] += _float(value, name)
                elif density is not None:
                    raise lfv_exceptions.ArgumentError(
                        'a mix holds at most one density part'
                    )
                else:
                    density = _mix_density(name, value.strip())

            return LambdaMeasure(atoms['delta0'], atoms['delta1'], density)
    except lfv_exceptions.ArgumentError as err:
        _argument_error(f'Invalid measure "{text}": {err}')

    _argument_error(f'Invalid measure "{text}": unknown family "{kind}"')


def measure_from_dict(obj):
    """Build a measure from its JSON form."""
    allowed = {'atom0', 'atom1', 'density'}
    unknown = sorted(set(obj) - allowed)

    if unknown:
        _argument_error(f'Unknown measure keys: {", ".join(unknown)}')

    density = obj.get('density')

    if density is not None:
        density = dict(density)
        kind = density.pop('kind', None)

        try:
            if kind == 'beta':
                density = BetaDensity(**density)
            elif kind == 'powerlaw':
                density = PowerLawDensity(**density)
            elif kind == 'table':
                density = TableDensity(**density)
            else:
                _argument_error(f'Unknown density kind {kind!r}')
        except TypeError as err:
            _argument_error(f'Invalid {kind} density: {err}')

    return LambdaMeasure(
        obj.get('atom0', 0.0), obj.get('atom1', 0.0), density
    )


def _check_bk(b, k):
    if not (isinstance(b, (int, np.integer))
            and isinstance(k, (int, np.integer))):
        _argument_error(f'b and k must be integers, got b={b!r}, k={k!r}')
    if not 2 <= k <= b:
        _argument_error(f'λ_(b,k) needs 2 <= k <= b, got b={b}, k={k}')


def lambda_bk(measure, b, k):
    """Rate at which a given k-tuple of b blocks merges."""
    _check_bk(b, k)
    rate = 0.0

    if k == 2:
        rate += measure.atom0
    if k == b:
        rate += measure.atom1
    if measure.density is not None:
        rate += measure.density.lambda_bk(int(b), int(k))

    return rate


def lambda_row(measure, b):
    """λ_{b,k} for k = 2..b."""
    if b < 2:
        _argument_error(f'b must be at least 2, got {b}')

    if measure.density is None:
        row = np.zeros(b - 1)
    else:
        row = np.array(measure.density.lambda_row(int(b)), dtype=float)

    row[0] += measure.atom0
    row[-1] += measure.atom1

    return row


def binomial_terms(b, row):
    """C(b,k)·λ_{b,k} for k = 2..b, weights taken in log space past 60."""
    k = np.arange(2, b + 1)

    if b <= EXACT_BINOMIAL_LIMIT:
        weights = np.array([float(binomial(b, j)) for j in k])

        return weights * row

    with np.errstate(divide='ignore', over='ignore'):
        terms = np.exp(log_binomial(b, k) + np.log(row))

    if not np.all(np.isfinite(terms)):
        raise lfv_exceptions.NumericError(
            f'Binomial-weighted rates overflow at b={b}'
        )

    return terms


def rate_terms(measure, b):
    """Total rate of a size-k merger among b blocks, for k = 2..b."""
    if measure.density is None:
        terms = np.zeros(b - 1)
        terms[0] += measure.atom0 * float(binomial(b, 2))
        terms[-1] += measure.atom1

        return terms

    return binomial_terms(b, lambda_row(measure, b))


def decrease_rates(measure, b, m_values=()):
    """λ_b, γ_b and {m: γ_{b,m}} from the binomial-weighted rate row."""
    terms = rate_terms(measure, b)
    drop = np.arange(1, b)

    return (
        float(terms.sum()),
        float(np.dot(drop, terms)),
        {
            m: float(np.dot(np.minimum(drop, b - m), terms))
            for m in m_values if 1 <= m < b
        }
    )


def decrease_rates_by_quadrature(measure, b, m_values=()):
    """
    Oracle for decrease_rates built on the integral identities
    λ_b = ∫P(K>=2)x^-2 Λ(dx) and γ_b = ∫E[(K-1)^+]x^-2 Λ(dx), K ~ Bin(b,x).
    """
    pairs = float(binomial(b, 2))
    lam = measure.atom0 * pairs + measure.atom1
    gam = measure.atom0 * pairs + measure.atom1 * (b - 1)
    capped = {
        m: measure.atom0 * pairs + measure.atom1 * (b - m)
        for m in m_values if 1 <= m < b
    }
    density = measure.density

    if density is not None:
        scale = 1.0 / b
        lam += density.integrate(_pair_kernel(b), scale)[0]
        decrease = density.integrate(_decrease_kernel(b), scale)[0]
        gam += decrease

        for m in capped:
            excess = 0.0

            if m > 1:
                excess = density.integrate(_excess_kernel(b, m), scale)[0]

            capped[m] += decrease - excess

    return lam, gam, capped


class RateTable(object):

    HEADER = ('b', 'm', 'k', 'lambda_bk', 'lambda_b', 'gamma_b', 'gamma_bm')

    def __init__(self, b, m, lambda_bk, lambda_b, gamma_b, gamma_bm, mu_bk):
        self.b = b
        self.m = m
        self.lambda_bk = lambda_bk
        self.lambda_b = lambda_b
        self.gamma_b = gamma_b
        self.gamma_bm = gamma_bm
        self.mu_bk = mu_bk

    def mu(self, target):
        """μ_{b,target}: rate of jumping from b to target blocks."""
        if not self.m <= target <= self.b - 1:
            _argument_error(
                f'μ_(b,j) is defined for {self.m} <= j <= {self.b - 1}'
            )

        return float(self.mu_bk[target - self.m])

    def rows(self):
        for k, rate in zip(range(2, self.b + 1), self.lambda_bk):
            yield (self.b, self.m, k, float(rate), self.lambda_b, self.gamma_b,
                   self.gamma_bm)

    def to_dict(self):
        return {
            'b': self.b,
            'm': self.m,
            'lambda_b': self.lambda_b,
            'gamma_b': self.gamma_b,
            'gamma_bm': self.gamma_bm,
            'mu': {
                str(j): float(v)
                for j, v in zip(range(self.m, self.b), self.mu_bk)
            }
        }


def rate_summary(measure, b, m):
    if not (isinstance(b, (int, np.integer)) and b >= 3):
        _argument_error(f'rate_summary needs an integer b >= 3, got {b!r}')
    if not (isinstance(m, (int, np.integer)) and 2 <= m <= b - 1):
        _argument_error(f'rate_summary needs 2 <= m <= b - 1, got m={m!r}')

    row = lambda_row(measure, b)
    terms = rate_terms(measure, b)
    drop = np.arange(1, b)
    mu = np.empty(b - m)
    mu[0] = terms[b - m - 1:].sum()
    targets = np.arange(m + 1, b)
    mu[1:] = terms[b - targets - 1]

    return RateTable(
        b, m, row,
        float(terms.sum()),
        float(np.dot(drop, terms)),
        float(np.dot(np.minimum(drop, b - m), terms)),
        mu
    )


class ConsistencyReport(object):

    def __init__(self, b_max, max_residual, worst):
        self.b_max = b_max
        self.max_residual = max_residual
        self.worst = worst
        self.passed = max_residual <= CONSISTENCY_TOL

    def to_dict(self):
        return {
            'b_max': self.b_max,
            'max_residual': self.max_residual,
            'worst': list(self.worst) if self.worst else None,
            'passed': self.passed
        }


def check_consistency(measure, b_max):
    """Max of |λ_{b,k} - λ_{b+1,k} - λ_{b+1,k+1}| / max(1, λ_{b,k})."""
    if b_max < 2:
        _argument_error(f'b_max must be at least 2, got {b_max}')

    worst = 0.0
    where = None
    row = lambda_row(measure, 2)

    for b in range(2, b_max + 1):
        upper = lambda_row(measure, b + 1)
        residual = np.abs(row - upper[:-1] - upper[1:]) \
            / np.maximum(1.0, row)
        i = int(np.argmax(residual))

        if residual[i] > worst or where is None:
            worst = float(residual[i])
            where = (b, i + 2)

        row = upper

    return ConsistencyReport(b_max, worst, where)


def decrease_table(measure, b_lo, b_cap, m_values=()):
    """λ_b, γ_b and γ_{b,m} for b = b_lo..b_cap (NaN where b <= m)."""
    bs = np.arange(b_lo, b_cap + 1)

    if measure.density is None:
        pairs = bs * (bs - 1) / 2.0
        lam = measure.atom0 * pairs + measure.atom1
        gam = measure.atom0 * pairs + measure.atom1 * (bs - 1)
        capped = {
            m: np.where(bs > m,
                        measure.atom0 * pairs + measure.atom1 * (bs - m),
                        np.nan)
            for m in m_values
        }

        return bs, lam, gam, capped

    lam = np.empty(bs.size)
    gam = np.empty(bs.size)
    capped = {m: np.full(bs.size, np.nan) for m in m_values}

    for i, b in enumerate(bs):
        lam[i], gam[i], rates = decrease_rates(measure, int(b), m_values)

        for m, value in rates.items():
            capped[m][i] = value

    return bs, lam, gam, capped


class TailEstimate(object):

    def __init__(self, truncated, extrapolated, exponent, reliable):
        self.truncated = truncated
        self.extrapolated = extrapolated
        self.exponent = exponent
        self.reliable = reliable

    def to_dict(self):
        return {
            'truncated': self.truncated,
            'extrapolated': self.extrapolated,
            'decay_exponent': self.exponent,
            'reliable': self.reliable
        }


def _tail_estimate(measure, bs, terms):
    truncated = float(np.sum(terms))
    b_cap = int(bs[-1])

    if measure.is_kingman:
        return TailEstimate(
            truncated, truncated + 2.0 / (measure.atom0 * b_cap), -2.0, True
        )

    window = bs >= max(int(bs[0]), b_cap // 10)
    x, y = bs[window], terms[window]
    usable = (y > 0) & np.isfinite(y)

    if usable.sum() < 3:
        return TailEstimate(truncated, math.nan, math.nan, False)

    slope, intercept = np.polyfit(np.log(x[usable]), np.log(y[usable]), 1)

    if slope >= -1.0:
        return TailEstimate(truncated, math.inf, float(slope), False)

    tail = math.exp(intercept) * (b_cap + 0.5) ** (slope + 1.0) \
        / -(slope + 1.0)

    return TailEstimate(truncated, truncated + tail, float(slope),
                        bool(slope < -1.5))


class TailSums(object):

    def __init__(self, m, b, inv_gamma_b, inv_gamma_bm, inv_lambda_b,
                 estimates):
        self.m = m
        self.b = b
        self.inv_gamma_b = inv_gamma_b
        self.inv_gamma_bm = inv_gamma_bm
        self.inv_lambda_b = inv_lambda_b
        self.estimates = estimates

    @property
    def b_cap(self):
        return int(self.b[-1])

    def truncated(self, name):
        return self.estimates[name].truncated

    def extrapolated(self, name):
        return self.estimates[name].extrapolated

    def to_dict(self):
        return {
            'm': self.m,
            'b_cap': self.b_cap,
            'sums': {
                name: est.to_dict() for name, est in self.estimates.items()
            }
        }


def tail_table(measure, m_values, b_cap):
    if measure.is_zero:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': 'The zero measure has no coalescence:'
                           ' every γ_b is 0'
            },
            exception=lfv_exceptions.DegenerateMeasure
        )

    m_values = sorted(set(m_values))
    bs, lam, gam, capped = decrease_table(
        measure, m_values[0] + 1, b_cap, m_values
    )

    if np.any(gam <= 0.0):
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': f'Measure {measure.spec()} has γ_b = 0'
            },
            exception=lfv_exceptions.DegenerateMeasure
        )

    tails = {}

    for m in m_values:
        keep = bs > m
        b = bs[keep]
        arrays = {
            'gamma_b': 1.0 / gam[keep],
            'gamma_bm': 1.0 / capped[m][keep],
            'lambda_b': 1.0 / lam[keep]
        }
        estimates = {
            name: _tail_estimate(measure, b, terms)
            for name, terms in arrays.items()
        }
        tails[m] = TailSums(
            m, b, arrays['gamma_b'], arrays['gamma_bm'], arrays['lambda_b'],
            estimates
        )

    return tails


def tail_sums(measure, m, b_cap):
    """Σ_{b=m+1}^{b_cap} of 1/γ_b, 1/γ_{b,m}, 1/λ_b with extrapolations."""
    if not (isinstance(m, (int, np.integer)) and m >= 2 and b_cap > m):
        _argument_error(f'tail_sums needs b_cap > m >= 2, got m={m!r},'
                        f' b_cap={b_cap!r}')

    return tail_table(measure, [int(m)], int(b_cap))[int(m)]


class AlphaFit(object):

    def __init__(self, alpha, constant, residual, m_used, sums, hint=None,
                 rates='gamma_bm'):
        self.alpha = alpha
        self.constant = constant
        self.residual = residual
        self.m_used = m_used
        self.sums = sums
        self.hint = hint
        self.rates = rates

    @property
    def fitted(self):
        return self.alpha is not None

    def to_dict(self):
        return {
            'alpha': self.alpha,
            'constant': self.constant,
            'residual': self.residual,
            'm_used': list(self.m_used),
            'tail_sums': list(self.sums),
            'hint': self.hint,
            'rates': self.rates
        }


def fit_alpha(measure, m_grid, b_cap=None, rates='gamma_bm'):
    """
    Least-squares fit of log Σ_{b>m} rate^-1 = log C - α log m over the
    largest half of m_grid.
    """
    m_grid = [int(m) for m in m_grid]

    if len(m_grid) < 4 or m_grid[0] < 2 or any(
            lo >= hi for lo, hi in zip(m_grid, m_grid[1:])):
        _argument_error('m_grid must be strictly increasing, start at 2 or'
                        f' more and hold at least 4 values: {m_grid}')
    if rates not in ('gamma_bm', 'lambda_b'):
        _argument_error(f'rates must be gamma_bm or lambda_b, got {rates!r}')

    rule = _analytic_classification(measure)

    if rule is not None and rule[0] != COMES_DOWN:
        return AlphaFit(None, None, None, (), (), hint=rule[0], rates=rates)

    used = m_grid[len(m_grid) // 2:]
    b_cap = b_cap or max(DEFAULT_B_CAP, 20 * used[-1])
    tails = tail_table(measure, used, b_cap)
    sums = [tails[m].extrapolated(rates) for m in used]

    if not all(math.isfinite(s) and s > 0.0 for s in sums):
        return AlphaFit(None, None, None, used, sums, hint='diverges',
                        rates=rates)

    x = np.log(used)
    y = np.log(sums)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))

    return AlphaFit(float(-slope), float(math.exp(intercept)), residual,
                    used, sums, rates=rates)


def _analytic_classification(measure):
    if measure.is_zero:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': 'The zero measure cannot be classified'
            },
            exception=lfv_exceptions.DegenerateMeasure
        )

    if measure.atom0 > 0.0:
        return COMES_DOWN, 'analytic: Kingman component'

    density = measure.density

    if density is None:
        return NEITHER, 'analytic: atom at 1 only'
    if density.kind == 'beta':
        base = COMES_DOWN if density.beta > 1.0 else STAYS_INFINITE
    elif density.kind == 'powerlaw':
        base = COMES_DOWN
    else:
        return None

    if base == STAYS_INFINITE and measure.atom1 > 0.0:
        return NEITHER, ('analytic: stays infinite until the first'
                         ' atom-at-1 event')

    return base, f'analytic: {density.kind} family'


class CdiReport(object):

    def __init__(self, classification, partial_sums, method, fit=None):
        self.classification = classification
        self.partial_sums = partial_sums
        self.method = method
        self.fit = fit

    @property
    def alpha(self):
        return self.fit.alpha if self.fit is not None else None

    @property
    def constant(self):
        return self.fit.constant if self.fit is not None else None

    def to_dict(self):
        return {
            'classification': self.classification,
            'partial_sums': {str(k): v for k, v in self.partial_sums.items()},
            'method': self.method,
            'alpha': self.alpha,
            'constant': self.constant,
            'fit': self.fit.to_dict() if self.fit is not None else None
        }


def classify_cdi(measure, m_grid=DEFAULT_M_GRID, fit=True):
    """Coming-down-from-infinity classification plus the α fit."""
    rule = _analytic_classification(measure)
    top = PARTIAL_SUM_GRID[-1]
    bs, _, gam, _ = decrease_table(measure, 2, top)
    partial = np.cumsum(1.0 / gam)
    partial_sums = {B: float(partial[B - 2]) for B in PARTIAL_SUM_GRID}

    if rule is not None:
        classification, method = rule
    else:
        first = partial[1000 - 2] - partial[500 - 2]
        second = partial[2000 - 2] - partial[1000 - 2]
        ratio = second / first
        method = f'numeric: partial-sum increment ratio {ratio:.4f}'

        if ratio < 0.8:
            classification = COMES_DOWN
        elif ratio > 0.95:
            classification = STAYS_INFINITE
        else:
            classification = INCONCLUSIVE

        if classification == STAYS_INFINITE and measure.atom1 > 0.0:
            classification = NEITHER

    lfv_common.logit({
        'level': 'VERBOSE',
        'message': f'{measure.spec()}: {classification} ({method})'
    })
    report = CdiReport(classification, partial_sums, method)

    if fit and classification == COMES_DOWN:
        result = fit_alpha(measure, m_grid)

        if result.fitted and result.residual <= FIT_RESIDUAL_MAX:
            report.fit = result

    return report


def cg_constant(c, gamma, eps):
    """C(c,γ,ε) with λ_n >= C n^{1+γ} under the (c,ε,γ)-property."""
    return (c * eps ** (1.0 - gamma) / (2.0 * (1.0 - gamma))
            * (1.0 / (3.0 * (2.0 - gamma))) ** gamma
            * math.exp(-gamma ** 2 / (2.0 * (1.0 - gamma))))


def cg_tail_bound(c, gamma, eps, m):
    """Upper bound 1/(γ C m^γ) for Σ_{k>m} λ_k^-1."""
    return 1.0 / (gamma * cg_constant(c, gamma, eps) * m ** gamma)


def beta_cg_parameters(beta, eps=0.5):
    """(c, γ, ε) such that Beta(2-β, β) dominates c x^{-γ} on [0, ε]."""
    if not 1.0 < beta < 2.0:
        _argument_error(f'The (c,ε,γ)-property needs 1 < β < 2, got {beta}')
    if not 0.0 < eps < 1.0:
        _argument_error(f'ε must lie in (0, 1), got {eps}')

    c = (1.0 - eps) ** (beta - 1.0) \
        / math.exp(special.betaln(2.0 - beta, beta))

    return c, beta - 1.0, eps


class CgBoundReport(object):

    def __init__(self, constant, min_ratio, argmin, passed, tails):
        self.constant = constant
        self.min_ratio = min_ratio
        self.argmin = argmin
        self.passed = passed
        self.tails = tails

    def to_dict(self):
        return {
            'constant': self.constant,
            'min_ratio': self.min_ratio,
            'argmin_n': self.argmin,
            'passed': self.passed,
            'tails': {
                str(m): {'bound': bound, 'tail_sum': tail}
                for m, (bound, tail) in self.tails.items()
            }
        }


def cg_lower_bound_check(c, gamma, eps, n_max, measure=None,
                         tail_m=(10, 20, 40)):
    """
    Check λ_n >= C(c,γ,ε) n^{1+γ} for 2 <= n <= n_max on the pure powerlaw
    measure, or on any measure known to dominate it.
    """
    if not (c > 0.0 and 0.0 < gamma < 1.0 and 0.0 < eps < 1.0):
        _argument_error(
            f'Need c > 0, 0 < γ < 1, 0 < ε < 1; got c={c}, γ={gamma},'
            f' ε={eps}'
        )
    if n_max < 2:
        _argument_error(f'n_max must be at least 2, got {n_max}')

    constant = cg_constant(c, gamma, eps)

    if measure is None:
        measure = LambdaMeasure(density=PowerLawDensity(c, gamma, eps))

    ns = np.arange(2, n_max + 1)
    rates = np.array([decrease_rates(measure, int(n))[0] for n in ns])
    ratios = rates / ns ** (1.0 + gamma)
    i = int(np.argmin(ratios))
    tails = {}
    table = tail_table(measure, list(tail_m), DEFAULT_B_CAP)

    for m in tail_m:
        tails[m] = (cg_tail_bound(c, gamma, eps, m),
                    table[m].extrapolated('lambda_b'))

    return CgBoundReport(constant, float(ratios[i]), int(ns[i]),
                         bool(ratios[i] >= constant), tails)
