# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Load run configurations and write artifacts with their manifest."""
import copy
import json
import math
import os
import time

import lfv_lib
import lfv_lib.lfv_common as lfv_common
import lfv_lib.lfv_exceptions as lfv_exceptions
import lfv_lib.lfv_measures as lfv_measures

ARTIFACT_VERSION = 1
DEFAULT_OUTPUT_DIR = 'lfv-output'
MODULES = ('measures', 'coalescent', 'lookdown', 'estimators', 'cli')
STOCHASTIC = ('coalescent', 'tm', 'lookdown', 'support', 'dimension',
              'moment2')


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _integer(minimum=None):
    def check(value):
        if not _is_int(value):
            raise ValueError(f'expected an integer, got {value!r}')
        if minimum is not None and value < minimum:
            raise ValueError(f'must be at least {minimum}, got {value}')

        return value

    return check


def _real(minimum=None, strict=False, maximum=None):
    def check(value):
        if not _is_real(value) or not math.isfinite(value):
            raise ValueError(f'expected a finite number, got {value!r}')
        if minimum is not None and (
                value < minimum or (strict and value == minimum)):
            side = '>' if strict else '>='
            raise ValueError(f'must be {side} {minimum}, got {value}')
        if maximum is not None and value >= maximum:
            raise ValueError(f'must be < {maximum}, got {value}')

        return float(value)

    return check


def _optional(check):
    def wrapped(value):
        return None if value is None else check(value)

    return wrapped


def _integers(minimum=1, increasing=False, allow_single=False):
    single = _integer(minimum)

    def check(value):
        if allow_single and _is_int(value):
            return [single(value)]
        if not isinstance(value, list) or not value:
            raise ValueError(f'expected a non-empty list, got {value!r}')

        values = [single(v) for v in value]

        if increasing and any(a >= b for a, b in zip(values, values[1:])):
            raise ValueError(f'must increase strictly: {values}')

        return values

    return check


def _reals(minimum=None, strict=False, decreasing=False):
    single = _real(minimum, strict)

    def check(value):
        if not isinstance(value, list):
            raise ValueError(f'expected a list, got {value!r}')

        values = [single(v) for v in value]

        if decreasing and any(a <= b for a, b in zip(values, values[1:])):
            raise ValueError(f'must decrease strictly: {values}')

        return values

    return check


def _choice(*choices):
    def check(value):
        if value not in choices:
            raise ValueError(
                f'must be one of {", ".join(choices)}, got {value!r}'
            )

        return value

    return check


def _boolean(value):
    if not isinstance(value, bool):
        raise ValueError(f'expected true or false, got {value!r}')

    return value


def _string(value):
    if not isinstance(value, str) or not value:
        raise ValueError(f'expected a non-empty string, got {value!r}')

    return value


def _measure(value):
    with lfv_common.raising():
        lfv_measures.parse_measure(value)

    return value


def _n_start(value):
    if value == 'auto':
        return value

    return _integer(1)(value)


def _test_function(value):
    if not isinstance(value, dict) or set(value) - {'center', 'width'}:
        raise ValueError('expected {"center": [...], "width": w}')

    width = _real(0.0, strict=True)(value.get('width', 1.0))
    center = value.get('center')

    if center is not None:
        center = _reals()(center)

    return {'center': center, 'width': width}


def _initial(value):
    if value in ('origin', 'levels'):
        return value
    if isinstance(value, dict):
        kind = value.get('kind')
        field = {'normal': 'scale', 'uniform': 'width'}.get(kind)

        if field and set(value) <= {'kind', field}:
            return {
                'kind': kind,
                field: _real(0.0, strict=True)(value.get(field, 1.0))
            }

    raise ValueError('expected "origin", "levels", {"kind": "normal",'
                     ' "scale": s} or {"kind": "uniform", "width": w}')


def _modules(value):
    values = value if isinstance(value, list) else [value]

    return [_choice(*MODULES)(v) for v in values]


def default_output_dir():
    return os.environ.get('LFV_OUTPUT_DIR', DEFAULT_OUTPUT_DIR)


# key: (check, default); a callable default is evaluated per load
CONFIG_PROPS = {
    'measure': (_measure, None),
    'seed': (_integer(0), None),
    'output_dir': (_string, default_output_dir),
    'workers': (_integer(1), 1),
    'replicas': (_integer(1), 100),
    'n': (_integer(1), 64),
    'd': (_integer(1), 2),
    'T': (_real(0.0), 1.0),
    'b': (_integer(3), 10),
    'm': (_integers(1, allow_single=True), [2]),
    'm_grid': (_integers(2, increasing=True),
               list(lfv_measures.DEFAULT_M_GRID)),
    'b_max': (_integer(2), 30),
    'b_cap': (_integer(3), lfv_measures.DEFAULT_B_CAP),
    'n_start': (_n_start, 'auto'),
    'max_n_start': (_integer(2), 8192),
    'horizon': (_optional(_real(0.0)), None),
    'snapshot_times': (_reals(0.0), []),
    'record_times': (_reals(0.0), []),
    'scales': (_optional(_reals(0.0, strict=True, decreasing=True)), None),
    'alpha': (_optional(_real(0.0, strict=True)), None),
    'delta': (_real(0.0, strict=True, maximum=0.5), 0.25),
    'exponents': (_reals(0.0, strict=True), [1.0, 1.5]),
    'phi1': (_test_function, {'center': None, 'width': 1.0}),
    'phi2': (_test_function, {'center': None, 'width': 1.0}),
    'initial': (_initial, 'origin'),
    'method': (_choice('auto', 'forward', 'ancestral'), 'auto'),
    'max_levels': (_integer(1), 4096),
    'points_file': (_optional(_string), None),
    'quick': (_boolean, False),
    'modules': (_optional(_modules), None)
}


class RunConfig(object):

    """Validated, flat configuration of one run."""

    def __init__(self, values):
        self._values = values

    def __getitem__(self, key):
        return self._values[key]

    def get(self, key, default=None):
        value = self._values.get(key)

        return default if value is None else value

    def measure(self):
        if self._values.get('measure') is None:
            lfv_common.logit(
                {
                    'level': 'EXCEPTION',
                    'message': 'measure: a measure is required'
                },
                exception=lfv_exceptions.ConfigError
            )

        return lfv_measures.parse_measure(self._values['measure'])

    def to_dict(self):
        return copy.deepcopy(self._values)


def load_config(path=None, overrides=None, require_seed=True):
    """
    Read a JSON object from path, apply the non-None overrides and
    validate every key. All violations are reported together.
    """
    data = {}
    violations = []

    if path is not None:
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except json.JSONDecodeError as err:
            violations.append(f'{path}: malformed JSON: {err}')
        except OSError as err:
            violations.append(f'{path}: {err.strerror}')

        if not isinstance(data, dict):
            violations.append(f'{path}: expected a JSON object')
            data = {}

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    for key in sorted(set(data) - set(CONFIG_PROPS)):
        violations.append(f'unknown key "{key}"')

    values = {}

    for key, (check, default) in CONFIG_PROPS.items():
        if key in data:
            try:
                values[key] = check(data[key])
            except (ValueError, TypeError) as err:
                violations.append(f'{key}: {err}')
        else:
            values[key] = default() if callable(default) \
                else copy.deepcopy(default)

    if require_seed and values.get('seed') is None \
            and not any(v.startswith('seed:') for v in violations):
        violations.append('seed: a master seed is required')

    if violations:
        lfv_common.logit(
            {
                'level': 'EXCEPTION',
                'message': violations
            },
            exception=lfv_exceptions.ConfigError
        )

    return RunConfig(values)


class Artifact(object):

    def __init__(self, name, text):
        self.name = name
        self.text = text

    @classmethod
    def csv(cls, name, header, rows):
        return cls(name, lfv_common.csv_text(header, rows))

    @classmethod
    def json(cls, name, payload):
        return cls(name, lfv_common.json_text(payload))

    @classmethod
    def jsonl(cls, name, records):
        return cls(name, lfv_common.jsonl_text(records))


class RunManifest(object):

    def __init__(self, path, files, config, wall_clock):
        self.path = path
        self.files = files
        self.config = config
        self.wall_clock = wall_clock

    def to_dict(self):
        return {
            'artifact_version': ARTIFACT_VERSION,
            'lfv_version': lfv_lib.__version__,
            'config': self.config,
            'files': self.files,
            'seed_rule': lfv_common.SEED_RULE,
            'wall_clock_seconds': self.wall_clock
        }


def write_outputs(directory, artifacts, config=None, started=None):
    """Write artifacts atomically, then manifest.json with checksums."""
    os.makedirs(directory, exist_ok=True)
    files = {}

    for artifact in artifacts:
        path = os.path.join(directory, artifact.name)

        with lfv_common.open_atomic(path, 'w', encoding='utf-8',
                                    newline='') as f:
            f.write(artifact.text)

        files[artifact.name] = lfv_common.sha256_file(path)
        lfv_common.logit({
            'level': 'VERBOSE',
            'message': f'Wrote {path}'
        })

    wall_clock = time.monotonic() - started if started is not None else None
    manifest = RunManifest(
        os.path.join(directory, 'manifest.json'), files,
        config.to_dict() if config is not None else None, wall_clock
    )

    with lfv_common.open_atomic(manifest.path, 'w', encoding='utf-8') as f:
        f.write(lfv_common.json_text(manifest.to_dict()))

    return manifest
