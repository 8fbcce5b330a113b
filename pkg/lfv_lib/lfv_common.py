# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Common methods we reuse."""
import collections.abc
import concurrent.futures
import contextlib
import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile as tmp

import numpy as np

INTERACTIVE = False
SEED_RULE = 'numpy.random.default_rng(SeedSequence([seed, replica_index]))'


def callback(_log, callback_exception):
    """Helper to call the appropriate logging level"""
    log = logging.getLogger('lfv')
    level = _log['level']
    message = _log['message']
    force_raise = _log.get('force_raise')
    suppress_log = _log.get('suppress_log')

    if level == 'CRITICAL':
        log.critical(message)
    elif level == 'ERROR':
        log.error(message)
    elif level == 'WARNING':
        log.warning(message)
    elif level == 'INFO':
        log.info(message)
    elif level == 'DEBUG':
        log.debug(message)
    elif level == 'VERBOSE':
        log.log(15, message)
    elif level == 'NOTICE':
        log.log(25, message)
    elif level == 'EXCEPTION':
        if not INTERACTIVE:
            raise callback_exception(message)
        else:
            if not isinstance(message, str) and isinstance(
                message,
                collections.abc.Iterable
            ):
                message = '\n'.join(str(m) for m in message)

            if not suppress_log:
                log.error(message)

            if force_raise:
                raise callback_exception(message)
            else:
                raise SystemExit(getattr(callback_exception, 'exit_code', 1))


def logit(content, _callback=None, silent=False, exception=RuntimeError):
    """Helper to check callable status of callback or call ours."""
    if silent and callable(_callback) and content['level'] != 'EXCEPTION':
        # Send these through for completeness to library consumers
        _callback(content, exception)

        return
    elif silent and content['level'] != 'EXCEPTION':
        return

    if content['level'] == 'EXCEPTION':
        callback(content, exception)

    _callback = _callback if callable(_callback) else callback
    _callback(content, exception)


def set_interactive(interactive):
    """Switch EXCEPTION logging between raising and exiting."""
    global INTERACTIVE
    INTERACTIVE = interactive


@contextlib.contextmanager
def tempfile(suffix='', dir=None):
    """
    Context for temporary file.

    Will find a free temporary filename upon entering
    and will try to delete the file on leaving, even in case of an exception.

    Parameters
    ----------
    suffix : string
        optional file suffix
    dir : string
        optional directory to save temporary file in
    """

    tf = tmp.NamedTemporaryFile(delete=False, suffix=suffix, dir=dir)
    tf.file.close()
    try:
        yield tf.name
    finally:
        try:
            os.remove(tf.name)
        except FileNotFoundError:
            pass


@contextlib.contextmanager
def open_atomic(filepath, *args, **kwargs):
    """
    Open temporary file object that atomically moves to destination upon
    exiting.

    The file will not be moved to destination in case of an exception.

    Parameters
    ----------
    filepath : string
        the file path to be opened
    fsync : bool
        whether to force write the file to disk
    *args : mixed
        Any valid arguments for :code:`open`
    **kwargs : mixed
        Any valid keyword arguments for :code:`open`
    """
    fsync = kwargs.pop('fsync', False)

    with tempfile(dir=os.path.dirname(os.path.abspath(filepath))) as tmppath:
        with open(tmppath, *args, **kwargs) as file:
            try:
                yield file
            finally:
                if fsync:
                    file.flush()
                    os.fsync(file.fileno())
        os.replace(tmppath, filepath)
        os.chmod(filepath, 0o644)


def sha256_file(filepath):
    digest = hashlib.sha256()

    with open(filepath, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            digest.update(chunk)

    return digest.hexdigest()


def format_number(value):
    """Round-trip text for a scalar cell."""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)

        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'

        return repr(value)
    if value is None:
        return ''

    return str(value)


def jsonable(obj):
    """Convert numpy and non-finite values into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)

        if math.isfinite(value):
            return value

        return format_number(value)

    return obj


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)

    for row in rows:
        writer.writerow([format_number(cell) for cell in row])

    return buf.getvalue()


def json_text(payload):
    return json.dumps(jsonable(payload), indent=2, sort_keys=True) + '\n'


def jsonl_text(records):
    return ''.join(
        json.dumps(jsonable(r), sort_keys=True) + '\n' for r in records
    )


def replica_rng(seed, index):
    """Private generator stream for one replica."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(index)])
    )


def _run_one(func, payload, seed, index):
    return func(payload, replica_rng(seed, index), index)


def run_replicas(func, payload, seed, replicas, workers=1):
    """
    Evaluate func(payload, rng, index) for every replica index.

    Results come back in replica order regardless of the worker count, so
    aggregates are bit-for-bit reproducible. func and payload must pickle
    when workers > 1.
    """
    indices = range(replicas)

    if workers <= 1 or replicas <= 1:
        return [_run_one(func, payload, seed, i) for i in indices]

    logit({
        'level': 'DEBUG',
        'message': f'Running {replicas} replicas on {workers} workers'
    })
    chunksize = max(1, replicas // (4 * workers))

    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(
            _run_one,
            [func] * replicas,
            [payload] * replicas,
            [seed] * replicas,
            indices,
            chunksize=chunksize
        ))


def mean_and_se(values):
    values = np.asarray(values, dtype=float)

    if values.size == 0:
        return math.nan, math.nan
    if values.size == 1:
        return float(values[0]), math.inf

    return (
        float(values.mean()),
        float(values.std(ddof=1) / math.sqrt(values.size))
    )


@contextlib.contextmanager
def raising():
    """Make EXCEPTION logging raise, even in interactive mode."""
    interactive = INTERACTIVE
    set_interactive(False)

    try:
        yield
    finally:
        set_interactive(interactive)
