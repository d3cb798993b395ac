import csv
import io
import json
import logging
import os
import tempfile

import numpy as np


ZERO_TOL = 1e-12
RANK_TOL = 1e-10
GROUP_TOL = 1e-9
MEMBERSHIP_TOL = 1e-9
ENDPOINT_TOL = 1e-6
FD_STEP = 1e-5
HERMITE_N = 200
CLIFFORD_CAP = 12

log = logging.getLogger(__name__)


class DomainError(ValueError):
    '''Any error caused by the inputs rather than by this code'''


class MalformedInputError(DomainError):
    pass


class UnsupportedError(DomainError):
    pass


class ConventionError(DomainError):
    pass


class LayerIndexError(DomainError):
    pass


class SizeError(DomainError):
    pass


class PairingError(DomainError):
    pass


class ParityError(DomainError):
    pass


class DegenerateLeviError(DomainError):
    pass


class CutoffError(DomainError):
    pass


class ConsistencyError(RuntimeError):
    pass


def group_eigenvalues(values, tol):
    '''Sorts real values and merges runs closer than tol.
    Returns a list of (value, multiplicity) pairs, each value being
    the mean of its run.'''
    values = np.sort(np.asarray(values, dtype=float))
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            run = values[start:i]
            groups.append((float(run.mean()), len(run)))
            start = i
    return groups


def snap(value, tol=ZERO_TOL):
    # -0.0 and rounding dust both print as 0.0
    if abs(value) <= tol:
        return 0.0
    return float(value)


def parse_floats(s):
    '''parses "1,0,0.5" into a list of floats'''
    try:
        return [float(v) for v in s.split(',') if v.strip()]
    except ValueError:
        raise MalformedInputError('not a comma separated number list: {}'.format(s))


def read_json(path):
    '''Reads a JSON file, turning parse errors into MalformedInputError
    with the line and column of the problem'''
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise MalformedInputError('cannot read {}: {}'.format(path, e.strerror))
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInputError('{}: line {} column {}: {}'.format(
            path, e.lineno, e.colno, e.msg))


def require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedInputError('{}: missing field "{}"'.format(where, key))
    return obj[key]


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + '\n'


def csv_text(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return out.getvalue()


def atomic_write(path, data):
    '''Writes text or bytes to path through a temporary file in the same
    directory, so readers never see a partial artifact'''
    directory = os.path.dirname(os.path.abspath(path))
    mode = 'wb' if isinstance(data, bytes) else 'w'
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-')
    try:
        with os.fdopen(fd, mode) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    log.debug('wrote %s', path)
