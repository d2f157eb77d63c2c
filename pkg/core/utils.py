import hashlib
import json

import numpy as np

from .solver_config import SolverConfig


def tied_indices(values, tol=None):
    """Indices whose value lies within tol of the maximum"""
    values = np.asarray(values, dtype=float)
    if tol is None:
        tol = SolverConfig.tie_tolerance()
    return np.flatnonzero(values >= values.max() - tol)


def tied_argmax(values, tol=None, rng=None):
    """
    Arg-max that treats values within tol as equal.

    Ties go to the lowest index, or to a uniformly drawn index when an rng is
    given.
    """
    candidates = tied_indices(values, tol)
    if rng is None or len(candidates) == 1:
        return int(candidates[0])
    return int(candidates[rng.integers(len(candidates))])


def argmax_rows(matrix, tol=None):
    """Per-row tie-aware arg-max with lowest-index ties"""
    matrix = np.asarray(matrix, dtype=float)
    if tol is None:
        tol = SolverConfig.tie_tolerance()
    best = matrix.max(axis=1, keepdims=True)
    return np.argmax(matrix >= best - tol, axis=1)


def discounted_sum(values, discount):
    """Sum of values[t] * discount**t"""
    values = np.asarray(values, dtype=float)
    return float(np.sum(values * discount ** np.arange(len(values))))


def parse_param(text):
    """Parse a CLI parameter of the form key=value"""
    if '=' not in text:
        raise ValueError(f"Expected key=value, got '{text}'")
    key, raw = text.split('=', 1)
    key = key.strip().replace('-', '_')
    raw = raw.strip()
    for cast in (int, float):
        try:
            return key, cast(raw)
        except ValueError:
            continue
    if raw.lower() in ('true', 'false'):
        return key, raw.lower() == 'true'
    return key, raw


def config_digest(data):
    """Stable sha256 of a JSON-serialisable mapping"""
    payload = json.dumps(data, sort_keys=True, default=str).encode()
    return hashlib.sha256(payload).hexdigest()
