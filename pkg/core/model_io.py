"""
JSON model files.

Layout::

    {"name": .., "num_states": .., "num_actions": .., "discount": ..,
     "measure_cost": .., "initial_state": .., "terminals": [..],
     "rows": [{"s": .., "a": .., "entries": [{"sp": .., "lo": .., "hi": ..}]}],
     "rewards": [{"s": .., "a": .., "r": ..}]}

Floats are written with ``repr`` so a round trip is lossless.
"""
import json
import logging

import numpy as np

from .exceptions import ModelFormatError
from .ram_model import RamMdp
from .serializers import ModelFileSerializer

logger = logging.getLogger('core')


def model_to_json(m, fp):
    """Stream a model to a text file object, one row at a time"""
    header = {
        'name': m.name or '',
        'num_states': m.num_states,
        'num_actions': m.num_actions,
        'discount': m.discount,
        'measure_cost': m.measure_cost,
        'initial_state': m.initial_state,
        'terminals': sorted(m.terminal_states),
    }
    fp.write('{')
    for key, value in header.items():
        fp.write(f'"{key}": {json.dumps(value)}, ')
    fp.write('"rows": [')
    indptr = m.indptr
    succ, lo, hi = m.successors.tolist(), m.lo.tolist(), m.hi.tolist()
    for k in range(m.num_rows):
        s, a = divmod(k, m.num_actions)
        start, end = int(indptr[k]), int(indptr[k + 1])
        entries = [{'sp': succ[e], 'lo': lo[e], 'hi': hi[e]} for e in range(start, end)]
        fp.write((',\n' if k else '\n') + json.dumps({'s': s, 'a': a, 'entries': entries}))
    fp.write('\n], "rewards": [')
    rewards = m.rewards.tolist()
    first = True
    for s in range(m.num_states):
        for a in range(m.num_actions):
            fp.write(('' if first else ',\n') + json.dumps({'s': s, 'a': a, 'r': rewards[s][a]}))
            first = False
    fp.write(']}\n')
    logger.info(f"Wrote model with {m.num_states} states and {m.num_entries} entries")


def _checked(value, bound, what):
    index = int(value)
    if not 0 <= index < bound:
        raise ModelFormatError(f"{what.capitalize()} index {index} outside [0, {bound})")
    return index


def _index(item, num_states, num_actions):
    return _checked(item['s'], num_states, 'state'), _checked(item['a'], num_actions, 'action')


def model_from_json(fp):
    """Read a model file; raises ModelFormatError on malformed input"""
    try:
        data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"Model file is not valid JSON: {exc}") from exc

    if not isinstance(data, dict) or not isinstance(data.get('rows'), list):
        raise ModelFormatError("Model file needs a top-level object with a 'rows' list")
    header = {key: value for key, value in data.items() if key not in ('rows', 'rewards')}
    serializer = ModelFileSerializer(data=header)
    if not serializer.is_valid():
        raise ModelFormatError(f"Invalid model file: {dict(serializer.errors)}")
    rows, reward_items = data['rows'], data.get('rewards', [])
    data = serializer.validated_data
    num_states, num_actions = data['num_states'], data['num_actions']

    row_idx, succ, lo, hi = [], [], [], []
    try:
        for row in rows:
            s, a = _index(row, num_states, num_actions)
            for entry in row['entries']:
                row_idx.append(s * num_actions + a)
                succ.append(_checked(entry['sp'], num_states, 'successor'))
                lo.append(float(entry['lo']))
                hi.append(float(entry['hi']))
        rewards = np.zeros((num_states, num_actions))
        for item in reward_items:
            rewards[_index(item, num_states, num_actions)] = float(item['r'])
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ModelFormatError(f"Malformed row or reward entry: {exc!r}") from exc

    return RamMdp.from_arrays(
        num_states, num_actions, row_idx, succ, lo, hi, rewards,
        measure_cost=data['measure_cost'], discount=data['discount'],
        initial_state=data['initial_state'], terminal_states=data['terminals'], name=data['name'],
    )
