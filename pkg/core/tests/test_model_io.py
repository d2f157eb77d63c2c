import io
import json

from django.test import SimpleTestCase

from core.exceptions import DomainError, ModelFormatError
from core.model_io import model_from_json, model_to_json
from environments.builders import build_ab, build_lucky_unlucky, build_snakemaze


def round_trip(model):
    buffer = io.StringIO()
    model_to_json(model, buffer)
    buffer.seek(0)
    return model_from_json(buffer)


class ModelFileTests(SimpleTestCase):
    def test_round_trip_is_lossless(self):
        for model in (build_ab(0.1), build_lucky_unlucky(0.35, 0.2), build_snakemaze(3, 4, alpha=0.7)):
            with self.subTest(model=model.name):
                self.assertEqual(round_trip(model), model)

    def test_file_is_plain_json(self):
        buffer = io.StringIO()
        model_to_json(build_ab(0.25), buffer)
        data = json.loads(buffer.getvalue())
        self.assertEqual(data['num_states'], 4)
        self.assertEqual(data['terminals'], [3])
        self.assertEqual(data['measure_cost'], 0.25)
        self.assertEqual(len(data['rows']), 8)
        self.assertEqual(data['rows'][0]['entries'], [{'sp': 1, 'lo': 0.0, 'hi': 1.0}, {'sp': 2, 'lo': 0.0, 'hi': 1.0}])

    def load(self, text):
        return model_from_json(io.StringIO(text))

    def test_invalid_json(self):
        with self.assertRaises(ModelFormatError):
            self.load('{"num_states": 2,')

    def test_missing_rows(self):
        with self.assertRaises(ModelFormatError):
            self.load('{"num_states": 2}')

    def test_invalid_header(self):
        header = {
            'num_states': 2, 'num_actions': 1, 'discount': 0.0, 'measure_cost': 0.1,
            'initial_state': 0, 'terminals': [1], 'rows': [],
        }
        with self.assertRaises(ModelFormatError):
            self.load(json.dumps(header))
        header.update(discount=0.9, initial_state=2)
        with self.assertRaises(ModelFormatError):
            self.load(json.dumps(header))

    def test_malformed_entry(self):
        data = {
            'num_states': 2, 'num_actions': 1, 'discount': 1.0, 'measure_cost': 0.0,
            'initial_state': 0, 'terminals': [1],
            'rows': [{'s': 0, 'a': 0, 'entries': [{'sp': 1, 'lo': 1.0}]}],
        }
        with self.assertRaises(ModelFormatError):
            self.load(json.dumps(data))
        data['rows'] = [{'s': 5, 'a': 0, 'entries': [{'sp': 1, 'lo': 1.0, 'hi': 1.0}]}]
        with self.assertRaises(ModelFormatError):
            self.load(json.dumps(data))

    def test_name_is_kept(self):
        self.assertEqual(round_trip(build_snakemaze(3, 3)).name, 'snakemaze')
        self.assertEqual(round_trip(build_ab()).name, 'ab')

    def test_negative_indices_are_rejected(self):
        base = {
            'num_states': 2, 'num_actions': 2, 'discount': 1.0, 'measure_cost': 0.0,
            'initial_state': 0, 'terminals': [1],
        }
        entry = {'sp': 1, 'lo': 1.0, 'hi': 1.0}
        cases = (
            {'rows': [{'s': 0, 'a': 0, 'entries': [entry]}], 'rewards': [{'s': -1, 'a': 0, 'r': 1.0}]},
            {'rows': [{'s': 0, 'a': 0, 'entries': [entry]}], 'rewards': [{'s': 0, 'a': -1, 'r': 1.0}]},
            {'rows': [{'s': 1, 'a': -1, 'entries': [entry]}]},
            {'rows': [{'s': 0, 'a': 0, 'entries': [{'sp': -1, 'lo': 1.0, 'hi': 1.0}]}]},
        )
        for case in cases:
            with self.subTest(case=case):
                with self.assertRaises(DomainError):
                    self.load(json.dumps({**base, **case}))
